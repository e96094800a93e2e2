#include "membership_model.hpp"

#include <algorithm>

namespace latticeborell::detail {

namespace {

constexpr int kMaxCutRounds = 400;

template <class T>
lp::Solution<T> solve_or_throw(const lp::LinearProgram<T>& program) {
  auto sol = lp::solve(program);
  if (sol.status == lp::Status::Infeasible) throw Error(ErrorKind::LpInfeasible, "membership model infeasible");
  if (sol.status == lp::Status::Unbounded) throw Error(ErrorKind::UnboundedBody, "membership model unbounded");
  return sol;
}

/// Adds a tangent cut for every ball whose LP point is outside it. Returns
/// the largest ratio ||z|| / (r g) seen (1 when all are satisfied).
double cut_balls(MembershipModel<double>& model, const std::vector<double>& values) {
  double worst = 1.0;
  const double g = values[static_cast<std::size_t>(model.scale_var())];
  std::vector<std::pair<int, std::vector<lp::Term<double>>>> cuts;
  for (const auto& ball : model.balls()) {
    double norm2 = 0.0;
    for (int v : ball.vars) norm2 += values[static_cast<std::size_t>(v)] * values[static_cast<std::size_t>(v)];
    const double norm = std::sqrt(norm2);
    const double limit = ball.radius * g;
    if (norm <= limit * (1.0 + 1e-13) + 1e-15) continue;
    worst = std::max(worst, limit > 0 ? norm / limit : 1e300);
    Expr<double> cut;
    for (int v : ball.vars) cut.push_back({v, values[static_cast<std::size_t>(v)] / norm});
    cut.push_back({model.scale_var(), -ball.radius});
    model.program().add_row(std::move(cut), lp::Sense::LessEqual, 0.0);
  }
  return worst;
}

/// Projects each ball block of `values` back onto its ball.
void project_balls(MembershipModel<double>& model, std::vector<double>& values) {
  const auto& balls = model.balls();
  const double g = values[static_cast<std::size_t>(model.scale_var())];
  for (const auto& ball : balls) {
    double norm2 = 0.0;
    for (int v : ball.vars) norm2 += values[static_cast<std::size_t>(v)] * values[static_cast<std::size_t>(v)];
    const double norm = std::sqrt(norm2);
    const double limit = ball.radius * g;
    if (norm <= limit) continue;
    for (int v : ball.vars) values[static_cast<std::size_t>(v)] *= limit / norm;
  }
}

bool decided(const Bracket& b, std::optional<double> decide_at, double tol) {
  if (b.upper - b.lower <= 1e-12 * std::max(1.0, std::abs(b.upper))) return true;
  if (decide_at && (b.upper < *decide_at - tol || b.lower > *decide_at + tol)) return true;
  return false;
}

}  // namespace

Bracket distance_bracket(const ConvexBody& body, const Vec& x, bool drop_cube, std::optional<double> decide_at,
                         double tol) {
  MembershipModel<double> model(ModelMode::Distance);
  auto coords = model.embed(body, drop_cube);
  auto& program = model.program();
  const int t = program.add_variable(true);
  program.set_objective(t, 1.0);
  for (int i = 0; i < body.dim(); ++i) {
    // x_i - y_i <= t and y_i - x_i <= t
    Expr<double> lo = scaled_expr(coords[static_cast<std::size_t>(i)], -1.0);
    lo.push_back({t, -1.0});
    program.add_row(std::move(lo), lp::Sense::LessEqual, -x(i));
    Expr<double> hi = coords[static_cast<std::size_t>(i)];
    hi.push_back({t, -1.0});
    program.add_row(std::move(hi), lp::Sense::LessEqual, x(i));
  }
  Bracket bracket{0.0, 0.0};
  for (int round = 0; round < kMaxCutRounds; ++round) {
    lp::Solution<double> sol;
    try {
      sol = solve_or_throw(program);
    } catch (const Error&) {
      // Cuts only tighten the relaxation, so the last bracket still holds.
      if (round == 0) throw;
      return bracket;
    }
    bracket.lower = std::max(0.0, sol.objective);
    if (model.balls().empty()) {
      bracket.upper = bracket.lower;
      return bracket;
    }
    std::vector<double> projected = sol.x;
    project_balls(model, projected);
    double upper = 0.0;
    for (int i = 0; i < body.dim(); ++i) {
      upper = std::max(upper, std::abs(x(i) - evaluate(coords[static_cast<std::size_t>(i)], projected)));
    }
    bracket.upper = std::max(upper, bracket.lower);
    if (cut_balls(model, sol.x) <= 1.0 || decided(bracket, decide_at, tol)) return bracket;
  }
  return bracket;
}

Bracket gauge_bracket(const ConvexBody& body, const Vec& x, bool drop_cube, std::optional<double> decide_at,
                      double tol) {
  MembershipModel<double> model(ModelMode::Gauge);
  auto coords = model.embed(body, drop_cube);
  auto& program = model.program();
  program.set_objective(model.scale_var(), 1.0);
  for (int i = 0; i < body.dim(); ++i) program.add_row(coords[static_cast<std::size_t>(i)], lp::Sense::Equal, x(i));
  Bracket bracket{0.0, 0.0};
  for (int round = 0; round < kMaxCutRounds; ++round) {
    lp::Solution<double> sol;
    try {
      sol = lp::solve(program);
    } catch (const Error&) {
      if (round == 0) throw;
      return bracket;
    }
    if (sol.status != lp::Status::Optimal) {
      if (round > 0) return bracket;
      // x outside the cone spanned by K: infinite gauge.
      return {1e300, 1e300};
    }
    bracket.lower = sol.objective;
    const double worst = cut_balls(model, sol.x);
    bracket.upper = bracket.lower * worst;
    if (worst <= 1.0 || decided(bracket, decide_at, tol)) return bracket;
  }
  return bracket;
}

Rational distance_exact(const ConvexBody& body, const RVec& x, bool drop_cube) {
  MembershipModel<Rational> model(ModelMode::Distance);
  auto coords = model.embed(body, drop_cube);
  auto& program = model.program();
  const int t = program.add_variable(true);
  program.set_objective(t, Rational(1));
  for (int i = 0; i < body.dim(); ++i) {
    Expr<Rational> lo = scaled_expr(coords[static_cast<std::size_t>(i)], Rational(-1));
    lo.push_back({t, Rational(-1)});
    program.add_row(std::move(lo), lp::Sense::LessEqual, Rational(-x[static_cast<std::size_t>(i)]));
    Expr<Rational> hi = coords[static_cast<std::size_t>(i)];
    hi.push_back({t, Rational(-1)});
    program.add_row(std::move(hi), lp::Sense::LessEqual, x[static_cast<std::size_t>(i)]);
  }
  return solve_or_throw(program).objective;
}

std::optional<Rational> gauge_exact(const ConvexBody& body, const RVec& x, bool drop_cube) {
  MembershipModel<Rational> model(ModelMode::Gauge);
  auto coords = model.embed(body, drop_cube);
  auto& program = model.program();
  program.set_objective(model.scale_var(), Rational(1));
  for (int i = 0; i < body.dim(); ++i) {
    program.add_row(coords[static_cast<std::size_t>(i)], lp::Sense::Equal, x[static_cast<std::size_t>(i)]);
  }
  auto sol = lp::solve(program);
  if (sol.status != lp::Status::Optimal) return std::nullopt;  // outside the cone spanned by K
  return sol.objective;
}

}  // namespace latticeborell::detail
