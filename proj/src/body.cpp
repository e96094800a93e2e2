#include "latticeborell/body.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "latticeborell/error.hpp"
#include "latticeborell/lp.hpp"
#include "membership_model.hpp"

namespace latticeborell {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vec to_vec(const RVec& v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = to_double(v[i]);
  return out;
}

RVec to_rvec(const IntPoint& x) {
  RVec out;
  out.reserve(x.size());
  for (auto v : x) out.emplace_back(v);
  return out;
}

Rational rabs(const Rational& v) { return v < 0 ? Rational(-v) : v; }

void require_dim(const ConvexBody& body, Eigen::Index n) {
  if (body.dim() != n) throw Error(ErrorKind::InvalidArgument, "dimension mismatch");
}

template <class D>
const D* as(const ConvexBody& body) {
  return std::get_if<D>(&body.node().data);
}

/// (U^T x)_j = signs[j] x_{perm[j]} for a signed permutation U.
template <class V>
V unpermute(const Rotation& u, const V& x) {
  V out = x;
  for (std::size_t j = 0; j < u.permutation().size(); ++j) {
    const auto src = static_cast<std::size_t>(u.permutation()[j]);
    if constexpr (std::is_same_v<V, Vec>) {
      out(static_cast<Eigen::Index>(j)) = u.signs()[j] * x(static_cast<Eigen::Index>(src));
    } else {
      out[j] = x[src] * u.signs()[j];
    }
  }
  return out;
}

// ---------------------------------------------------------------- radii

Radii hpolytope_radii(const HPolytopeData& d, int n) {
  double inner = kInf;
  for (Eigen::Index r = 0; r < d.a_d.rows(); ++r) inner = std::min(inner, d.b_d(r) / d.a_d.row(r).norm());
  // Circumradius from the vertices: every feasible intersection of n rows.
  const auto m = static_cast<int>(d.a_d.rows());
  double outer = 0.0;
  bool any = false;
  std::vector<int> pick(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) pick[static_cast<std::size_t>(i)] = i;
  while (m >= n) {
    Mat sub(n, n);
    Vec rhs(n);
    for (int i = 0; i < n; ++i) {
      sub.row(i) = d.a_d.row(pick[static_cast<std::size_t>(i)]);
      rhs(i) = d.b_d(pick[static_cast<std::size_t>(i)]);
    }
    Eigen::FullPivLU<Mat> lu(sub);
    if (lu.isInvertible()) {
      const Vec v = lu.solve(rhs);
      if (((d.a_d * v - d.b_d).array() <= 1e-9 * (1.0 + d.b_d.cwiseAbs().maxCoeff())).all()) {
        outer = std::max(outer, v.norm());
        any = true;
      }
    }
    int k = n - 1;
    while (k >= 0 && pick[static_cast<std::size_t>(k)] == m - n + k) --k;
    if (k < 0) break;
    ++pick[static_cast<std::size_t>(k)];
    for (int i = k + 1; i < n; ++i) pick[static_cast<std::size_t>(i)] = pick[static_cast<std::size_t>(i - 1)] + 1;
  }
  return {std::max(inner, 0.0), any ? outer : kInf, true};
}

Radii vpolytope_radii(const VPolytopeData& d, int n, bool origin_interior) {
  double outer = 0.0;
  for (Eigen::Index j = 0; j < d.vertices_d.cols(); ++j) outer = std::max(outer, d.vertices_d.col(j).norm());
  if (!origin_interior) return {0.0, outer, true};
  // Facets a.x = 1 through n affinely independent vertices with all others below.
  const auto m = static_cast<int>(d.vertices_d.cols());
  double inner = kInf;
  std::vector<int> pick(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) pick[static_cast<std::size_t>(i)] = i;
  while (m >= n) {
    Mat sub(n, n);
    for (int i = 0; i < n; ++i) sub.row(i) = d.vertices_d.col(pick[static_cast<std::size_t>(i)]).transpose();
    Eigen::FullPivLU<Mat> lu(sub);
    if (lu.isInvertible()) {
      const Vec a = lu.solve(Vec::Ones(n));
      if (((d.vertices_d.transpose() * a).array() <= 1.0 + 1e-9).all()) inner = std::min(inner, 1.0 / a.norm());
    }
    int k = n - 1;
    while (k >= 0 && pick[static_cast<std::size_t>(k)] == m - n + k) --k;
    if (k < 0) break;
    ++pick[static_cast<std::size_t>(k)];
    for (int i = k + 1; i < n; ++i) pick[static_cast<std::size_t>(i)] = pick[static_cast<std::size_t>(i - 1)] + 1;
  }
  return {inner == kInf ? 0.0 : inner, outer, true};
}

std::optional<Radii> compute_radii(const BodyNode& node) {
  if (!node.contains_origin) return std::nullopt;
  const int n = node.n;
  return std::visit(
      [&](const auto& d) -> std::optional<Radii> {
        using D = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<D, BoxData>) {
          return Radii{d.halfwidths_d.minCoeff(), d.halfwidths_d.norm(), true};
        } else if constexpr (std::is_same_v<D, BallData>) {
          return Radii{d.radius_d, d.radius_d, true};
        } else if constexpr (std::is_same_v<D, HPolytopeData>) {
          return hpolytope_radii(d, n);
        } else if constexpr (std::is_same_v<D, VPolytopeData>) {
          return vpolytope_radii(d, n, node.origin_interior);
        } else if constexpr (std::is_same_v<D, RotatedData>) {
          return d.base.node().radii;
        } else if constexpr (std::is_same_v<D, ScaledData>) {
          auto r = *d.base.node().radii;
          return Radii{r.inner * d.factor_d, r.outer * d.factor_d, r.exact};
        } else if constexpr (std::is_same_v<D, CubeSumData>) {
          const auto& base = d.base.node().radii;
          const double rn = std::sqrt(static_cast<double>(n));
          if (!base) return Radii{0.0, kInf, false};
          return Radii{base->inner + 1.0, base->outer + rn, false};
        } else {
          const auto& k = d.first.node().radii;
          const auto& l = d.second.node().radii;
          const double mu = to_double(d.mu);
          const double rn = std::sqrt(static_cast<double>(n));
          double inner = (k && l) ? (1.0 - mu) * k->inner + mu * l->inner : 0.0;
          double outer = (k && l) ? (1.0 - mu) * k->outer + mu * l->outer : kInf;
          if (d.plus_cube) {
            inner += 1.0;
            outer += rn;
          }
          return Radii{inner, outer, false};
        }
      },
      node.data);
}

// ---------------------------------------------------------------- distances

/// l_inf distance from x to the ball of radius r centred at 0.
double ball_linf_distance(const Vec& x, double r) {
  if (x.norm() <= r) return 0.0;
  std::vector<double> a(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) a[static_cast<std::size_t>(i)] = std::abs(x(i));
  std::sort(a.begin(), a.end(), std::greater<>());
  // Solve sum_{i<=k} (a_i - t)^2 = r^2 on the interval where exactly k terms are active.
  double s1 = 0.0;
  double s2 = 0.0;
  for (std::size_t k = 1; k <= a.size(); ++k) {
    s1 += a[k - 1];
    s2 += a[k - 1] * a[k - 1];
    const double kd = static_cast<double>(k);
    const double disc = std::max(0.0, s1 * s1 - kd * (s2 - r * r));
    const double t = (s1 - std::sqrt(disc)) / kd;
    const double next = k < a.size() ? a[k] : 0.0;
    if (t >= next - 1e-15) return std::max(t, 0.0);
  }
  return 0.0;
}

/// Closed forms where available; nullopt means "use the LP".
std::optional<double> linf_closed(const ConvexBody& body, const Vec& x) {
  const BodyNode& node = body.node();
  if (const auto* d = std::get_if<BoxData>(&node.data)) {
    return std::max(0.0, (x.cwiseAbs() - d->halfwidths_d).maxCoeff());
  }
  if (const auto* d = std::get_if<BallData>(&node.data)) return ball_linf_distance(x, d->radius_d);
  if (const auto* d = std::get_if<RotatedData>(&node.data)) {
    if (as<BallData>(d->base)) return linf_closed(d->base, x);
    if (d->rotation.lattice_preserving()) return linf_closed(d->base, unpermute(d->rotation, x));
    return std::nullopt;
  }
  if (const auto* d = std::get_if<ScaledData>(&node.data)) {
    auto inner = linf_closed(d->base, x / d->factor_d);
    if (!inner) return std::nullopt;
    return *inner * d->factor_d;
  }
  if (const auto* d = std::get_if<CubeSumData>(&node.data)) {
    auto inner = linf_closed(d->base, x);
    if (!inner) return std::nullopt;
    return std::max(0.0, *inner - 1.0);
  }
  return std::nullopt;
}

/// Upper end of the bracket, or a value inside the ambiguity band when the
/// bracket straddles the decision threshold.
double bracket_distance(const detail::Bracket& b, std::optional<double> decide_at, double tol) {
  if (decide_at && b.upper - b.lower > tol && b.lower <= *decide_at + tol && b.upper >= *decide_at - tol) {
    return *decide_at + 0.5 * tol;
  }
  return b.upper;
}

/// Distance to the body with a top-level cube removed, and whether it was removed.
double linf_without_cube(const ConvexBody& body, const Vec& x, bool& dropped, std::optional<double> decide_at,
                         double tol) {
  const BodyNode& node = body.node();
  dropped = false;
  if (const auto* d = std::get_if<CubeSumData>(&node.data)) {
    dropped = true;
    if (auto c = linf_closed(d->base, x)) return *c;
    return bracket_distance(detail::distance_bracket(d->base, x, false, decide_at, tol), decide_at, tol);
  }
  if (const auto* d = std::get_if<CombinationData>(&node.data)) {
    dropped = d->plus_cube;
    return bracket_distance(detail::distance_bracket(body, x, true, decide_at, tol), decide_at, tol);
  }
  if (auto c = linf_closed(body, x)) return *c;
  return bracket_distance(detail::distance_bracket(body, x, false, decide_at, tol), decide_at, tol);
}

std::optional<Rational> exact_distance(const ConvexBody& body, const RVec& x) {
  const BodyNode& node = body.node();
  if (const auto* d = std::get_if<BoxData>(&node.data)) {
    Rational best(0);
    for (std::size_t i = 0; i < x.size(); ++i) best = std::max(best, Rational(rabs(x[i]) - d->halfwidths[i]));
    return best;
  }
  if (const auto* d = std::get_if<BallData>(&node.data)) {
    Rational s(0);
    for (const auto& v : x) s += v * v;
    if (s <= d->radius * d->radius) return Rational(0);
    return std::nullopt;
  }
  if (const auto* d = std::get_if<RotatedData>(&node.data)) {
    if (as<BallData>(d->base)) return exact_distance(d->base, x);
    if (d->rotation.lattice_preserving()) return exact_distance(d->base, unpermute(d->rotation, x));
    return std::nullopt;
  }
  if (const auto* d = std::get_if<ScaledData>(&node.data)) {
    RVec y = x;
    for (auto& v : y) v /= d->factor;
    auto inner = exact_distance(d->base, y);
    if (!inner) return std::nullopt;
    return Rational(*inner * d->factor);
  }
  if (const auto* d = std::get_if<CubeSumData>(&node.data)) {
    auto inner = exact_distance(d->base, x);
    if (!inner) return std::nullopt;
    return std::max(Rational(0), Rational(*inner - 1));
  }
  if (!node.lp_exact) return std::nullopt;
  const auto* comb = std::get_if<CombinationData>(&node.data);
  Rational dist = detail::distance_exact(body, x, true);
  if (comb && comb->plus_cube) dist = std::max(Rational(0), Rational(dist - 1));
  return dist;
}

// ---------------------------------------------------------------- classification

Label label_for(double margin, double tol) {
  if (margin > tol) return Label::Inside;
  if (margin < -tol) return Label::Outside;
  return Label::BoundaryAmbiguous;
}

/// Depth of an interior point of a closed body whose interior contains 0.
double gauge_depth(const ConvexBody& body, const Vec& x, double tol) {
  const double g = detail::gauge_bracket(body, x, false, 1.0, tol).upper;
  const double r = body.node().radii ? body.node().radii->inner : 0.0;
  return (1.0 - g) * r / std::sqrt(static_cast<double>(body.dim()));
}

double exact_gauge_depth(const ConvexBody& body, const RVec& x) {
  auto g = detail::gauge_exact(body, x, false);
  if (!g) return 0.0;
  const double r = body.node().radii ? body.node().radii->inner : 0.0;
  return to_double(Rational(1 - *g)) * r / std::sqrt(static_cast<double>(body.dim()));
}

double float_margin(const ConvexBody& body, const Vec& x, double tol) {
  const BodyNode& node = body.node();
  return std::visit(
      [&](const auto& d) -> double {
        using D = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<D, BoxData>) {
          return (d.halfwidths_d - x.cwiseAbs()).minCoeff();
        } else if constexpr (std::is_same_v<D, BallData>) {
          return d.radius_d - x.norm();
        } else if constexpr (std::is_same_v<D, HPolytopeData>) {
          double m = kInf;
          for (Eigen::Index r = 0; r < d.a_d.rows(); ++r) {
            m = std::min(m, (d.b_d(r) - d.a_d.row(r).dot(x)) / d.a_d.row(r).cwiseAbs().sum());
          }
          return m;
        } else if constexpr (std::is_same_v<D, RotatedData>) {
          if (std::holds_alternative<BallData>(d.base.node().data)) return float_margin(d.base, x, tol);
          return float_margin(d.base, d.rotation.matrix().transpose() * x, tol);
        } else if constexpr (std::is_same_v<D, ScaledData>) {
          return d.factor_d * float_margin(d.base, x / d.factor_d, tol);
        } else {
          // VPolytope, CubeSum, Combination: distance-based.
          bool dropped = false;
          const bool open = node.open;
          const double dist = linf_without_cube(body, x, dropped, open ? std::optional<double>(1.0) : 0.0, tol);
          if (dropped) return 1.0 - dist;
          if (dist > tol) return -dist;
          if (node.origin_interior) return std::max(gauge_depth(body, x, tol), -dist);
          return -dist;
        }
      },
      node.data);
}

std::optional<Classification> exact_classify(const ConvexBody& body, const RVec& x) {
  const BodyNode& node = body.node();
  if (!node.exact_membership) return std::nullopt;
  if (const auto* d = std::get_if<BoxData>(&node.data)) {
    bool inside = true;
    double margin = kInf;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const Rational slack = d->halfwidths[i] - rabs(x[i]);
      inside = inside && slack >= 0;
      margin = std::min(margin, to_double(slack));
    }
    return Classification{inside ? Label::Inside : Label::Outside, margin, true};
  }
  if (const auto* d = std::get_if<BallData>(&node.data)) {
    Rational s(0);
    for (const auto& v : x) s += v * v;
    const double margin = d->radius_d - std::sqrt(to_double(s));
    return Classification{s <= d->radius * d->radius ? Label::Inside : Label::Outside, margin, true};
  }
  if (const auto* d = std::get_if<HPolytopeData>(&node.data)) {
    bool inside = true;
    double margin = kInf;
    for (std::size_t r = 0; r < d->a.size(); ++r) {
      Rational slack = d->b[r];
      for (std::size_t i = 0; i < x.size(); ++i) slack -= d->a[r][i] * x[i];
      inside = inside && slack >= 0;
      margin = std::min(margin, to_double(slack) / d->a_d.row(static_cast<Eigen::Index>(r)).cwiseAbs().sum());
    }
    return Classification{inside ? Label::Inside : Label::Outside, margin, true};
  }
  if (const auto* d = std::get_if<RotatedData>(&node.data)) {
    if (as<BallData>(d->base)) return exact_classify(d->base, x);
    return exact_classify(d->base, unpermute(d->rotation, x));
  }
  if (const auto* d = std::get_if<ScaledData>(&node.data)) {
    RVec y = x;
    for (auto& v : y) v /= d->factor;
    auto c = exact_classify(d->base, y);
    if (c) c->margin *= d->factor_d;
    return c;
  }
  if (const auto* d = std::get_if<CubeSumData>(&node.data)) {
    if (const auto* ball = as<BallData>(d->base)) {
      // dist_inf(x, rB) < 1 iff the Euclidean distance from 0 to the cube
      // [x - 1, x + 1] is below r.
      Rational s(0);
      for (const auto& v : x) {
        const Rational e = rabs(v) - 1;
        if (e > 0) s += e * e;
      }
      const double margin = 1.0 - ball_linf_distance(to_vec(x), ball->radius_d);
      return Classification{s < ball->radius * ball->radius ? Label::Inside : Label::Outside, margin, true};
    }
    auto dist = exact_distance(d->base, x);
    if (!dist) return std::nullopt;
    return Classification{*dist < 1 ? Label::Inside : Label::Outside, 1.0 - to_double(*dist), true};
  }
  // VPolytope and Combination through the exact LP.
  const auto* comb = std::get_if<CombinationData>(&node.data);
  const Rational dist = detail::distance_exact(body, x, true);
  if (comb && comb->plus_cube) {
    return Classification{dist < 1 ? Label::Inside : Label::Outside, 1.0 - to_double(dist), true};
  }
  if (dist > 0) return Classification{Label::Outside, -to_double(dist), true};
  const double depth = node.origin_interior ? exact_gauge_depth(body, x) : 0.0;
  return Classification{Label::Inside, depth, true};
}

// ---------------------------------------------------------------- support

double hpolytope_support(const HPolytopeData& d, const Vec& theta) {
  lp::LinearProgram<double> program;
  const auto n = theta.size();
  std::vector<int> ys;
  for (Eigen::Index i = 0; i < n; ++i) {
    ys.push_back(program.add_variable(false));
    program.set_objective(ys.back(), -theta(i));
  }
  for (Eigen::Index r = 0; r < d.a_d.rows(); ++r) {
    std::vector<lp::Term<double>> row;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (d.a_d(r, i) != 0.0) row.push_back({ys[static_cast<std::size_t>(i)], d.a_d(r, i)});
    }
    program.add_row(std::move(row), lp::Sense::LessEqual, d.b_d(r));
  }
  auto sol = lp::solve(program);
  if (sol.status == lp::Status::Unbounded) throw Error(ErrorKind::UnboundedBody, "support of an unbounded polyhedron");
  if (sol.status == lp::Status::Infeasible) throw Error(ErrorKind::LpInfeasible, "empty polyhedron");
  return -sol.objective;
}

double support_impl(const ConvexBody& body, const Vec& theta) {
  return std::visit(
      [&](const auto& d) -> double {
        using D = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<D, BoxData>) {
          return d.halfwidths_d.dot(theta.cwiseAbs());
        } else if constexpr (std::is_same_v<D, BallData>) {
          return d.radius_d * theta.norm();
        } else if constexpr (std::is_same_v<D, HPolytopeData>) {
          return hpolytope_support(d, theta);
        } else if constexpr (std::is_same_v<D, VPolytopeData>) {
          return (d.vertices_d.transpose() * theta).maxCoeff();
        } else if constexpr (std::is_same_v<D, RotatedData>) {
          return support_impl(d.base, d.rotation.matrix().transpose() * theta);
        } else if constexpr (std::is_same_v<D, ScaledData>) {
          return d.factor_d * support_impl(d.base, theta);
        } else if constexpr (std::is_same_v<D, CubeSumData>) {
          return support_impl(d.base, theta) + theta.cwiseAbs().sum();
        } else {
          const double mu = to_double(d.mu);
          double h = (1.0 - mu) * support_impl(d.first, theta) + mu * support_impl(d.second, theta);
          if (d.plus_cube) h += theta.cwiseAbs().sum();
          return h;
        }
      },
      body.node().data);
}

}  // namespace

// ---------------------------------------------------------------- Rotation

Rotation Rotation::identity(int n) {
  Rotation r(Mat::Identity(n, n), RotationKind::Identity);
  for (int i = 0; i < n; ++i) {
    r.perm_.push_back(i);
    r.signs_.push_back(1);
  }
  return r;
}

Rotation Rotation::signed_permutation(std::vector<int> perm, std::vector<int> signs) {
  const auto n = static_cast<int>(perm.size());
  if (signs.size() != perm.size()) throw Error(ErrorKind::InvalidArgument, "perm/sign length mismatch");
  std::vector<bool> seen(perm.size(), false);
  Mat m = Mat::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    const int p = perm[static_cast<std::size_t>(j)];
    const int s = signs[static_cast<std::size_t>(j)];
    if (p < 0 || p >= n || seen[static_cast<std::size_t>(p)]) throw Error(ErrorKind::InvalidArgument, "not a permutation");
    if (s != 1 && s != -1) throw Error(ErrorKind::InvalidArgument, "signs must be +-1");
    seen[static_cast<std::size_t>(p)] = true;
    m(p, j) = s;
  }
  Rotation r(std::move(m), RotationKind::SignedPermutation);
  r.perm_ = std::move(perm);
  r.signs_ = std::move(signs);
  return r;
}

Rotation Rotation::haar(Mat matrix, std::uint64_t seed, std::uint64_t stream) {
  Rotation r(std::move(matrix), RotationKind::Haar);
  r.seed_ = seed;
  r.stream_ = stream;
  return r;
}

Rotation Rotation::user(Mat matrix) {
  if (matrix.rows() != matrix.cols()) throw Error(ErrorKind::InvalidArgument, "rotation must be square");
  Rotation r(std::move(matrix), RotationKind::User);
  if (r.orthogonality_defect() > 1e-10) throw Error(ErrorKind::InvalidArgument, "matrix is not orthogonal");
  return r;
}

double Rotation::orthogonality_defect() const {
  const auto n = matrix_.rows();
  return (matrix_.transpose() * matrix_ - Mat::Identity(n, n)).cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------- factories

ConvexBody ConvexBody::finish(BodyNode node) {
  std::visit(
      [&](const auto& d) {
        using D = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<D, BoxData> || std::is_same_v<D, BallData>) {
          node.contains_origin = node.origin_interior = true;
          node.exact_membership = true;
          node.lp_exact = std::is_same_v<D, BoxData>;
          node.exact_distance = std::is_same_v<D, BoxData>;
        } else if constexpr (std::is_same_v<D, HPolytopeData>) {
          node.contains_origin = std::all_of(d.b.begin(), d.b.end(), [](const Rational& v) { return v >= 0; });
          node.origin_interior = std::all_of(d.b.begin(), d.b.end(), [](const Rational& v) { return v > 0; });
          node.exact_membership = node.lp_exact = node.exact_distance = true;
        } else if constexpr (std::is_same_v<D, VPolytopeData>) {
          node.exact_membership = node.lp_exact = node.exact_distance = true;
        } else if constexpr (std::is_same_v<D, RotatedData>) {
          const BodyNode& b = d.base.node();
          node.contains_origin = b.contains_origin;
          node.origin_interior = b.origin_interior;
          node.open = b.open;
          const bool ball = std::holds_alternative<BallData>(b.data);
          const bool lattice = d.rotation.lattice_preserving();
          node.exact_membership = ball ? b.exact_membership : (lattice && b.exact_membership);
          node.lp_exact = lattice && b.lp_exact;
          node.exact_distance = ball ? false : (lattice && b.exact_distance);
        } else if constexpr (std::is_same_v<D, ScaledData>) {
          const BodyNode& b = d.base.node();
          node.contains_origin = b.contains_origin;
          node.origin_interior = b.origin_interior;
          node.open = b.open;
          node.exact_membership = b.exact_membership;
          node.lp_exact = b.lp_exact;
          node.exact_distance = b.exact_distance;
        } else if constexpr (std::is_same_v<D, CubeSumData>) {
          const BodyNode& b = d.base.node();
          node.open = true;
          node.exact_membership = std::holds_alternative<BallData>(b.data) || b.exact_distance;
          node.lp_exact = b.lp_exact;
          node.exact_distance = b.exact_distance;
        } else {
          node.open = d.plus_cube;
          node.lp_exact = d.first.node().lp_exact && d.second.node().lp_exact;
          node.exact_membership = node.exact_distance = node.lp_exact;
        }
      },
      node.data);

  auto shared = std::make_shared<BodyNode>(std::move(node));
  ConvexBody body(shared);
  // Origin flags that need the membership machinery of the body itself.
  const Vec zero = Vec::Zero(shared->n);
  const RVec rzero(static_cast<std::size_t>(shared->n), Rational(0));
  if (const auto* d = std::get_if<VPolytopeData>(&shared->data)) {
    shared->contains_origin = detail::distance_exact(body, rzero, false) == 0;
    if (shared->contains_origin) {
      bool interior = true;
      for (int i = 0; i < shared->n && interior; ++i) {
        for (int s : {1, -1}) {
          RVec e = rzero;
          e[static_cast<std::size_t>(i)] = s;
          if (!detail::gauge_exact(body, e, false)) interior = false;
        }
      }
      shared->origin_interior = interior;
    }
    (void)d;
  } else if (const auto* d = std::get_if<CubeSumData>(&shared->data)) {
    const auto& b = d->base.node();
    shared->contains_origin = b.contains_origin || linf_distance(d->base, zero) < 1.0;
    shared->origin_interior = shared->contains_origin;
  } else if (const auto* d = std::get_if<CombinationData>(&shared->data)) {
    const auto& k = d->first.node();
    const auto& l = d->second.node();
    const bool has_mu = d->mu > 0;
    const bool has_rest = d->mu < 1;
    if (k.contains_origin && l.contains_origin) {
      shared->contains_origin = true;
    } else {
      bool dropped = false;
      const double dist = linf_without_cube(body, zero, dropped, std::nullopt, kDefaultTolerance);
      shared->contains_origin = d->plus_cube ? dist < 1.0 : dist <= kDefaultTolerance;
    }
    if (d->plus_cube) {
      shared->origin_interior = shared->contains_origin;
    } else {
      shared->origin_interior = (has_rest && k.origin_interior && l.contains_origin) ||
                                (has_mu && l.origin_interior && k.contains_origin);
    }
  }
  shared->radii = compute_radii(*shared);
  return body;
}

ConvexBody ConvexBody::box(RVec halfwidths) {
  if (halfwidths.empty()) throw Error(ErrorKind::InvalidArgument, "box needs n >= 1");
  for (const auto& h : halfwidths) {
    if (h <= 0) throw Error(ErrorKind::InvalidArgument, "box halfwidths must be positive");
  }
  BoxData d;
  d.halfwidths_d = to_vec(halfwidths);
  d.halfwidths = std::move(halfwidths);
  const int n = static_cast<int>(d.halfwidths.size());
  return finish(BodyNode{n, false, false, false, false, false, false, std::nullopt, std::move(d)});
}

ConvexBody ConvexBody::box(int n, const Rational& halfwidth) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "box needs n >= 1");
  return box(RVec(static_cast<std::size_t>(n), halfwidth));
}

ConvexBody ConvexBody::ball(int n, const Rational& radius) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "ball needs n >= 1");
  if (radius <= 0) throw Error(ErrorKind::InvalidArgument, "ball radius must be positive");
  return finish(BodyNode{n, false, false, false, false, false, false, std::nullopt, BallData{radius, to_double(radius)}});
}

ConvexBody ConvexBody::hpolytope(std::vector<RVec> a, RVec b) {
  if (a.empty() || a.size() != b.size()) throw Error(ErrorKind::InvalidArgument, "hpolytope needs matching A and b");
  const auto n = a.front().size();
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "hpolytope needs n >= 1");
  HPolytopeData d;
  d.a_d = Mat(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < a.size(); ++r) {
    if (a[r].size() != n) throw Error(ErrorKind::InvalidArgument, "ragged constraint matrix");
    if (std::all_of(a[r].begin(), a[r].end(), [](const Rational& v) { return v == 0; })) {
      throw Error(ErrorKind::InvalidArgument, "zero constraint row");
    }
    for (std::size_t i = 0; i < n; ++i) d.a_d(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i)) = to_double(a[r][i]);
  }
  d.b_d = to_vec(b);
  d.a = std::move(a);
  d.b = std::move(b);
  return finish(BodyNode{static_cast<int>(n), false, false, false, false, false, false, std::nullopt, std::move(d)});
}

ConvexBody ConvexBody::vpolytope(std::vector<RVec> vertices) {
  if (vertices.empty()) throw Error(ErrorKind::InvalidArgument, "vpolytope needs a vertex");
  const auto n = vertices.front().size();
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "vpolytope needs n >= 1");
  VPolytopeData d;
  d.vertices_d = Mat(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(vertices.size()));
  for (std::size_t j = 0; j < vertices.size(); ++j) {
    if (vertices[j].size() != n) throw Error(ErrorKind::InvalidArgument, "ragged vertex list");
    d.vertices_d.col(static_cast<Eigen::Index>(j)) = to_vec(vertices[j]);
  }
  d.vertices = std::move(vertices);
  return finish(BodyNode{static_cast<int>(n), false, false, false, false, false, false, std::nullopt, std::move(d)});
}

ConvexBody ConvexBody::origin(int n) {
  return vpolytope({RVec(static_cast<std::size_t>(n), Rational(0))});
}

ConvexBody ConvexBody::rotated(Rotation rotation, ConvexBody base) {
  if (rotation.dim() != base.dim()) throw Error(ErrorKind::InvalidArgument, "rotation dimension mismatch");
  if (as<BallData>(base)) return base;
  const int n = base.dim();
  return finish(BodyNode{n, false, false, false, false, false, false, std::nullopt,
                         RotatedData{std::move(rotation), std::move(base)}});
}

ConvexBody ConvexBody::scaled(const Rational& factor, ConvexBody base) {
  if (factor <= 0) throw Error(ErrorKind::InvalidArgument, "scale factor must be positive");
  const int n = base.dim();
  // Push the dilation into atoms so their closed forms stay available.
  if (const auto* d = as<BallData>(base)) return ball(n, d->radius * factor);
  if (const auto* d = as<BoxData>(base)) {
    RVec h = d->halfwidths;
    for (auto& v : h) v *= factor;
    return box(std::move(h));
  }
  if (const auto* d = as<HPolytopeData>(base)) {
    RVec b = d->b;
    for (auto& v : b) v *= factor;
    return hpolytope(d->a, std::move(b));
  }
  if (const auto* d = as<VPolytopeData>(base)) {
    auto v = d->vertices;
    for (auto& p : v) {
      for (auto& c : p) c *= factor;
    }
    return vpolytope(std::move(v));
  }
  if (const auto* d = as<ScaledData>(base)) return scaled(factor * d->factor, d->base);
  if (const auto* d = as<RotatedData>(base)) return rotated(d->rotation, scaled(factor, d->base));
  return finish(BodyNode{n, false, false, false, false, false, false, std::nullopt,
                         ScaledData{factor, to_double(factor), std::move(base)}});
}

ConvexBody ConvexBody::cube_sum(ConvexBody base) {
  const int n = base.dim();
  if (base.is_open()) throw Error(ErrorKind::InvalidArgument, "cube sum of an open body");
  return finish(BodyNode{n, false, false, false, false, false, false, std::nullopt, CubeSumData{std::move(base)}});
}

ConvexBody ConvexBody::combination(const Rational& mu, ConvexBody k, ConvexBody l, bool plus_cube) {
  if (mu < 0 || mu > 1) throw Error(ErrorKind::InvalidArgument, "mu must lie in [0, 1]");
  if (k.dim() != l.dim()) throw Error(ErrorKind::InvalidArgument, "combination dimension mismatch");
  if (k.is_open() || l.is_open()) throw Error(ErrorKind::InvalidArgument, "combination of open bodies");
  const int n = k.dim();
  return finish(BodyNode{n, false, false, false, false, false, false, std::nullopt,
                         CombinationData{mu, std::move(k), std::move(l), plus_cube}});
}

int ConvexBody::dim() const { return node_->n; }
bool ConvexBody::contains_origin() const { return node_->contains_origin; }
bool ConvexBody::origin_interior() const { return node_->origin_interior; }
bool ConvexBody::is_open() const { return node_->open; }
bool ConvexBody::exact_membership() const { return node_->exact_membership; }

std::string ConvexBody::variant_name() const {
  static constexpr const char* kNames[] = {"hpolytope", "vpolytope", "ball",    "box",
                                           "rotated",   "scaled",    "cubesum", "combination"};
  return kNames[node_->data.index()];
}

// ---------------------------------------------------------------- queries

std::string to_string(Label label) {
  switch (label) {
    case Label::Inside:
      return "inside";
    case Label::Outside:
      return "outside";
    case Label::BoundaryAmbiguous:
      return "boundary-ambiguous";
  }
  return "unknown";
}

double support(const ConvexBody& body, const Vec& theta) {
  require_dim(body, theta.size());
  if (theta.cwiseAbs().maxCoeff() == 0.0) throw Error(ErrorKind::ZeroDirection, "support direction is zero");
  return support_impl(body, theta);
}

Classification classify(const ConvexBody& body, const Vec& x, double tol) {
  require_dim(body, x.size());
  if (tol <= 0) throw Error(ErrorKind::InvalidArgument, "tolerance must be positive");
  const double margin = float_margin(body, x, tol);
  return {label_for(margin, tol), margin, false};
}

Classification classify(const ConvexBody& body, const IntPoint& x, double tol) {
  require_dim(body, static_cast<Eigen::Index>(x.size()));
  if (auto c = exact_classify(body, to_rvec(x))) return *c;
  Vec v(static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) v(static_cast<Eigen::Index>(i)) = static_cast<double>(x[i]);
  return classify(body, v, tol);
}

double linf_distance(const ConvexBody& body, const Vec& x) {
  require_dim(body, x.size());
  if (auto c = linf_closed(body, x)) return *c;
  bool dropped = false;
  const double dist = linf_without_cube(body, x, dropped, std::nullopt, kDefaultTolerance);
  return dropped ? std::max(0.0, dist - 1.0) : dist;
}

Rational linf_distance_exact(const ConvexBody& body, const IntPoint& x) {
  require_dim(body, static_cast<Eigen::Index>(x.size()));
  auto d = exact_distance(body, to_rvec(x));
  if (!d) throw Error(ErrorKind::Unsupported, "no exact l_inf distance for a " + body.variant_name());
  return *d;
}

Radii radii(const ConvexBody& body) {
  if (!body.node().radii) throw Error(ErrorKind::OriginOutside, "radii need 0 in K");
  return *body.node().radii;
}

double unit_ball_volume(int n) {
  return std::pow(std::numbers::pi, n / 2.0) / std::tgamma(n / 2.0 + 1.0);
}

double volume(const ConvexBody& body) {
  return std::visit(
      [&](const auto& d) -> double {
        using D = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<D, BoxData>) {
          return (2.0 * d.halfwidths_d).prod();
        } else if constexpr (std::is_same_v<D, BallData>) {
          return unit_ball_volume(body.dim()) * std::pow(d.radius_d, body.dim());
        } else if constexpr (std::is_same_v<D, RotatedData>) {
          return volume(d.base);
        } else if constexpr (std::is_same_v<D, ScaledData>) {
          return std::pow(d.factor_d, body.dim()) * volume(d.base);
        } else {
          throw Error(ErrorKind::Unsupported, "volume of a " + body.variant_name());
        }
      },
      body.node().data);
}

double parallel_volume(const ConvexBody& body, double eps) {
  const int n = body.dim();
  return std::visit(
      [&](const auto& d) -> double {
        using D = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<D, BoxData>) {
          // Steiner: sum over coordinate subsets S of prod_{i not in S} 2a_i * kappa_|S| eps^|S|.
          double total = 0.0;
          for (unsigned mask = 0; mask < (1u << n); ++mask) {
            double term = 1.0;
            int k = 0;
            for (int i = 0; i < n; ++i) {
              if (mask & (1u << i)) {
                ++k;
              } else {
                term *= 2.0 * d.halfwidths_d(i);
              }
            }
            total += term * unit_ball_volume(k) * std::pow(eps, k);
          }
          return total;
        } else if constexpr (std::is_same_v<D, BallData>) {
          return unit_ball_volume(n) * std::pow(d.radius_d + eps, n);
        } else if constexpr (std::is_same_v<D, RotatedData>) {
          return parallel_volume(d.base, eps);
        } else if constexpr (std::is_same_v<D, ScaledData>) {
          return std::pow(d.factor_d, n) * parallel_volume(d.base, eps / d.factor_d);
        } else {
          throw Error(ErrorKind::Unsupported, "parallel volume of a " + body.variant_name());
        }
      },
      body.node().data);
}

namespace {

std::string join(const RVec& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + to_string(v[i]);
  return out;
}

}  // namespace

std::string describe(const ConvexBody& body) {
  return std::visit(
      [&](const auto& d) -> std::string {
        using D = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<D, BoxData>) {
          return "box[" + join(d.halfwidths) + "]";
        } else if constexpr (std::is_same_v<D, BallData>) {
          return fmt::format("ball[{};{}]", body.dim(), to_string(d.radius));
        } else if constexpr (std::is_same_v<D, HPolytopeData>) {
          std::string rows;
          for (std::size_t r = 0; r < d.a.size(); ++r) rows += (r ? ";" : "") + join(d.a[r]) + "<=" + to_string(d.b[r]);
          return "hpolytope[" + rows + "]";
        } else if constexpr (std::is_same_v<D, VPolytopeData>) {
          std::string pts;
          for (std::size_t j = 0; j < d.vertices.size(); ++j) pts += (j ? ";" : "") + join(d.vertices[j]);
          return "vpolytope[" + pts + "]";
        } else if constexpr (std::is_same_v<D, RotatedData>) {
          const Rotation& u = d.rotation;
          std::string tag;
          switch (u.kind()) {
            case RotationKind::Identity:
              tag = "identity";
              break;
            case RotationKind::SignedPermutation:
              for (std::size_t j = 0; j < u.permutation().size(); ++j) {
                tag += fmt::format("{}{}{}", j ? "," : "", u.signs()[j] < 0 ? "-" : "+", u.permutation()[j]);
              }
              tag = "perm:" + tag;
              break;
            case RotationKind::Haar:
            case RotationKind::User:
              tag = u.kind() == RotationKind::Haar ? fmt::format("haar:{}:{}:", u.seed(), u.stream()) : "user:";
              for (Eigen::Index i = 0; i < u.matrix().size(); ++i) {
                tag += fmt::format("{}{:.17g}", i ? "," : "", u.matrix().data()[i]);
              }
              break;
          }
          return "rotated(" + tag + "|" + describe(d.base) + ")";
        } else if constexpr (std::is_same_v<D, ScaledData>) {
          return "scaled(" + to_string(d.factor) + "|" + describe(d.base) + ")";
        } else if constexpr (std::is_same_v<D, CubeSumData>) {
          return "cubesum(" + describe(d.base) + ")";
        } else {
          return fmt::format("combination({}|{}|{}|{})", to_string(d.mu), describe(d.first), describe(d.second),
                             d.plus_cube ? "cube" : "closed");
        }
      },
      body.node().data);
}

std::uint64_t fingerprint(const ConvexBody& body) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : describe(body)) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

ConvexBody counterexample_body(const Rational& lambda, int n) {
  if (lambda <= 0) throw Error(ErrorKind::InvalidArgument, "lambda must be positive");
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "counterexample needs n >= 2");
  std::vector<RVec> vertices;
  const int corners = 1 << (n - 1);
  for (int mask = 0; mask < corners; ++mask) {
    RVec v(static_cast<std::size_t>(n));
    for (int i = 0; i < n - 1; ++i) v[static_cast<std::size_t>(i)] = (mask >> i) & 1 ? Rational(lambda) : Rational(-lambda);
    v[static_cast<std::size_t>(n - 1)] = Rational(-1, 2);
    vertices.push_back(std::move(v));
  }
  RVec apex(static_cast<std::size_t>(n), Rational(0));
  apex[static_cast<std::size_t>(n - 1)] = 1;
  vertices.push_back(std::move(apex));
  return ConvexBody::vpolytope(std::move(vertices));
}

}  // namespace latticeborell
