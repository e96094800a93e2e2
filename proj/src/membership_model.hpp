#pragma once

// LP encodings of "y lies in (a scaled copy of) K" for every body variant.
// The scale variable g multiplies every constant, so the same encoding serves
// the l_inf-distance problem (g fixed to 1) and the gauge problem
// (minimize g with y = x). Euclidean balls are handled by outer cutting
// planes, which only exist in the double instantiation.

#include <cmath>
#include <optional>
#include <vector>

#include "latticeborell/body.hpp"
#include "latticeborell/error.hpp"
#include "latticeborell/lp.hpp"

namespace latticeborell::detail {

template <class T>
T from_rational(const Rational& value) {
  if constexpr (std::is_same_v<T, double>) {
    return to_double(value);
  } else {
    return value;
  }
}

template <class T>
using Expr = std::vector<lp::Term<T>>;

template <class T>
Expr<T> scaled_expr(const Expr<T>& e, const T& factor) {
  Expr<T> out;
  out.reserve(e.size());
  for (const auto& t : e) out.push_back({t.var, t.coeff * factor});
  return out;
}

template <class T>
void append_expr(Expr<T>& into, const Expr<T>& e, const T& factor) {
  for (const auto& t : e) into.push_back({t.var, t.coeff * factor});
}

template <class T>
T evaluate(const Expr<T>& e, const std::vector<T>& values) {
  T sum{0};
  for (const auto& t : e) sum += t.coeff * values[static_cast<std::size_t>(t.var)];
  return sum;
}

enum class ModelMode { Distance, Gauge };

template <class T>
class MembershipModel {
 public:
  struct BallVars {
    std::vector<int> vars;
    double radius;
  };

  explicit MembershipModel(ModelMode mode) : mode_(mode) {
    scale_ = program_.add_variable(true);
    if (mode_ == ModelMode::Distance) program_.add_row({{scale_, T(1)}}, lp::Sense::Equal, T(1));
  }

  int scale_var() const { return scale_; }
  lp::LinearProgram<T>& program() { return program_; }
  std::vector<BallVars>& balls() { return balls_; }

  /// Coordinates of a generic point of the body, as expressions in LP
  /// variables. With `drop_cube` the top-level +C_n of an open variant is
  /// omitted.
  std::vector<Expr<T>> embed(const ConvexBody& body, bool drop_cube = false) {
    const BodyNode& node = body.node();
    const int n = node.n;
    return std::visit(
        [&](const auto& d) -> std::vector<Expr<T>> {
          using D = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<D, BoxData>) {
            std::vector<Expr<T>> out;
            for (int i = 0; i < n; ++i) {
              const int y = program_.add_variable(false);
              const T h = from_rational<T>(d.halfwidths[static_cast<std::size_t>(i)]);
              program_.add_row({{y, T(1)}, {scale_, T(-h)}}, lp::Sense::LessEqual, T(0));
              program_.add_row({{y, T(-1)}, {scale_, T(-h)}}, lp::Sense::LessEqual, T(0));
              out.push_back({{y, T(1)}});
            }
            return out;
          } else if constexpr (std::is_same_v<D, HPolytopeData>) {
            std::vector<int> ys;
            for (int i = 0; i < n; ++i) ys.push_back(program_.add_variable(false));
            for (std::size_t r = 0; r < d.a.size(); ++r) {
              Expr<T> row;
              for (int i = 0; i < n; ++i) {
                const auto& c = d.a[r][static_cast<std::size_t>(i)];
                if (c != 0) row.push_back({ys[static_cast<std::size_t>(i)], from_rational<T>(c)});
              }
              row.push_back({scale_, T(-from_rational<T>(d.b[r]))});
              program_.add_row(std::move(row), lp::Sense::LessEqual, T(0));
            }
            std::vector<Expr<T>> out;
            for (int y : ys) out.push_back({{y, T(1)}});
            return out;
          } else if constexpr (std::is_same_v<D, VPolytopeData>) {
            std::vector<int> alphas;
            Expr<T> convexity;
            for (std::size_t j = 0; j < d.vertices.size(); ++j) {
              alphas.push_back(program_.add_variable(true));
              convexity.push_back({alphas.back(), T(1)});
            }
            convexity.push_back({scale_, T(-1)});
            // In gauge mode the origin lies in K, so conv(V u {0}) = K and the
            // inequality keeps every constraint monotone in g.
            program_.add_row(std::move(convexity), mode_ == ModelMode::Gauge ? lp::Sense::LessEqual : lp::Sense::Equal,
                             T(0));
            std::vector<Expr<T>> out(static_cast<std::size_t>(n));
            for (std::size_t j = 0; j < d.vertices.size(); ++j) {
              for (int i = 0; i < n; ++i) {
                const auto& c = d.vertices[j][static_cast<std::size_t>(i)];
                if (c != 0) out[static_cast<std::size_t>(i)].push_back({alphas[j], from_rational<T>(c)});
              }
            }
            return out;
          } else if constexpr (std::is_same_v<D, BallData>) {
            if constexpr (!std::is_same_v<T, double>) {
              throw Error(ErrorKind::Unsupported, "Euclidean ball in an exact LP model");
            } else {
              BallVars ball{{}, d.radius_d};
              std::vector<Expr<T>> out;
              for (int i = 0; i < n; ++i) {
                const int y = program_.add_variable(false);
                ball.vars.push_back(y);
                program_.add_row({{y, 1.0}, {scale_, -d.radius_d}}, lp::Sense::LessEqual, 0.0);
                program_.add_row({{y, -1.0}, {scale_, -d.radius_d}}, lp::Sense::LessEqual, 0.0);
                out.push_back({{y, 1.0}});
              }
              balls_.push_back(std::move(ball));
              return out;
            }
          } else if constexpr (std::is_same_v<D, RotatedData>) {
            if (std::holds_alternative<BallData>(d.base.node().data)) return embed(d.base);
            auto inner = embed(d.base);
            std::vector<Expr<T>> out(static_cast<std::size_t>(n));
            const Rotation& u = d.rotation;
            if (u.lattice_preserving()) {
              const auto& perm = u.permutation();
              const auto& signs = u.signs();
              for (int j = 0; j < n; ++j) {
                out[static_cast<std::size_t>(perm[static_cast<std::size_t>(j)])] =
                    scaled_expr(inner[static_cast<std::size_t>(j)], T(signs[static_cast<std::size_t>(j)]));
              }
            } else {
              if constexpr (!std::is_same_v<T, double>) {
                throw Error(ErrorKind::Unsupported, "irrational rotation in an exact LP model");
              } else {
                for (int i = 0; i < n; ++i) {
                  for (int j = 0; j < n; ++j) {
                    const double c = u.matrix()(i, j);
                    if (c != 0.0) append_expr(out[static_cast<std::size_t>(i)], inner[static_cast<std::size_t>(j)], c);
                  }
                }
              }
            }
            return out;
          } else if constexpr (std::is_same_v<D, ScaledData>) {
            auto inner = embed(d.base);
            const T f = from_rational<T>(d.factor);
            for (auto& e : inner) e = scaled_expr(e, f);
            return inner;
          } else if constexpr (std::is_same_v<D, CubeSumData>) {
            auto inner = embed(d.base);
            if (!drop_cube) add_cube(inner);
            return inner;
          } else if constexpr (std::is_same_v<D, CombinationData>) {
            auto first = embed(d.first);
            auto second = embed(d.second);
            const T mu = from_rational<T>(d.mu);
            const T one_minus = T(1) - mu;
            std::vector<Expr<T>> out(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i) {
              append_expr(out[static_cast<std::size_t>(i)], first[static_cast<std::size_t>(i)], one_minus);
              append_expr(out[static_cast<std::size_t>(i)], second[static_cast<std::size_t>(i)], mu);
            }
            if (d.plus_cube && !drop_cube) add_cube(out);
            return out;
          }
        },
        node.data);
  }

 private:
  void add_cube(std::vector<Expr<T>>& coords) {
    // Closure of C_n; openness is decided by the caller from the optimum.
    for (auto& e : coords) {
      const int w = program_.add_variable(false);
      program_.add_row({{w, T(1)}, {scale_, T(-1)}}, lp::Sense::LessEqual, T(0));
      program_.add_row({{w, T(-1)}, {scale_, T(-1)}}, lp::Sense::LessEqual, T(0));
      e.push_back({w, T(1)});
    }
  }

  ModelMode mode_;
  lp::LinearProgram<T> program_;
  int scale_;
  std::vector<BallVars> balls_;
};

struct Bracket {
  double lower;
  double upper;
};

/// l_inf distance from x to K (closure; top-level cube dropped when
/// `drop_cube`), bracketed. Iterates ball cuts until the bracket is narrower
/// than `width` or, when given, clears `decide_at` by more than `tol`.
Bracket distance_bracket(const ConvexBody& body, const Vec& x, bool drop_cube, std::optional<double> decide_at,
                         double tol);
/// Gauge ||x||_K = min{g : x in gK}; requires 0 in K.
Bracket gauge_bracket(const ConvexBody& body, const Vec& x, bool drop_cube, std::optional<double> decide_at,
                      double tol);

Rational distance_exact(const ConvexBody& body, const RVec& x, bool drop_cube);
/// nullopt when x is outside the cone spanned by K.
std::optional<Rational> gauge_exact(const ConvexBody& body, const RVec& x, bool drop_cube);

}  // namespace latticeborell::detail
