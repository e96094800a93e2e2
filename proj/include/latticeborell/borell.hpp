#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "latticeborell/body.hpp"
#include "latticeborell/lattice.hpp"

namespace latticeborell {

/// Reference constant for the upper moment comparison.
inline constexpr double kCRef = 16.0;
/// Reference constant for the mean-width upper bound, 3e.
inline constexpr double kCRefUpper = 3.0 * 2.718281828459045;
/// (1 - e^{-1/4}) / 2.
inline constexpr double kCRefLower = 0.11059960846429756;
inline constexpr double kFloatRelTol = 1e-9;

struct InequalityReport {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  /// Smallest constant making the inequality hold on this instance.
  double implied_constant = 0.0;
  bool pass = false;
  /// Decided in Rational arithmetic.
  bool exact = false;
  nlohmann::json context = nlohmann::json::object();
};

nlohmann::json to_json(const InequalityReport& report);

/// Lattice data behind C_0(K, p): the projections of K and of K + C_n.
struct C0Data {
  ProjectionDistribution x;
  ProjectionDistribution y;
  std::int64_t g_k = 0;
  std::int64_t g_fat = 0;
  std::int64_t ambiguous = 0;
};

/// Enumerates K and K + C_n. Throws EmptyLattice or HypothesisViolated
/// (max |x_n| over the lattice points < 1).
C0Data c0_data(const ConvexBody& body, const EnumerateOptions& options = {});

double c0(const C0Data& data, double p);
double c0(const ConvexBody& body, double p);
/// (G(K) + sum |y_n|) / sum |x_n|.
Rational c0_exact_p1(const C0Data& data);
HighFloat c0_precise(const C0Data& data, const HighFloat& p);

/// G((1+t)K) - G(K) by enumeration; (1+t) is taken as the exact value of its double.
std::int64_t shell_count(const ConvexBody& body, double t);
/// ((1 + t + sqrt(n)/(2r))^n - (1 - sqrt(n) R/(2r^2))^n) |K|. Needs |K|.
double shell_count_formula(const ConvexBody& body, double t);

struct C0UpperBound {
  double bound;
  /// shell_count_formula at t = sqrt(n)/r.
  double shell_count_bound;
  double inner;
  double outer;
};

/// Explicit upper bound for C_0(K, p). Requires 0 in int K, a lattice point
/// with |x_n| >= 1 and sqrt(n) R <= 2 r^2; otherwise HypothesisViolated.
C0UpperBound c0_upper_bound(const ConvexBody& body, double p);

struct BorellConstants {
  double c0 = 0.0;  // identity, p = 1
  /// max of C_0(UK, p) over the evaluated (U, p): a lower estimate of C_q(K).
  double cq_estimate = 0.0;
  std::int64_t rotation_budget = 0;
  std::vector<double> p_grid;
  /// 0 is the identity; i >= 1 is haar_rotation(seed, i, n).
  std::int64_t argmax_rotation = 0;
  double argmax_p = 1.0;
};

/// Geometric grid q^{i/(size-1)}, both endpoints included.
std::vector<double> p_grid(double q, int size);

/// Requires r(K) >= 1 (BallNotContained otherwise).
BorellConstants cq_estimate(const ConvexBody& body, double q, std::int64_t rotations, int grid_size,
                            std::uint64_t seed, int threads = 1);

/// m_p <= m_q on the lattice cloud (exact for integer orders) and the
/// implied constant m_q / ((q/p) C_0(K,p) m_p) against c_ref.
InequalityReport verify_discrete_borell(const ConvexBody& body, double p, double q, double c_ref = kCRef);
InequalityReport verify_discrete_borell(const C0Data& data, double p, double q, double c_ref = kCRef);

/// G((1-lambda)K + lambda L + C_n)^{1/n} against (1-lambda)G(K)^{1/n} + lambda G(L)^{1/n}.
/// Reported as lhs = right-hand sum, rhs = fattened count root.
InequalityReport verify_discrete_bm(const ConvexBody& k, const ConvexBody& l, const Rational& lambda,
                                    const EnumerateOptions& options = {});

enum class MeanWidthMode { Upper, Lower };

struct MeanWidthOptions {
  /// Upper mode only: average over the identity alone.
  bool identity_only = false;
  double c_ref_upper = kCRefUpper;
  double c_ref_lower = kCRefLower;
  /// The constant C of the lower bound's range (C cq)^2 <= N.
  double c = 2 * kCRef;
  int grid_size = 5;
  int threads = 1;
};

InequalityReport verify_meanwidth_discrete(const ConvexBody& body, std::int64_t n_points, MeanWidthMode mode, double q,
                                           std::int64_t rotations, std::uint64_t seed,
                                           const MeanWidthOptions& options = {});

/// Tail at half the p-th moment against the second-moment bound and then
/// against 1/(4 (C C_0)^{2p}).
InequalityReport paley_zygmund_check(const ProjectionDistribution& dist, double p, double c, double c0_value);
InequalityReport paley_zygmund_check(const C0Data& data, double p, double c);

/// 1 - P(|X| < a m_q)^N <= N P(|X| >= a m_q) <= N a^{-q}, exactly.
InequalityReport union_bound_check(const ProjectionDistribution& dist, const Rational& a, unsigned q, unsigned n);

}  // namespace latticeborell
