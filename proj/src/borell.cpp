#include "latticeborell/borell.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "latticeborell/error.hpp"
#include "latticeborell/parallel.hpp"
#include "latticeborell/sampling.hpp"

namespace latticeborell {

namespace {

bool within(double lhs, double rhs) { return lhs <= rhs + kFloatRelTol * std::abs(rhs); }

bool integer_order(double p) { return p >= 1.0 && is_small_integer(p, 64); }

HighFloat to_high(const Rational& v) { return HighFloat(numerator(v).str()) / HighFloat(denominator(v).str()); }

HighFloat high_pow(const HighFloat& base, const HighFloat& exponent) {
  if (base == 0) return 0;
  return boost::multiprecision::pow(base, exponent);
}

/// Sum of |v|^p over the cloud, exact.
Integer power_sum(const ProjectionDistribution& dist, unsigned p) {
  Integer sum = 0;
  for (std::size_t j = 0; j < dist.values.size(); ++j) {
    sum += Integer(dist.counts[j]) * boost::multiprecision::pow(Integer(dist.values[j]), p);
  }
  return sum;
}

double inradius_checked(const ConvexBody& body, ErrorKind kind) {
  try {
    return radii(body).inner;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::OriginOutside) throw Error(kind, "origin outside K");
    throw;
  }
}

}  // namespace

nlohmann::json to_json(const InequalityReport& report) {
  return nlohmann::json{{"name", report.name},
                        {"lhs", report.lhs},
                        {"rhs", report.rhs},
                        {"implied_constant", report.implied_constant},
                        {"pass", report.pass},
                        {"exact", report.exact},
                        {"context", report.context}};
}

C0Data c0_data(const ConvexBody& body, const EnumerateOptions& options) {
  C0Data data;
  const auto set = enumerate(body, options);
  if (set.count == 0) throw Error(ErrorKind::EmptyLattice, "K contains no lattice points");
  data.x = project(set);
  if (data.x.max_value() < 1) {
    throw Error(ErrorKind::HypothesisViolated, "every lattice point of K has x_n = 0");
  }
  const auto fat = enumerate(ConvexBody::cube_sum(body), options);
  data.y = project(fat);
  data.g_k = set.count;
  data.g_fat = fat.count;
  data.ambiguous = set.ambiguous_count + fat.ambiguous_count;
  return data;
}

double c0(const C0Data& data, double p) {
  const double mx = moment(data.x, p).raw;
  const double my = moment(data.y, p).raw;
  const double ratio = static_cast<double>(data.g_fat) / static_cast<double>(data.g_k);
  return (1.0 + std::pow(my * ratio, 1.0 / p)) / std::pow(mx, 1.0 / p);
}

double c0(const ConvexBody& body, double p) { return c0(c0_data(body), p); }

Rational c0_exact_p1(const C0Data& data) {
  return Rational(Integer(data.g_k) + power_sum(data.y, 1), power_sum(data.x, 1));
}

HighFloat c0_precise(const C0Data& data, const HighFloat& p) {
  if (p < 1) throw Error(ErrorKind::InvalidArgument, "moment order must be >= 1");
  const HighFloat mx = moment_root_precise(data.x, p);
  const HighFloat my = moment_root_precise(data.y, p);
  const HighFloat ratio = HighFloat(data.g_fat) / HighFloat(data.g_k);
  return (1 + my * high_pow(ratio, 1 / p)) / mx;
}

std::int64_t shell_count(const ConvexBody& body, double t) {
  if (!(t >= 0)) throw Error(ErrorKind::InvalidArgument, "shell width must be >= 0");
  const auto grown = ConvexBody::scaled(rational_from_double(1.0 + t), body);
  return enumerate(grown).count - enumerate(body).count;
}

double shell_count_formula(const ConvexBody& body, double t) {
  const auto rr = radii(body);
  const double n = body.dim();
  const double sn = std::sqrt(n);
  return (std::pow(1 + t + sn / (2 * rr.inner), n) - std::pow(1 - sn * rr.outer / (2 * rr.inner * rr.inner), n)) *
         volume(body);
}

C0UpperBound c0_upper_bound(const ConvexBody& body, double p) {
  if (!(p >= 1)) throw Error(ErrorKind::InvalidArgument, "moment order must be >= 1");
  if (!body.origin_interior()) throw Error(ErrorKind::HypothesisViolated, "0 is not an interior point of K");
  const auto rr = radii(body);
  const int n = body.dim();
  const double sn = std::sqrt(static_cast<double>(n));
  const double r = rr.inner;
  const double big_r = rr.outer;
  if (!within(sn * big_r, 2 * r * r)) {
    throw Error(ErrorKind::HypothesisViolated, fmt::format("sqrt(n) R = {:.6g} exceeds 2 r^2 = {:.6g}", sn * big_r, 2 * r * r));
  }
  c0_data(body);  // lattice hypothesis
  const auto inner = enumerate(ConvexBody::ball(n, rational_from_double(r)));
  const auto dist = project(inner);
  const double s1 = to_double(Rational(power_sum(dist, 1)));
  if (s1 == 0) throw Error(ErrorKind::HypothesisViolated, "r B_2^n has no lattice point off x_n = 0");
  const double g_r = static_cast<double>(inner.count);
  const double shell = shell_count_formula(body, sn / r);
  const double bound = 1 + parallel_volume(body, sn / 2) / s1 +
                       (1 + sn / r) * big_r * std::pow(shell, 1 / p) / ((s1 / g_r) * std::pow(g_r, 1 / p));
  return {bound, shell, r, big_r};
}

std::vector<double> p_grid(double q, int size) {
  if (!(q >= 1)) throw Error(ErrorKind::InvalidArgument, "q must be >= 1");
  if (size < 1) throw Error(ErrorKind::InvalidArgument, "p-grid size must be >= 1");
  if (q == 1) return {1.0};
  if (size < 2) throw Error(ErrorKind::InvalidArgument, "p-grid needs both endpoints");
  std::vector<double> grid;
  for (int i = 0; i < size; ++i) grid.push_back(i + 1 == size ? q : std::pow(q, static_cast<double>(i) / (size - 1)));
  return grid;
}

BorellConstants cq_estimate(const ConvexBody& body, double q, std::int64_t rotations, int grid_size,
                            std::uint64_t seed, int threads) {
  if (rotations < 0) throw Error(ErrorKind::InvalidArgument, "rotation budget must be >= 0");
  const double r = inradius_checked(body, ErrorKind::BallNotContained);
  if (r < 1 - kFloatRelTol) throw Error(ErrorKind::BallNotContained, fmt::format("inradius {:.6g} < 1", r));
  BorellConstants out;
  out.p_grid = p_grid(q, grid_size);
  out.rotation_budget = rotations;
  const int n = body.dim();
  std::vector<std::vector<double>> values(static_cast<std::size_t>(rotations + 1));
  parallel_for(values.size(), threads, [&](std::size_t i) {
    const auto rotated =
        i == 0 ? body : ConvexBody::rotated(haar_rotation(seed, i, n), body);
    const auto data = c0_data(rotated);
    for (double p : out.p_grid) values[i].push_back(c0(data, p));
  });
  out.c0 = values[0][0];
  out.cq_estimate = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < values.size(); ++i) {
    for (std::size_t j = 0; j < out.p_grid.size(); ++j) {
      if (values[i][j] > out.cq_estimate) {
        out.cq_estimate = values[i][j];
        out.argmax_rotation = static_cast<std::int64_t>(i);
        out.argmax_p = out.p_grid[j];
      }
    }
  }
  return out;
}

InequalityReport verify_discrete_borell(const C0Data& data, double p, double q, double c_ref) {
  if (!(p >= 1 && p <= q)) throw Error(ErrorKind::InvalidArgument, "need 1 <= p <= q");
  bool holder = false;
  bool exact = false;
  if (integer_order(p) && integer_order(q)) {
    const auto pi = static_cast<unsigned>(p);
    const auto qi = static_cast<unsigned>(q);
    // m_p <= m_q  <=>  raw_p^q <= raw_q^p.
    holder = pow(moment_raw_exact(data.x, pi), qi) <= pow(moment_raw_exact(data.x, qi), pi);
    exact = true;
  } else if (data.x.values.size() == 1 || p == q) {
    holder = true;
  } else {
    holder = moment_root_precise(data.x, HighFloat(p)) <= moment_root_precise(data.x, HighFloat(q));
  }
  const double m_p = moment(data.x, p).root;
  const double m_q = moment(data.x, q).root;
  const double c0_value = c0(data, p);
  InequalityReport report;
  report.name = "discrete-borell";
  report.lhs = m_q;
  report.rhs = c_ref * (q / p) * c0_value * m_p;
  report.implied_constant = m_q / ((q / p) * c0_value * m_p);
  report.pass = holder && within(report.implied_constant, c_ref);
  report.exact = exact;
  report.context = {{"p", p},          {"q", q},         {"m_p", m_p},         {"m_q", m_q},
                    {"c0", c0_value},  {"c_ref", c_ref}, {"raw_ratio", m_q / m_p}, {"holder", holder},
                    {"g_k", data.g_k}, {"g_fat", data.g_fat}};
  return report;
}

InequalityReport verify_discrete_borell(const ConvexBody& body, double p, double q, double c_ref) {
  auto report = verify_discrete_borell(c0_data(body), p, q, c_ref);
  report.context["body"] = describe(body);
  return report;
}

InequalityReport verify_discrete_bm(const ConvexBody& k, const ConvexBody& l, const Rational& lambda,
                                    const EnumerateOptions& options) {
  if (k.dim() != l.dim()) throw Error(ErrorKind::InvalidArgument, "dimension mismatch");
  if (!(lambda > 0 && lambda < 1)) throw Error(ErrorKind::InvalidArgument, "lambda must lie in (0, 1)");
  const int n = k.dim();
  const auto g_k = enumerate(k, options).count;
  const auto g_l = enumerate(l, options).count;
  const auto sum = ConvexBody::combination(lambda, k, l, true);
  const auto fat = enumerate(sum, options);
  const HighFloat inv_n = HighFloat(1) / n;
  const HighFloat lam = to_high(lambda);
  const HighFloat lhs = (1 - lam) * high_pow(HighFloat(g_k), inv_n) + lam * high_pow(HighFloat(g_l), inv_n);
  const HighFloat rhs = high_pow(HighFloat(fat.count), inv_n);
  InequalityReport report;
  report.name = "discrete-brunn-minkowski";
  report.lhs = static_cast<double>(lhs);
  report.rhs = static_cast<double>(rhs);
  report.implied_constant = rhs > 0 ? static_cast<double>(lhs / rhs) : std::numeric_limits<double>::infinity();
  report.pass = lhs <= rhs;
  report.exact = false;
  report.context = {{"k", describe(k)},
                    {"l", describe(l)},
                    {"lambda", to_string(lambda)},
                    {"g_k", g_k},
                    {"g_l", g_l},
                    {"g_sum", fat.count},
                    {"ambiguous", fat.ambiguous_count},
                    {"membership_exact", sum.exact_membership()}};
  return report;
}

InequalityReport verify_meanwidth_discrete(const ConvexBody& body, std::int64_t n_points, MeanWidthMode mode, double q,
                                           std::int64_t rotations, std::uint64_t seed,
                                           const MeanWidthOptions& options) {
  if (rotations < 1) throw Error(ErrorKind::RotationBudgetZero, "at least one rotation is required");
  const int n = body.dim();
  const double log_n = std::log(static_cast<double>(n_points));
  nlohmann::json context = {{"body", describe(body)}, {"N", n_points}, {"rotations", rotations}, {"seed", seed}};

  double p_lower = 0.0;
  if (mode == MeanWidthMode::Upper) {
    if (n_points < 3) throw Error(ErrorKind::PreconditionViolated, "N must be >= 3");
    if (!body.contains_origin()) throw Error(ErrorKind::PreconditionViolated, "0 is not in K");
  } else {
    const double r = inradius_checked(body, ErrorKind::PreconditionViolated);
    if (r < 1 - kFloatRelTol) throw Error(ErrorKind::PreconditionViolated, fmt::format("inradius {:.6g} < 1", r));
    const auto constants = cq_estimate(body, q, rotations, options.grid_size, seed, options.threads);
    const double ccq = options.c * constants.cq_estimate;
    if (static_cast<double>(n_points) < ccq * ccq || log_n > q) {
      throw Error(ErrorKind::PreconditionViolated,
                  fmt::format("N = {} outside [(C cq)^2, e^q] = [{:.6g}, {:.6g}]", n_points, ccq * ccq, std::exp(q)));
    }
    p_lower = log_n / (2 * std::log(ccq));
    context["q"] = q;
    context["C"] = options.c;
    context["cq_estimate"] = constants.cq_estimate;
    context["cq_note"] = "estimate (lower bound)";
    context["cq_argmax_rotation"] = constants.argmax_rotation;
    context["cq_argmax_p"] = constants.argmax_p;
    context["p1"] = p_lower;
  }

  const bool identity = mode == MeanWidthMode::Upper && options.identity_only;
  const std::size_t count = identity ? 1 : static_cast<std::size_t>(rotations);
  std::vector<double> maxima(count);
  std::vector<double> moments(count);
  parallel_for(count, options.threads, [&](std::size_t i) {
    const auto rotated = identity ? body : ConvexBody::rotated(haar_rotation(seed, i + 1, n), body);
    const auto dist = project(enumerate(rotated));
    maxima[i] = expected_max(dist, n_points);
    moments[i] = moment(dist, mode == MeanWidthMode::Upper ? log_n : p_lower).root;
  });
  double a = 0.0;
  double b = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    a += maxima[i];
    b += moments[i];
  }
  a /= static_cast<double>(count);
  b /= static_cast<double>(count);
  context["A"] = a;
  context["B"] = b;
  context["identity_only"] = identity;

  InequalityReport report;
  report.exact = false;
  if (mode == MeanWidthMode::Upper) {
    report.name = "meanwidth-upper";
    report.lhs = a;
    report.rhs = options.c_ref_upper * b;
    report.implied_constant = a / b;
    report.pass = within(report.implied_constant, options.c_ref_upper);
    context["c_ref"] = options.c_ref_upper;
  } else {
    report.name = "meanwidth-lower";
    report.lhs = options.c_ref_lower * b;
    report.rhs = a;
    report.implied_constant = a / b;
    report.pass = within(options.c_ref_lower, report.implied_constant);
    context["c_ref"] = options.c_ref_lower;
  }
  report.context = std::move(context);
  return report;
}

InequalityReport paley_zygmund_check(const ProjectionDistribution& dist, double p, double c, double c0_value) {
  if (!(p >= 1)) throw Error(ErrorKind::InvalidArgument, "moment order must be >= 1");
  if (dist.max_value() < 1) throw Error(ErrorKind::HypothesisViolated, "every lattice point has x_n = 0");
  HighFloat tail_value;
  HighFloat pz_bound;
  bool step1 = false;
  bool exact = false;
  if (integer_order(p)) {
    const auto pi = static_cast<unsigned>(p);
    const Rational raw_p = moment_raw_exact(dist, pi);
    const Rational raw_2p = moment_raw_exact(dist, 2 * pi);
    std::int64_t above = 0;
    // v >= m_p / 2  <=>  (2v)^p >= raw_p.
    for (std::size_t j = 0; j < dist.values.size(); ++j) {
      if (Rational(boost::multiprecision::pow(Integer(2 * dist.values[j]), pi)) >= raw_p) above += dist.counts[j];
    }
    const Rational tail_q(above, dist.total);
    const Rational factor = 1 - Rational(1, Integer(1) << pi);
    const Rational bound_q = factor * factor * raw_p * raw_p / raw_2p;
    step1 = tail_q >= bound_q;
    tail_value = to_high(tail_q);
    pz_bound = to_high(bound_q);
    exact = true;
  } else {
    const HighFloat hp(p);
    const HighFloat m_p = moment_root_precise(dist, hp);
    const HighFloat m_2p = moment_root_precise(dist, 2 * hp);
    std::int64_t above = 0;
    for (std::size_t j = 0; j < dist.values.size(); ++j) {
      if (2 * HighFloat(dist.values[j]) >= m_p) above += dist.counts[j];
    }
    tail_value = HighFloat(above) / HighFloat(dist.total);
    const HighFloat factor = 1 - high_pow(HighFloat(2), -hp);
    pz_bound = factor * factor * high_pow(m_p / m_2p, 2 * hp);
    step1 = tail_value >= pz_bound;
  }
  const HighFloat chain = 1 / (4 * high_pow(HighFloat(c) * HighFloat(c0_value), 2 * HighFloat(p)));
  const bool step2 = pz_bound >= chain;
  InequalityReport report;
  report.name = "paley-zygmund";
  report.lhs = static_cast<double>(chain);
  report.rhs = static_cast<double>(tail_value);
  report.implied_constant =
      static_cast<double>(high_pow(1 / (4 * tail_value), 1 / (2 * HighFloat(p)))) / c0_value;
  report.pass = step1 && step2;
  report.exact = exact;
  report.context = {{"p", p},
                    {"C", c},
                    {"c0", c0_value},
                    {"tail", static_cast<double>(tail_value)},
                    {"pz_bound", static_cast<double>(pz_bound)},
                    {"chain_bound", static_cast<double>(chain)},
                    {"step1", step1},
                    {"step2", step2}};
  return report;
}

InequalityReport paley_zygmund_check(const C0Data& data, double p, double c) {
  return paley_zygmund_check(data.x, p, c, c0(data, p));
}

InequalityReport union_bound_check(const ProjectionDistribution& dist, const Rational& a, unsigned q, unsigned n) {
  if (!(a > 0) || q < 1 || n < 1) throw Error(ErrorKind::InvalidArgument, "need a > 0, q >= 1, N >= 1");
  if (dist.max_value() < 1) throw Error(ErrorKind::HypothesisViolated, "every lattice point has x_n = 0");
  const Rational raw_q = moment_raw_exact(dist, q);
  const Rational threshold = pow(a, q) * raw_q;
  std::int64_t above = 0;
  // v >= a m_q  <=>  v^q >= a^q raw_q.
  for (std::size_t j = 0; j < dist.values.size(); ++j) {
    if (Rational(boost::multiprecision::pow(Integer(dist.values[j]), q)) >= threshold) above += dist.counts[j];
  }
  const Rational tail_q(above, dist.total);
  const Rational p_max = 1 - pow(1 - tail_q, n);
  const Rational union_bound = Rational(n) * tail_q;
  const Rational markov = Rational(n) / pow(a, q);
  InequalityReport report;
  report.name = "union-bound";
  report.lhs = to_double(p_max);
  report.rhs = to_double(markov);
  report.implied_constant = to_double(p_max / markov);
  report.pass = p_max <= union_bound && union_bound <= markov;
  report.exact = true;
  report.context = {{"a", to_string(a)},
                    {"q", q},
                    {"N", n},
                    {"tail", to_double(tail_q)},
                    {"union", to_double(union_bound)}};
  return report;
}

}  // namespace latticeborell
