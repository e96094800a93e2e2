#include "latticeborell/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/format.h>

#include "latticeborell/error.hpp"

namespace latticeborell {

namespace {

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

std::int64_t isqrt_floor(const Rational& v) {
  if (v < 0) return -1;
  const Integer whole = numerator(v) / denominator(v);
  return static_cast<std::int64_t>(boost::multiprecision::sqrt(whole));
}

void enumerate_ball(const BallData& ball, int n, std::vector<IntPoint>& out) {
  IntPoint x(static_cast<std::size_t>(n), 0);
  const Rational r2 = ball.radius * ball.radius;
  // Recursive coordinate fixing with the exact slice radius.
  auto rec = [&](auto&& self, int i, const Rational& remaining) -> void {
    const std::int64_t bound = isqrt_floor(remaining);
    for (std::int64_t v = -bound; v <= bound; ++v) {
      x[static_cast<std::size_t>(i)] = v;
      if (i + 1 == n) {
        out.push_back(x);
      } else {
        self(self, i + 1, Rational(remaining - v * v));
      }
    }
  };
  rec(rec, 0, r2);
}

void enumerate_box(const BoxData& box, std::vector<IntPoint>& out) {
  const auto n = box.halfwidths.size();
  std::vector<std::int64_t> bound(n);
  for (std::size_t i = 0; i < n; ++i) bound[i] = floor_int(box.halfwidths[i]);
  IntPoint x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = -bound[i];
  while (true) {
    out.push_back(x);
    std::size_t k = n;
    while (k > 0) {
      --k;
      if (x[k] < bound[k]) {
        ++x[k];
        for (std::size_t j = k + 1; j < n; ++j) x[j] = -bound[j];
        break;
      }
      if (k == 0) return;
    }
  }
}

}  // namespace

std::vector<std::pair<std::int64_t, std::int64_t>> lattice_bounding_box(const ConvexBody& body) {
  const int n = body.dim();
  std::vector<std::pair<std::int64_t, std::int64_t>> box;
  for (int i = 0; i < n; ++i) {
    Vec e = Vec::Zero(n);
    e(i) = 1.0;
    const double hi = support(body, e);
    const double lo = -support(body, -e);
    if (!std::isfinite(hi) || !std::isfinite(lo)) throw Error(ErrorKind::UnboundedBody, "unbounded body");
    box.emplace_back(static_cast<std::int64_t>(std::ceil(lo - 1e-7)), static_cast<std::int64_t>(std::floor(hi + 1e-7)));
  }
  return box;
}

LatticePointSet enumerate(const ConvexBody& body, const EnumerateOptions& options) {
  LatticePointSet set;
  set.body_fingerprint = fingerprint(body);
  const int n = body.dim();
  const BodyNode& node = body.node();
  if (const auto* ball = std::get_if<BallData>(&node.data)) {
    enumerate_ball(*ball, n, set.points);
  } else if (const auto* box = std::get_if<BoxData>(&node.data)) {
    enumerate_box(*box, set.points);
  } else {
    const auto range = lattice_bounding_box(body);
    double cells = 1.0;
    for (const auto& [lo, hi] : range) cells *= static_cast<double>(std::max<std::int64_t>(0, hi - lo + 1));
    if (cells > options.budget) {
      throw Error(ErrorKind::BudgetExceeded, fmt::format("{:.0f} bounding-box cells exceed the budget", cells));
    }
    if (cells == 0) {
      set.count = 0;
      return set;
    }
    IntPoint x(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = range[static_cast<std::size_t>(i)].first;
    const bool open = body.is_open();
    while (true) {
      const Classification c = classify(body, x, options.tol);
      if (c.label == Label::BoundaryAmbiguous) ++set.ambiguous_count;
      if (c.label == Label::Inside || (c.label == Label::BoundaryAmbiguous && !open)) set.points.push_back(x);
      int k = n - 1;
      while (k >= 0 && x[static_cast<std::size_t>(k)] == range[static_cast<std::size_t>(k)].second) {
        x[static_cast<std::size_t>(k)] = range[static_cast<std::size_t>(k)].first;
        --k;
      }
      if (k < 0) break;
      ++x[static_cast<std::size_t>(k)];
    }
  }
  set.count = static_cast<std::int64_t>(set.points.size());
  return set;
}

Rational ProjectionDistribution::cdf_exact(std::size_t j) const {
  std::int64_t below = 0;
  for (std::size_t i = 0; i <= j && i < counts.size(); ++i) below += counts[i];
  return Rational(below, total);
}

ProjectionDistribution make_distribution(std::vector<std::int64_t> values, std::vector<std::int64_t> counts) {
  if (values.size() != counts.size()) throw Error(ErrorKind::InvalidArgument, "values/counts length mismatch");
  ProjectionDistribution dist;
  for (std::size_t j = 0; j < values.size(); ++j) {
    if (values[j] < 0 || counts[j] <= 0) throw Error(ErrorKind::InvalidArgument, "bad distribution entry");
    if (j > 0 && values[j] <= values[j - 1]) throw Error(ErrorKind::InvalidArgument, "values must increase");
    dist.total += counts[j];
  }
  dist.values = std::move(values);
  dist.counts = std::move(counts);
  std::int64_t running = 0;
  for (auto c : dist.counts) {
    running += c;
    dist.cdf.push_back(static_cast<double>(running) / static_cast<double>(dist.total));
  }
  return dist;
}

ProjectionDistribution project(const LatticePointSet& set, int axis) {
  std::map<std::int64_t, std::int64_t> tally;
  for (const auto& x : set.points) {
    const auto a = axis < 0 ? x.size() - 1 : static_cast<std::size_t>(axis);
    ++tally[std::abs(x.at(a))];
  }
  std::vector<std::int64_t> values;
  std::vector<std::int64_t> counts;
  for (const auto& [v, c] : tally) {
    values.push_back(v);
    counts.push_back(c);
  }
  return make_distribution(std::move(values), std::move(counts));
}

Moment moment(const ProjectionDistribution& dist, double p) {
  if (dist.total == 0) throw Error(ErrorKind::EmptyDistribution, "moment of an empty distribution");
  if (!(p >= 1.0)) throw Error(ErrorKind::InvalidArgument, "moment order must be >= 1");
  CompensatedSum sum;
  for (std::size_t j = 0; j < dist.values.size(); ++j) {
    if (dist.values[j] == 0) continue;
    sum.add(static_cast<double>(dist.counts[j]) * std::pow(static_cast<double>(dist.values[j]), p));
  }
  const double raw = sum.value() / static_cast<double>(dist.total);
  return {raw, std::pow(raw, 1.0 / p)};
}

Rational moment_raw_exact(const ProjectionDistribution& dist, unsigned p) {
  if (dist.total == 0) throw Error(ErrorKind::EmptyDistribution, "moment of an empty distribution");
  Integer sum = 0;
  for (std::size_t j = 0; j < dist.values.size(); ++j) {
    sum += Integer(dist.counts[j]) * boost::multiprecision::pow(Integer(dist.values[j]), p);
  }
  return Rational(sum, Integer(dist.total));
}

HighFloat moment_root_precise(const ProjectionDistribution& dist, const HighFloat& p) {
  if (dist.total == 0) throw Error(ErrorKind::EmptyDistribution, "moment of an empty distribution");
  HighFloat sum = 0;
  for (std::size_t j = 0; j < dist.values.size(); ++j) {
    if (dist.values[j] == 0) continue;
    sum += HighFloat(dist.counts[j]) * boost::multiprecision::pow(HighFloat(dist.values[j]), p);
  }
  sum /= HighFloat(dist.total);
  if (sum == 0) return 0;
  return boost::multiprecision::pow(sum, 1 / p);
}

double expected_max(const ProjectionDistribution& dist, std::int64_t n) {
  if (dist.total == 0) throw Error(ErrorKind::EmptyDistribution, "expected max of an empty distribution");
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "N must be >= 1");
  // sum_j (v_j - v_{j-1}) P(max > v_{j-1}) with v_0 = 0.
  const double nd = static_cast<double>(n);
  CompensatedSum sum;
  double previous_value = 0.0;
  double previous_cdf = 0.0;
  for (std::size_t j = 0; j < dist.values.size(); ++j) {
    const double v = static_cast<double>(dist.values[j]);
    if (v > previous_value) {
      const double below = previous_cdf == 0.0 ? 0.0 : std::exp(nd * std::log(previous_cdf));
      sum.add((v - previous_value) * (1.0 - below));
    }
    previous_value = v;
    previous_cdf = dist.cdf[j];
  }
  return sum.value();
}

Rational expected_max_exact(const ProjectionDistribution& dist, unsigned n) {
  if (dist.total == 0) throw Error(ErrorKind::EmptyDistribution, "expected max of an empty distribution");
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "N must be >= 1");
  Rational sum(0);
  Rational previous(0);
  for (std::size_t j = 0; j < dist.values.size(); ++j) {
    const Rational f = pow(dist.cdf_exact(j), n);
    sum += Rational(dist.values[j]) * (f - previous);
    previous = f;
  }
  return sum;
}

double tail(const ProjectionDistribution& dist, double t) {
  if (dist.total == 0) throw Error(ErrorKind::EmptyDistribution, "tail of an empty distribution");
  std::int64_t above = 0;
  for (std::size_t j = 0; j < dist.values.size(); ++j) {
    if (static_cast<double>(dist.values[j]) >= t) above += dist.counts[j];
  }
  return static_cast<double>(above) / static_cast<double>(dist.total);
}

Rational tail_exact(const ProjectionDistribution& dist, const Rational& t) {
  if (dist.total == 0) throw Error(ErrorKind::EmptyDistribution, "tail of an empty distribution");
  std::int64_t above = 0;
  for (std::size_t j = 0; j < dist.values.size(); ++j) {
    if (Rational(dist.values[j]) >= t) above += dist.counts[j];
  }
  return Rational(above, dist.total);
}

std::string points_to_csv(const LatticePointSet& set) {
  std::string out;
  for (const auto& x : set.points) {
    for (std::size_t i = 0; i < x.size(); ++i) out += fmt::format("{}{}", i ? "," : "", x[i]);
    out += '\n';
  }
  return out;
}

nlohmann::json distribution_to_json(const ProjectionDistribution& dist) {
  return nlohmann::json{{"values", dist.values}, {"counts", dist.counts}};
}

ProjectionDistribution distribution_from_json(const nlohmann::json& j) {
  try {
    return make_distribution(j.at("values").get<std::vector<std::int64_t>>(),
                             j.at("counts").get<std::vector<std::int64_t>>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, e.what());
  }
}

}  // namespace latticeborell
