#include "latticeborell/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include "latticeborell/error.hpp"
#include "latticeborell/lattice.hpp"

namespace latticeborell {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr int kProbeTrials = 2048;
constexpr double kMinAcceptance = 1e-3;

double mean(const std::vector<double>& v) {
  long double s = 0;
  for (double x : v) s += x;
  return static_cast<double>(s / static_cast<long double>(v.size()));
}

double standard_error(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  long double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  const double var = static_cast<double>(s / static_cast<long double>(v.size() - 1));
  return std::sqrt(var / static_cast<double>(v.size()));
}

}  // namespace

// ---------------------------------------------------------------- RngStream

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), engine_(splitmix64(seed ^ splitmix64(stream_id + 0x632be59bd9b4e019ULL))) {}

RngStream RngStream::substream(std::uint64_t id) const {
  return RngStream(seed_, splitmix64(stream_id_ * 0x9e3779b97f4a7c15ULL + id + 1));
}

double RngStream::uniform() { return boost::random::uniform_01<double>()(engine_); }

double RngStream::normal() { return boost::random::normal_distribution<double>()(engine_); }

std::uint64_t RngStream::below(std::uint64_t n) {
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "empty range");
  return boost::random::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
}

Vec RngStream::direction(int n) {
  Vec v(n);
  double norm = 0.0;
  while (norm == 0.0) {
    for (int i = 0; i < n; ++i) v(i) = normal();
    norm = v.norm();
  }
  return v / norm;
}

// ---------------------------------------------------------------- Haar

Rotation haar_rotation(RngStream& rng, int n) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "rotation needs n >= 1");
  Mat g(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) g(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ();
  const Mat& r = qr.matrixQR();
  for (int j = 0; j < n; ++j) {
    if (r(j, j) < 0) q.col(j) *= -1.0;
  }
  return Rotation::haar(std::move(q), rng.seed(), rng.stream_id());
}

Rotation haar_rotation(std::uint64_t seed, std::uint64_t index, int n) {
  RngStream rng(seed, index);
  return haar_rotation(rng, n);
}

// ---------------------------------------------------------------- uniform sampling

UniformSampler::UniformSampler(ConvexBody body, RngStream& rng) : body_(std::move(body)) {
  const int n = body_.dim();
  if (body_.node().radii && body_.node().radii->inner <= 1e-12 && body_.contains_origin()) {
    throw Error(ErrorKind::DegenerateBody, "body has empty interior");
  }
  lo_ = Vec(n);
  hi_ = Vec(n);
  for (int i = 0; i < n; ++i) {
    Vec e = Vec::Zero(n);
    e(i) = 1.0;
    hi_(i) = support(body_, e);
    lo_(i) = -support(body_, -e);
    if (!(hi_(i) > lo_(i))) throw Error(ErrorKind::DegenerateBody, "flat bounding box");
  }
  int accepted = 0;
  for (int t = 0; t < kProbeTrials; ++t) {
    Vec x = propose(rng);
    if (inside(x)) {
      ++accepted;
      if (pending_.empty()) pending_.push_back(std::move(x));
    }
  }
  acceptance_ = static_cast<double>(accepted) / kProbeTrials;
  if (acceptance_ < kMinAcceptance) {
    hit_and_run_ = true;
    if (!pending_.empty()) {
      state_ = pending_.front();
    } else if (body_.contains_origin() && inside(Vec::Zero(n))) {
      state_ = Vec::Zero(n);
    } else {
      throw Error(ErrorKind::DegenerateBody, "no interior starting point for hit-and-run");
    }
    start_ = state_;
  }
}

bool UniformSampler::inside(const Vec& x) const {
  const auto c = classify(body_, x);
  return c.label == Label::Inside || (c.label == Label::BoundaryAmbiguous && !body_.is_open());
}

Vec UniformSampler::propose(RngStream& rng) const {
  Vec x(lo_.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = lo_(i) + (hi_(i) - lo_(i)) * rng.uniform();
  return x;
}

void UniformSampler::step(RngStream& rng) {
  const int n = body_.dim();
  const auto i = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
  // Chord of the body along e_i through the current state, by bisection.
  auto reach = [&](double span) {
    Vec y = state_;
    y(i) += span;
    if (inside(y)) return span;
    double good = 0.0;
    double bad = span;
    for (int k = 0; k < 60; ++k) {
      const double mid = 0.5 * (good + bad);
      y(i) = state_(i) + mid;
      (inside(y) ? good : bad) = mid;
    }
    return good;
  };
  const double up = reach(hi_(i) - state_(i));
  const double down = reach(lo_(i) - state_(i));
  state_(i) += down + (up - down) * rng.uniform();
}

void UniformSampler::restart(RngStream& rng) {
  if (!hit_and_run_) return;
  state_ = start_;
  for (int k = 0; k < 50 * body_.dim(); ++k) step(rng);
}

Vec UniformSampler::next(RngStream& rng) {
  if (hit_and_run_) {
    if (!burned_in_) {
      restart(rng);
      burned_in_ = true;
    }
    for (int k = 0; k < 10 * body_.dim(); ++k) step(rng);
    return state_;
  }
  while (true) {
    Vec x = propose(rng);
    if (inside(x)) return x;
  }
}

std::vector<Vec> UniformSampler::draw(std::size_t count, RngStream& rng) {
  std::vector<Vec> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) out.push_back(next(rng));
  return out;
}

Vec uniform_in_body(const ConvexBody& body, RngStream& rng) {
  UniformSampler sampler(body, rng);
  return sampler.next(rng);
}

// ---------------------------------------------------------------- mean width

MeanWidthEstimate random_polytope_mean_width(const ConvexBody& body, std::int64_t n_points, std::int64_t replicates,
                                             std::int64_t directions, const RngStream& rng) {
  if (n_points < 1) throw Error(ErrorKind::InvalidArgument, "N must be >= 1");
  if (replicates < 1 || directions < 1) throw Error(ErrorKind::ZeroBudget, "mean width needs positive budgets");
  RngStream probe = rng.substream(~std::uint64_t{0});
  UniformSampler sampler(body, probe);
  std::vector<double> widths;
  widths.reserve(static_cast<std::size_t>(replicates));
  for (std::int64_t r = 0; r < replicates; ++r) {
    RngStream sub = rng.substream(static_cast<std::uint64_t>(r));
    sampler.reset();
    const auto points = sampler.draw(static_cast<std::size_t>(n_points), sub);
    long double total = 0;
    for (std::int64_t d = 0; d < directions; ++d) {
      const Vec theta = sub.direction(body.dim());
      double h = 0.0;
      for (const auto& x : points) h = std::max(h, std::abs(x.dot(theta)));
      total += h;
    }
    widths.push_back(static_cast<double>(total / static_cast<long double>(directions)));
  }
  MeanWidthEstimate est;
  est.value = mean(widths);
  est.stderr = standard_error(widths);
  est.point_samples = n_points * replicates;
  est.direction_samples = directions * replicates;
  est.replicates = replicates;
  return est;
}

// ---------------------------------------------------------------- centroid bodies

double centroid_support_from_samples(const std::vector<Vec>& points, double p, const Vec& theta) {
  if (points.empty()) throw Error(ErrorKind::ZeroBudget, "no samples");
  if (!(p >= 1.0)) throw Error(ErrorKind::InvalidArgument, "p must be >= 1");
  long double s = 0;
  for (const auto& x : points) s += std::pow(std::abs(x.dot(theta)), p);
  return std::pow(static_cast<double>(s / static_cast<long double>(points.size())), 1.0 / p);
}

double centroid_support_lattice(const ConvexBody& body, double p, const Vec& theta, const Rational& lambda) {
  if (theta.cwiseAbs().maxCoeff() == 0.0) throw Error(ErrorKind::ZeroDirection, "zero direction");
  if (!(p >= 1.0)) throw Error(ErrorKind::InvalidArgument, "p must be >= 1");
  const auto set = enumerate(ConvexBody::scaled(lambda, body));
  if (set.count == 0) throw Error(ErrorKind::EmptyLattice, "no lattice points in lambda K");
  long double s = 0;
  for (const auto& x : set.points) {
    double dot = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) dot += static_cast<double>(x[i]) * theta(static_cast<Eigen::Index>(i));
    s += std::pow(std::abs(dot), p);
  }
  const double root = std::pow(static_cast<double>(s / static_cast<long double>(set.count)), 1.0 / p);
  return root / to_double(lambda);
}

double centroid_support_mc(const ConvexBody& body, double p, const Vec& theta, std::int64_t samples, RngStream& rng) {
  if (theta.cwiseAbs().maxCoeff() == 0.0) throw Error(ErrorKind::ZeroDirection, "zero direction");
  if (samples < 1) throw Error(ErrorKind::ZeroBudget, "no samples");
  UniformSampler sampler(body, rng);
  return centroid_support_from_samples(sampler.draw(static_cast<std::size_t>(samples), rng), p, theta);
}

MeanWidthEstimate mean_width_centroid(const ConvexBody& body, double p, std::int64_t directions, std::int64_t samples,
                                      std::int64_t replicates, const RngStream& rng) {
  if (directions < 1 || samples < 1 || replicates < 1) throw Error(ErrorKind::ZeroBudget, "mean width needs positive budgets");
  RngStream probe = rng.substream(~std::uint64_t{0});
  UniformSampler sampler(body, probe);
  std::vector<double> widths;
  for (std::int64_t r = 0; r < replicates; ++r) {
    RngStream sub = rng.substream(static_cast<std::uint64_t>(r));
    sampler.reset();
    const auto points = sampler.draw(static_cast<std::size_t>(samples), sub);
    long double total = 0;
    for (std::int64_t d = 0; d < directions; ++d) {
      total += centroid_support_from_samples(points, p, sub.direction(body.dim()));
    }
    widths.push_back(static_cast<double>(total / static_cast<long double>(directions)));
  }
  MeanWidthEstimate est;
  est.value = mean(widths);
  est.stderr = standard_error(widths);
  est.point_samples = samples * replicates;
  est.direction_samples = directions * replicates;
  est.replicates = replicates;
  return est;
}

// ---------------------------------------------------------------- floating bodies

double floating_body_from_samples(const std::vector<Vec>& points, double delta, const Vec& theta) {
  if (points.empty()) throw Error(ErrorKind::ZeroBudget, "no samples");
  if (!(delta > 0.0 && delta < 1.0)) throw Error(ErrorKind::InvalidArgument, "delta must lie in (0, 1)");
  std::vector<double> proj;
  proj.reserve(points.size());
  for (const auto& x : points) proj.push_back(std::abs(x.dot(theta)));
  std::sort(proj.begin(), proj.end());
  const auto m = static_cast<double>(proj.size());
  auto index = static_cast<std::size_t>(std::ceil((1.0 - delta) * m - 1e-9));
  index = std::clamp<std::size_t>(index, 1, proj.size());
  return proj[index - 1];
}

double floating_body_support(const ConvexBody& body, double delta, const Vec& theta, std::int64_t samples,
                             RngStream& rng) {
  if (samples < 1) throw Error(ErrorKind::ZeroBudget, "no samples");
  if (theta.cwiseAbs().maxCoeff() == 0.0) throw Error(ErrorKind::ZeroDirection, "zero direction");
  UniformSampler sampler(body, rng);
  return floating_body_from_samples(sampler.draw(static_cast<std::size_t>(samples), rng), delta, theta);
}

}  // namespace latticeborell

namespace latticeborell {

double continuous_moment_root(const ConvexBody& body, double p) {
  if (!(p >= 1.0)) throw Error(ErrorKind::InvalidArgument, "moment order must be >= 1");
  const int n = body.dim();
  return std::visit(
      [&](const auto& d) -> double {
        using D = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<D, BoxData>) {
          return d.halfwidths_d(n - 1) / std::pow(p + 1.0, 1.0 / p);
        } else if constexpr (std::is_same_v<D, BallData>) {
          // E|x_n|^p = R^p Gamma((p+1)/2) Gamma(n/2+1) / (sqrt(pi) Gamma((n+p)/2+1))
          const double log_raw = std::lgamma((p + 1) / 2) + std::lgamma(n / 2.0 + 1) - 0.5 * std::log(std::numbers::pi) -
                                 std::lgamma((n + p) / 2 + 1);
          return d.radius_d * std::exp(log_raw / p);
        } else if constexpr (std::is_same_v<D, ScaledData>) {
          return d.factor_d * continuous_moment_root(d.base, p);
        } else {
          throw Error(ErrorKind::Unsupported, "closed-form moment of a " + body.variant_name());
        }
      },
      body.node().data);
}

}  // namespace latticeborell
