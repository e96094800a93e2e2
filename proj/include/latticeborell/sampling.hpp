#pragma once

#include <cstdint>
#include <vector>

#include <boost/random/mersenne_twister.hpp>

#include "latticeborell/body.hpp"

namespace latticeborell {

/// Deterministic random stream. Streams with the same (seed, stream_id)
/// produce identical draws on every platform: the engine and the
/// distributions are Boost's portable implementations.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  /// Independent child stream; children of different ids never overlap in practice.
  RngStream substream(std::uint64_t id) const;

  double uniform();  // [0, 1)
  double normal();
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);
  /// Uniform direction on the sphere S^{n-1}.
  Vec direction(int n);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  boost::random::mt19937_64 engine_;
};

/// Haar-distributed orthogonal matrix from the QR factorization of a
/// Gaussian matrix, normalized so that R has a positive diagonal.
Rotation haar_rotation(RngStream& rng, int n);
/// The rotation used for index `index` of a Monte Carlo budget: stream
/// `index` of `seed`.
Rotation haar_rotation(std::uint64_t seed, std::uint64_t index, int n);

/// Uniform points in K. Rejection from the support bounding box; when a
/// 2048-trial probe accepts less than 1e-3 of proposals, a coordinate
/// hit-and-run chain (burn-in 50n, thinning 10n) takes over.
class UniformSampler {
 public:
  /// Runs the acceptance probe on `rng`.
  UniformSampler(ConvexBody body, RngStream& rng);

  Vec next(RngStream& rng);
  std::vector<Vec> draw(std::size_t count, RngStream& rng);
  /// The next draw restarts the chain (burn-in included); no effect for
  /// rejection sampling.
  void reset() { burned_in_ = false; }
  bool uses_hit_and_run() const { return hit_and_run_; }
  double acceptance_rate() const { return acceptance_; }

 private:
  bool inside(const Vec& x) const;
  Vec propose(RngStream& rng) const;
  void step(RngStream& rng);
  void restart(RngStream& rng);

  ConvexBody body_;
  Vec lo_;
  Vec hi_;
  bool hit_and_run_ = false;
  bool burned_in_ = false;
  double acceptance_ = 1.0;
  std::vector<Vec> pending_;  // first accepted probe point
  Vec start_;
  Vec state_;
};

Vec uniform_in_body(const ConvexBody& body, RngStream& rng);

struct MeanWidthEstimate {
  double value = 0.0;
  double stderr = 0.0;
  std::int64_t point_samples = 0;
  std::int64_t direction_samples = 0;
  std::int64_t replicates = 0;
};

/// E w(K_N) for K_N = conv{+-X_1, ..., +-X_N}, X_i uniform in K, through
/// h_{K_N}(theta) = max_i |<X_i, theta>|. Replicate r uses substream r.
MeanWidthEstimate random_polytope_mean_width(const ConvexBody& body, std::int64_t n_points, std::int64_t replicates,
                                             std::int64_t directions, const RngStream& rng);

/// h_{Z_p(K)}(theta) from the lattice points of lambda K (Riemann sum).
double centroid_support_lattice(const ConvexBody& body, double p, const Vec& theta, const Rational& lambda);
/// h_{Z_p(K)}(theta) from M uniform samples.
double centroid_support_mc(const ConvexBody& body, double p, const Vec& theta, std::int64_t samples, RngStream& rng);
double centroid_support_from_samples(const std::vector<Vec>& points, double p, const Vec& theta);

/// (E_K |x_n|^p)^{1/p} for X uniform in K; Box and Ball (possibly scaled) only.
double continuous_moment_root(const ConvexBody& body, double p);

/// w(Z_p(K)): replicate r draws `samples` points and `directions` sphere
/// directions from substream r.
MeanWidthEstimate mean_width_centroid(const ConvexBody& body, double p, std::int64_t directions, std::int64_t samples,
                                      std::int64_t replicates, const RngStream& rng);

/// Empirical h_{K_delta}(theta): order statistic ceil((1 - delta) M) of the
/// sorted |<X, theta>|.
double floating_body_support(const ConvexBody& body, double delta, const Vec& theta, std::int64_t samples,
                             RngStream& rng);
double floating_body_from_samples(const std::vector<Vec>& points, double delta, const Vec& theta);

}  // namespace latticeborell
