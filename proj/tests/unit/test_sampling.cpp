#include <gtest/gtest.h>

#include <cmath>

#include "latticeborell/error.hpp"
#include "latticeborell/sampling.hpp"

using namespace latticeborell;

namespace {

Vec e(int n, int i) {
  Vec v = Vec::Zero(n);
  v(i) = 1.0;
  return v;
}

ConvexBody cross_polytope() { return ConvexBody::vpolytope({{1, 0}, {-1, 0}, {0, 1}, {0, -1}}); }

const double kBallP1 = 4.0 / (3.0 * M_PI);

}  // namespace

TEST(Haar, Orthogonal) {
  RngStream rng(1, 0);
  for (int n = 1; n <= 6; ++n) {
    for (int k = 0; k < 20; ++k) {
      const auto u = haar_rotation(rng, n);
      EXPECT_LE(u.orthogonality_defect(), 1e-12);
      EXPECT_NEAR(std::abs(u.matrix().determinant()), 1.0, 1e-10);
      EXPECT_EQ(u.kind(), RotationKind::Haar);
    }
  }
}

TEST(Haar, FirstColumnCentered) {
  RngStream rng(2, 0);
  double sum = 0.0;
  for (int k = 0; k < 10000; ++k) sum += haar_rotation(rng, 3).matrix()(0, 0);
  EXPECT_LE(std::abs(sum / 10000), 0.03);
}

TEST(Haar, LeftInvariance) {
  // E (VU)_{00}^2 = E U_{00}^2 = 1/n for a fixed orthogonal V.
  RngStream rng(3, 0);
  Mat v(3, 3);
  v << 0.36, 0.48, -0.8, -0.8, 0.6, 0, 0.48, 0.64, 0.6;
  double a = 0.0;
  double b = 0.0;
  const int m = 20000;
  for (int k = 0; k < m; ++k) {
    const Mat u = haar_rotation(rng, 3).matrix();
    a += u(0, 0) * u(0, 0);
    b += (v * u)(0, 0) * (v * u)(0, 0);
  }
  // sd of U_00^2 is about 0.3; 3 sigma over m draws is 0.0064.
  EXPECT_NEAR(a / m, 1.0 / 3.0, 0.0064);
  EXPECT_NEAR(b / m, 1.0 / 3.0, 0.0064);
}

TEST(Haar, Deterministic) {
  EXPECT_EQ(haar_rotation(9, 4, 4).matrix(), haar_rotation(9, 4, 4).matrix());
  EXPECT_NE(haar_rotation(9, 4, 4).matrix(), haar_rotation(9, 5, 4).matrix());
}

TEST(Uniform, BoxMean) {
  RngStream rng(4, 0);
  UniformSampler sampler(ConvexBody::box(2, 1), rng);
  Vec sum = Vec::Zero(2);
  for (const auto& x : sampler.draw(10000, rng)) sum += x;
  EXPECT_LE((sum / 10000).cwiseAbs().maxCoeff(), 0.02);
}

TEST(Uniform, BallInnerDisk) {
  RngStream rng(5, 0);
  const auto ball = ConvexBody::ball(2, 1);
  UniformSampler sampler(ball, rng);
  int inner = 0;
  for (const auto& x : sampler.draw(10000, rng)) {
    EXPECT_LE(x.norm(), 1.0);
    if (x.norm() <= 0.5) ++inner;
  }
  EXPECT_NEAR(inner / 10000.0, 0.25, 0.02);
}

TEST(Uniform, HitAndRunFallback) {
  const double c = std::sqrt(0.5);
  Mat u(2, 2);
  u << c, -c, c, c;
  const auto thin = ConvexBody::rotated(Rotation::user(u), ConvexBody::box({Rational(1), Rational(1, 10000)}));
  RngStream rng(6, 0);
  UniformSampler sampler(thin, rng);
  EXPECT_TRUE(sampler.uses_hit_and_run());
  Vec sum = Vec::Zero(2);
  for (const auto& x : sampler.draw(4000, rng)) {
    EXPECT_NE(classify(thin, x).label, Label::Outside);
    sum += x;
  }
  EXPECT_LE((sum / 4000).cwiseAbs().maxCoeff(), 0.05);
}

TEST(Uniform, SamplesInside) {
  RngStream rng(7, 0);
  for (const auto& body : {cross_polytope(), counterexample_body(Rational(3), 2),
                           ConvexBody::cube_sum(ConvexBody::ball(2, Rational(1, 2)))}) {
    UniformSampler sampler(body, rng);
    for (const auto& x : sampler.draw(200, rng)) EXPECT_NE(classify(body, x).label, Label::Outside);
  }
}

TEST(MeanWidth, BallSegment) {
  const auto est = random_polytope_mean_width(ConvexBody::ball(2, 1), 1, 4000, 50, RngStream(8, 0));
  EXPECT_NEAR(est.value, (2.0 / 3.0) * (2.0 / M_PI), 3 * est.stderr);
  EXPECT_GT(est.stderr, 0.0);
  EXPECT_EQ(est.replicates, 4000);
}

TEST(MeanWidth, MonotoneInN) {
  const RngStream rng(9, 0);
  const auto box = ConvexBody::box(2, 1);
  const auto a = random_polytope_mean_width(box, 1, 2000, 20, rng);
  const auto b = random_polytope_mean_width(box, 2, 2000, 20, rng);
  const auto c = random_polytope_mean_width(box, 64, 200, 20, rng);
  EXPECT_GE(b.value + 3 * std::hypot(a.stderr, b.stderr), a.value);
  EXPECT_GT(b.value, a.value);
  // K_N sits inside K, whose averaged support is 4/pi.
  EXPECT_LT(c.value, 4.0 / M_PI);
  EXPECT_GT(c.value, 0.85 * 4.0 / M_PI);
}

TEST(MeanWidth, DirectionBudgetConsistency) {
  const RngStream rng(10, 0);
  const auto ball = ConvexBody::ball(3, 1);
  const auto a = random_polytope_mean_width(ball, 8, 500, 100, rng);
  const auto b = random_polytope_mean_width(ball, 8, 500, 200, rng);
  EXPECT_LE(std::abs(a.value - b.value), 3 * std::hypot(a.stderr, b.stderr));
}

TEST(MeanWidth, Reproducible) {
  const auto a = random_polytope_mean_width(cross_polytope(), 5, 50, 10, RngStream(11, 3));
  const auto b = random_polytope_mean_width(cross_polytope(), 5, 50, 10, RngStream(11, 3));
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.stderr, b.stderr);
}

TEST(Centroid, BoxSecondMoment) {
  EXPECT_NEAR(centroid_support_lattice(ConvexBody::box(2, 1), 2, e(2, 1), Rational(100)), std::sqrt(1.0 / 3.0),
              0.01 * std::sqrt(1.0 / 3.0));
  RngStream rng(12, 0);
  EXPECT_NEAR(centroid_support_mc(ConvexBody::box(2, 1), 2, e(2, 1), 20000, rng), std::sqrt(1.0 / 3.0), 0.01);
}

TEST(Centroid, LargePApproachesSupport) {
  const double h = centroid_support_lattice(ConvexBody::box(2, 1), 64, e(2, 1), Rational(200));
  EXPECT_LT(h, 1.0);
  EXPECT_GT(h, 0.9);
}

TEST(Centroid, BallFirstMoment) {
  const Vec theta = (Vec(2) << 0.6, -0.8).finished();
  EXPECT_NEAR(centroid_support_lattice(ConvexBody::ball(2, 1), 1, theta, Rational(200)), kBallP1, 2e-3);
  RngStream rng(13, 0);
  EXPECT_NEAR(centroid_support_mc(ConvexBody::ball(2, 1), 1, theta, 40000, rng), kBallP1, 0.01);
}

TEST(Centroid, LatticeCauchy) {
  const auto box = ConvexBody::box(2, 1);
  const double a = centroid_support_lattice(box, 2, e(2, 1), Rational(25));
  const double b = centroid_support_lattice(box, 2, e(2, 1), Rational(50));
  const double c = centroid_support_lattice(box, 2, e(2, 1), Rational(100));
  EXPECT_LT(std::abs(c - b) / c, std::abs(b - a) / b);
}

TEST(Centroid, ZeroDirection) {
  EXPECT_THROW(centroid_support_lattice(ConvexBody::box(2, 1), 1, Vec::Zero(2), Rational(4)), Error);
}

TEST(CentroidMeanWidth, BallConstant) {
  const auto est = mean_width_centroid(ConvexBody::ball(2, 1), 1, 20, 4000, 10, RngStream(14, 0));
  EXPECT_NEAR(est.value, kBallP1, 3 * est.stderr + 1e-3);
}

TEST(CentroidMeanWidth, BoxBetweenAxisAndDiagonal) {
  const auto est = mean_width_centroid(ConvexBody::box(2, 1), 2, 50, 4000, 10, RngStream(15, 0));
  const double axis = std::sqrt(1.0 / 3.0);
  const double diagonal = std::sqrt(1.0 / 3.0);  // Var((x+y)/sqrt2) = 1/3 too
  EXPECT_GE(est.value, std::min(axis, diagonal) - 0.02);
  EXPECT_LE(est.value, std::max(axis, diagonal) + 0.02);
  const auto again = mean_width_centroid(ConvexBody::box(2, 1), 2, 50, 4000, 10, RngStream(15, 0));
  EXPECT_EQ(est.value, again.value);
}

TEST(CentroidMeanWidth, ZeroBudget) {
  EXPECT_THROW(mean_width_centroid(ConvexBody::box(2, 1), 2, 0, 10, 1, RngStream(1, 1)), Error);
}

TEST(FloatingBody, BoxQuarter) {
  RngStream rng(16, 0);
  EXPECT_NEAR(floating_body_support(ConvexBody::box(2, 1), 0.25, e(2, 1), 100000, rng), 0.75, 0.02);
}

TEST(FloatingBody, Collapse) {
  RngStream rng(17, 0);
  EXPECT_LT(floating_body_support(ConvexBody::box(2, 1), 0.999, e(2, 1), 20000, rng), 0.01);
}

TEST(FloatingBody, BallMedian) {
  // Oracle: P(|X_2| >= t) = (2/pi)(pi/2 - t sqrt(1 - t^2) - asin t), solved by bisection.
  double lo = 0.0;
  double hi = 1.0;
  for (int k = 0; k < 100; ++k) {
    const double t = 0.5 * (lo + hi);
    const double tail = (2.0 / M_PI) * (M_PI / 2 - t * std::sqrt(1 - t * t) - std::asin(t));
    (tail >= 0.5 ? lo : hi) = t;
  }
  RngStream rng(18, 0);
  EXPECT_NEAR(floating_body_support(ConvexBody::ball(2, 1), 0.5, e(2, 1), 100000, rng), lo, 0.01);
}

TEST(FloatingBody, SandwichBand) {
  RngStream rng(19, 0);
  for (const auto& body : {ConvexBody::ball(2, 1), ConvexBody::box(2, 1), cross_polytope()}) {
    UniformSampler sampler(body, rng);
    const auto points = sampler.draw(20000, rng);
    for (double delta : {1.0 / 8, 1.0 / 32}) {
      for (int k = 0; k < 4; ++k) {
        const Vec theta = rng.direction(2);
        const double ratio = floating_body_from_samples(points, delta, theta) /
                             centroid_support_from_samples(points, std::log(1 / delta), theta);
        EXPECT_GE(ratio, 0.05);
        EXPECT_LE(ratio, 20.0);
      }
    }
  }
}

TEST(ContinuousMoment, ClosedForms) {
  EXPECT_NEAR(continuous_moment_root(ConvexBody::box(2, 1), 2), std::sqrt(1.0 / 3.0), 1e-14);
  EXPECT_NEAR(continuous_moment_root(ConvexBody::ball(2, 1), 1), kBallP1, 1e-14);
  // E x_3^2 = R^2 / 5 on the 3-ball.
  EXPECT_NEAR(continuous_moment_root(ConvexBody::ball(3, 2), 2), 2 * std::sqrt(1.0 / 5.0), 1e-14);
  EXPECT_THROW(continuous_moment_root(cross_polytope(), 1), Error);
  RngStream rng(20, 0);
  EXPECT_NEAR(continuous_moment_root(ConvexBody::ball(3, 1), 3),
              centroid_support_mc(ConvexBody::ball(3, 1), 3, e(3, 2), 40000, rng), 0.01);
}
