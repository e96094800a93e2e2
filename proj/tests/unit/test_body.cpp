#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "latticeborell/body.hpp"
#include "latticeborell/error.hpp"
#include "latticeborell/lattice.hpp"

using namespace latticeborell;

namespace {

Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }

Mat random_orthogonal(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Mat a(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a(i, j) = g(rng);
  }
  Eigen::HouseholderQR<Mat> qr(a);
  Mat q = qr.householderQ();
  Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j) {
    if (r(j, j) < 0) q.col(j) *= -1.0;
  }
  return q;
}

ConvexBody cross_polytope() {
  return ConvexBody::vpolytope({{1, 0}, {-1, 0}, {0, 1}, {0, -1}});
}

}  // namespace

TEST(Support, WorkedExamples) {
  EXPECT_DOUBLE_EQ(support(ConvexBody::box(2, 2), v2(1, 0)), 2.0);
  EXPECT_DOUBLE_EQ(support(ConvexBody::ball(2, 1), v2(0.6, 0.8)), 1.0);
  EXPECT_NEAR(support(cross_polytope(), v2(1 / std::sqrt(2.0), 1 / std::sqrt(2.0))), 1 / std::sqrt(2.0), 1e-15);
}

TEST(Support, Compositional) {
  const auto box = ConvexBody::box({Rational(1), Rational(3)});
  const Vec theta = v2(0.3, -0.7);
  EXPECT_NEAR(support(ConvexBody::scaled(Rational(5, 2), box), theta), 2.5 * support(box, theta), 1e-12);
  EXPECT_NEAR(support(ConvexBody::cube_sum(box), theta), support(box, theta) + 1.0, 1e-12);
  std::mt19937_64 rng(7);
  const Mat u = random_orthogonal(2, rng);
  EXPECT_NEAR(support(ConvexBody::rotated(Rotation::user(u), box), theta), support(box, u.transpose() * theta), 1e-12);
  const auto h = ConvexBody::hpolytope({{1, 0}, {-1, 0}, {0, 1}, {0, -1}}, {1, 1, 3, 3});
  EXPECT_NEAR(support(h, theta), support(box, theta), 1e-9);
  const auto comb = ConvexBody::combination(Rational(1, 4), box, ConvexBody::ball(2, 2), true);
  EXPECT_NEAR(support(comb, theta), 0.75 * support(box, theta) + 0.25 * 2 * theta.norm() + 1.0, 1e-12);
}

TEST(Support, ZeroDirection) {
  try {
    support(ConvexBody::box(2, 1), v2(0, 0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ZeroDirection);
  }
}

TEST(Support, Sublinear) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  const std::vector<ConvexBody> bodies = {ConvexBody::box(2, 2), ConvexBody::ball(2, 1), cross_polytope(),
                                          counterexample_body(Rational(3), 2),
                                          ConvexBody::cube_sum(ConvexBody::ball(2, Rational(1, 2)))};
  for (const auto& body : bodies) {
    for (int k = 0; k < 100; ++k) {
      const Vec a = v2(g(rng), g(rng));
      const Vec b = v2(g(rng), g(rng));
      EXPECT_LE(support(body, a + b), support(body, a) + support(body, b) + 1e-9);
    }
  }
}

TEST(Classify, WorkedExamples) {
  const auto box = ConvexBody::box(2, 2);
  EXPECT_EQ(classify(box, IntPoint{1, 1}).label, Label::Inside);
  EXPECT_EQ(classify(box, IntPoint{3, 0}).label, Label::Outside);
  const auto edge = classify(box, IntPoint{2, 0});
  EXPECT_EQ(edge.label, Label::Inside);
  EXPECT_TRUE(edge.exact);
  EXPECT_EQ(edge.margin, 0.0);
}

TEST(Classify, OpenCube) {
  const auto cube = ConvexBody::cube_sum(ConvexBody::origin(2));
  EXPECT_TRUE(cube.is_open());
  EXPECT_EQ(classify(cube, IntPoint{0, 0}).label, Label::Inside);
  EXPECT_EQ(classify(cube, IntPoint{1, 0}).label, Label::Outside);
  EXPECT_EQ(classify(cube, v2(0.5, -0.5)).label, Label::Inside);
  EXPECT_EQ(classify(cube, v2(1.0, 0.0)).label, Label::BoundaryAmbiguous);
}

TEST(Classify, FloatPathAmbiguity) {
  std::mt19937_64 rng(3);
  const auto body = ConvexBody::rotated(Rotation::user(random_orthogonal(2, rng)), ConvexBody::box(2, 1));
  const Mat& u = std::get<RotatedData>(body.node().data).rotation.matrix();
  const auto c = classify(body, Vec(u * v2(1, 0.3)));
  EXPECT_EQ(c.label, Label::BoundaryAmbiguous);
  EXPECT_FALSE(c.exact);
}

TEST(Classify, RotationConsistency) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3, 3);
  const std::vector<ConvexBody> bodies = {ConvexBody::box({Rational(2), Rational(1, 2)}), cross_polytope(),
                                          counterexample_body(Rational(2), 2)};
  int checked = 0;
  for (int k = 0; k < 100; ++k) {
    const Mat m = random_orthogonal(2, rng);
    const auto& base = bodies[static_cast<std::size_t>(k) % bodies.size()];
    const auto rotated = ConvexBody::rotated(Rotation::user(m), base);
    const Vec x = v2(u(rng), u(rng));
    const auto a = classify(base, x);
    const auto b = classify(rotated, Vec(m * x));
    if (a.label == Label::BoundaryAmbiguous || b.label == Label::BoundaryAmbiguous) continue;
    EXPECT_EQ(a.label, b.label);
    ++checked;
  }
  EXPECT_GT(checked, 90);
}

TEST(Classify, SignedPermutationStaysExact) {
  const auto base = ConvexBody::box({Rational(2), Rational(1, 2)});
  const auto r = ConvexBody::rotated(Rotation::signed_permutation({1, 0}, {1, -1}), base);
  EXPECT_TRUE(r.exact_membership());
  // U e_0 = e_1, U e_1 = -e_0: the long side moves to axis 1.
  EXPECT_EQ(classify(r, IntPoint{0, 2}).label, Label::Inside);
  EXPECT_EQ(classify(r, IntPoint{2, 0}).label, Label::Outside);
  EXPECT_TRUE(classify(r, IntPoint{0, 2}).exact);
}

TEST(LinfDistance, WorkedExamples) {
  EXPECT_DOUBLE_EQ(linf_distance(ConvexBody::box(2, 1), v2(3, 0)), 2.0);
  EXPECT_DOUBLE_EQ(linf_distance(ConvexBody::box(2, 1), v2(0, 0)), 0.0);
  EXPECT_NEAR(linf_distance(ConvexBody::ball(2, 1), v2(2, 2)), 2.0 - 1.0 / std::sqrt(2.0), 1e-12);
}

TEST(LinfDistance, BallAgainstDenseGrid) {
  // Oracle: minimize over a fine polar grid of the disk boundary.
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-4, 4);
  const auto ball = ConvexBody::ball(2, Rational(3, 2));
  for (int k = 0; k < 20; ++k) {
    const Vec x = v2(u(rng), u(rng));
    double best = x.norm() <= 1.5 ? 0.0 : 1e300;
    for (int s = 0; s < 200000 && best > 0; ++s) {
      const double a = 2 * M_PI * s / 200000.0;
      best = std::min(best, (x - 1.5 * v2(std::cos(a), std::sin(a))).cwiseAbs().maxCoeff());
    }
    EXPECT_NEAR(linf_distance(ball, x), best, 1e-4);
  }
}

TEST(LinfDistance, LpAgreesWithClosedForm) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-5, 5);
  const auto box = ConvexBody::box({Rational(1), Rational(5, 2), Rational(1, 3)});
  const auto ball = ConvexBody::ball(3, Rational(2));
  const auto origin = ConvexBody::origin(3);
  // Combination with mu = 0 forces the LP route.
  const auto box_lp = ConvexBody::combination(Rational(0), box, origin, false);
  const auto ball_lp = ConvexBody::combination(Rational(0), ball, origin, false);
  const auto box_h = ConvexBody::hpolytope({{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}},
                                           {1, 1, Rational(5, 2), Rational(5, 2), Rational(1, 3), Rational(1, 3)});
  for (int k = 0; k < 100; ++k) {
    const Vec x = (Vec(3) << u(rng), u(rng), u(rng)).finished();
    EXPECT_NEAR(linf_distance(box_lp, x), linf_distance(box, x), 1e-8);
    EXPECT_NEAR(linf_distance(box_h, x), linf_distance(box, x), 1e-8);
    EXPECT_NEAR(linf_distance(ball_lp, x), linf_distance(ball, x), 1e-8);
  }
}

TEST(LinfDistance, ZeroIffInsideClosed) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-3, 3);
  const std::vector<ConvexBody> bodies = {ConvexBody::box(2, 1), ConvexBody::ball(2, 2), cross_polytope(),
                                          ConvexBody::combination(Rational(1, 3), cross_polytope(),
                                                                  ConvexBody::ball(2, 1), false)};
  for (const auto& body : bodies) {
    for (int k = 0; k < 50; ++k) {
      const Vec x = v2(u(rng), u(rng));
      const auto c = classify(body, x);
      const double d = linf_distance(body, x);
      if (c.label == Label::Outside) {
        EXPECT_GT(d, 0.0);
      } else {
        EXPECT_LE(d, 1e-9);
      }
    }
  }
}

TEST(LinfDistance, ExactPath) {
  EXPECT_EQ(linf_distance_exact(ConvexBody::box(2, 1), IntPoint{3, 0}), Rational(2));
  EXPECT_EQ(linf_distance_exact(cross_polytope(), IntPoint{2, 2}), Rational(3, 2));
  EXPECT_THROW(linf_distance_exact(ConvexBody::ball(2, 1), IntPoint{2, 2}), Error);
}

TEST(Radii, WorkedExamples) {
  const auto b = radii(ConvexBody::box(2, 2));
  EXPECT_DOUBLE_EQ(b.inner, 2.0);
  EXPECT_NEAR(b.outer, 2 * std::sqrt(2.0), 1e-15);
  const auto ball = radii(ConvexBody::ball(2, 3));
  EXPECT_DOUBLE_EQ(ball.inner, 3.0);
  EXPECT_DOUBLE_EQ(ball.outer, 3.0);
  const auto cross = radii(cross_polytope());
  EXPECT_NEAR(cross.inner, 1 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(cross.outer, 1.0, 1e-12);
  EXPECT_TRUE(cross.exact);
}

TEST(Radii, HPolytopeAndBounds) {
  const auto h = ConvexBody::hpolytope({{1, 1}, {1, -1}, {-1, 1}, {-1, -1}}, {1, 1, 1, 1});
  const auto r = radii(h);
  EXPECT_NEAR(r.inner, 1 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(r.outer, 1.0, 1e-12);
  const auto cs = radii(ConvexBody::cube_sum(ConvexBody::ball(2, 1)));
  EXPECT_LE(cs.inner, 2.0);
  EXPECT_GE(cs.outer, 1.0 + std::sqrt(2.0) - 1e-12);
  const auto cx = counterexample_body(Rational(3), 2);
  const auto rc = radii(cx);
  EXPECT_LE(rc.inner, rc.outer);
  const auto& verts = std::get<VPolytopeData>(cx.node().data).vertices_d;
  for (Eigen::Index j = 0; j < verts.cols(); ++j) EXPECT_LE(verts.col(j).norm(), rc.outer + 1e-12);
}

TEST(Radii, OriginOutside) {
  const auto shifted = ConvexBody::vpolytope({{1, 1}, {2, 1}, {1, 2}});
  EXPECT_FALSE(shifted.contains_origin());
  try {
    radii(shifted);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::OriginOutside);
  }
}

TEST(Counterexample, Vertices) {
  const auto k = counterexample_body(Rational(2), 2);
  const auto& v = std::get<VPolytopeData>(k.node().data).vertices;
  ASSERT_EQ(v.size(), 3u);
  EXPECT_EQ(v[0], (RVec{Rational(-2), Rational(-1, 2)}));
  EXPECT_EQ(v[1], (RVec{Rational(2), Rational(-1, 2)}));
  EXPECT_EQ(v[2], (RVec{Rational(0), Rational(1)}));
  EXPECT_TRUE(k.origin_interior());
  EXPECT_EQ(std::get<VPolytopeData>(counterexample_body(Rational(1), 3).node().data).vertices.size(), 5u);
}

TEST(OriginFlags, Composites) {
  const auto shifted = ConvexBody::vpolytope({{Rational(1, 2), 0}, {1, 0}, {1, 1}});
  EXPECT_FALSE(shifted.contains_origin());
  EXPECT_TRUE(ConvexBody::cube_sum(shifted).contains_origin());
  const auto far = ConvexBody::vpolytope({{3, 0}, {4, 0}, {4, 1}});
  EXPECT_TRUE(ConvexBody::combination(Rational(1, 2), cross_polytope(), shifted, false).contains_origin());
  EXPECT_FALSE(ConvexBody::combination(Rational(1, 2), cross_polytope(), far, false).contains_origin());
  EXPECT_FALSE(ConvexBody::combination(Rational(1, 2), cross_polytope(), far, true).contains_origin());
  const auto segment = ConvexBody::vpolytope({{0, 0}, {1, 0}});
  EXPECT_TRUE(segment.contains_origin());
  EXPECT_FALSE(segment.origin_interior());
}

TEST(Volume, Atoms) {
  EXPECT_NEAR(volume(ConvexBody::ball(2, 2)), 4 * M_PI, 1e-12);
  EXPECT_NEAR(volume(ConvexBody::ball(3, 1)), 4 * M_PI / 3, 1e-12);
  EXPECT_DOUBLE_EQ(volume(ConvexBody::box({Rational(1), Rational(3, 2)})), 6.0);
  EXPECT_THROW(volume(cross_polytope()), Error);
}

TEST(Volume, Parallel) {
  EXPECT_NEAR(parallel_volume(ConvexBody::ball(2, 2), 1), 9 * M_PI, 1e-12);
  // 2D box: area + perimeter * eps + pi eps^2.
  EXPECT_NEAR(parallel_volume(ConvexBody::box({Rational(1), Rational(2)}), 0.5), 8 + 12 * 0.5 + M_PI / 4, 1e-12);
  // 3D unit cube [-1/2,1/2]^3: 1 + 6 eps + 3 pi eps^2 + 4/3 pi eps^3.
  const double eps = 0.3;
  EXPECT_NEAR(parallel_volume(ConvexBody::box(3, Rational(1, 2)), eps),
              1 + 6 * eps + 3 * M_PI * eps * eps + 4 * M_PI * eps * eps * eps / 3, 1e-12);
  EXPECT_NEAR(parallel_volume(ConvexBody::box(2, 1), 0), volume(ConvexBody::box(2, 1)), 1e-12);
}

TEST(Describe, StableAndDistinct) {
  EXPECT_EQ(describe(ConvexBody::box(2, 2)), "box[2,2]");
  EXPECT_EQ(describe(ConvexBody::scaled(Rational(3), ConvexBody::ball(2, Rational(1, 2)))), "ball[2;3/2]");
  EXPECT_NE(fingerprint(ConvexBody::box(2, 2)), fingerprint(ConvexBody::box(2, 3)));
}

TEST(Combination, PolytopePlusBallSurvivesManyCuts) {
  // Rounding used to stall phase 1 after a long run of ball cuts.
  const auto k = ConvexBody::vpolytope({{Rational(1, 2), Rational(1, 2)},
                                        {Rational(1, 2), Rational(1)},
                                        {Rational(0), Rational(5, 2)},
                                        {Rational(5, 2), Rational(3, 2)}});
  const auto l = ConvexBody::ball(2, Rational(9, 4));
  EXPECT_NO_THROW({
    const auto combo = ConvexBody::combination(Rational(1, 2), k, l, false);
    EXPECT_GT(enumerate(combo).count, 0);
  });
}
