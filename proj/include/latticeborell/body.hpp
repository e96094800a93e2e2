#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "latticeborell/rational.hpp"

namespace latticeborell {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using RVec = std::vector<Rational>;
using IntPoint = std::vector<std::int64_t>;

enum class RotationKind { Identity, SignedPermutation, Haar, User };

/// An orthogonal n x n matrix together with where it came from. Identity and
/// signed permutations map Z^n onto itself and keep rational paths exact.
class Rotation {
 public:
  static Rotation identity(int n);
  /// Column j of U is signs[j] * e_{perm[j]}.
  static Rotation signed_permutation(std::vector<int> perm, std::vector<int> signs);
  static Rotation haar(Mat matrix, std::uint64_t seed, std::uint64_t stream);
  static Rotation user(Mat matrix);

  int dim() const { return static_cast<int>(matrix_.rows()); }
  const Mat& matrix() const { return matrix_; }
  RotationKind kind() const { return kind_; }
  bool lattice_preserving() const { return kind_ == RotationKind::Identity || kind_ == RotationKind::SignedPermutation; }
  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }
  const std::vector<int>& permutation() const { return perm_; }
  const std::vector<int>& signs() const { return signs_; }

  /// Largest entry of |U^T U - I|.
  double orthogonality_defect() const;

 private:
  Rotation(Mat matrix, RotationKind kind) : matrix_(std::move(matrix)), kind_(kind) {}

  Mat matrix_;
  RotationKind kind_;
  std::vector<int> perm_;
  std::vector<int> signs_;
  std::uint64_t seed_ = 0;
  std::uint64_t stream_ = 0;
};

struct BodyNode;

struct Radii {
  double inner;  // r with r B_2^n inside K
  double outer;  // R with K inside R B_2^n
  bool exact;
};


/// Immutable convex body. Copies share the underlying description.
class ConvexBody {
 public:
  static ConvexBody box(RVec halfwidths);
  static ConvexBody box(int n, const Rational& halfwidth);
  static ConvexBody ball(int n, const Rational& radius);
  /// { y : A y <= b }, rows of A given as vectors.
  static ConvexBody hpolytope(std::vector<RVec> a, RVec b);
  static ConvexBody vpolytope(std::vector<RVec> vertices);
  /// The single point {0}.
  static ConvexBody origin(int n);
  static ConvexBody rotated(Rotation rotation, ConvexBody base);
  static ConvexBody scaled(const Rational& factor, ConvexBody base);
  /// base + C_n with C_n the open cube (-1,1)^n.
  static ConvexBody cube_sum(ConvexBody base);
  /// (1 - mu) K + mu L, optionally + C_n.
  static ConvexBody combination(const Rational& mu, ConvexBody k, ConvexBody l, bool plus_cube);

  int dim() const;
  bool contains_origin() const;
  bool origin_interior() const;
  /// CubeSum, and Combination with plus_cube, are open; everything else is closed.
  bool is_open() const;
  /// True when no irrational rotation or Euclidean ball enters an LP path,
  /// so integer queries are decided in exact arithmetic.
  bool exact_membership() const;
  std::string variant_name() const;

  const BodyNode& node() const { return *node_; }

 private:
  explicit ConvexBody(std::shared_ptr<const BodyNode> node) : node_(std::move(node)) {}
  /// Fills the derived flags and cached radii of a freshly built node.
  static ConvexBody finish(BodyNode node);
  std::shared_ptr<const BodyNode> node_;
};

struct HPolytopeData {
  std::vector<RVec> a;
  RVec b;
  Mat a_d;
  Vec b_d;
};

struct VPolytopeData {
  std::vector<RVec> vertices;
  Mat vertices_d;  // one vertex per column
};

struct BallData {
  Rational radius;
  double radius_d;
};

struct BoxData {
  RVec halfwidths;
  Vec halfwidths_d;
};

struct RotatedData {
  Rotation rotation;
  ConvexBody base;
};

struct ScaledData {
  Rational factor;
  double factor_d;
  ConvexBody base;
};

struct CubeSumData {
  ConvexBody base;
};

struct CombinationData {
  Rational mu;
  ConvexBody first;
  ConvexBody second;
  bool plus_cube;
};

struct BodyNode {
  int n;
  bool contains_origin = false;
  bool origin_interior = false;
  bool open = false;
  /// Integer queries can be decided in Rational arithmetic.
  bool exact_membership = false;
  /// The whole body embeds in the exact LP model.
  bool lp_exact = false;
  /// l_inf distances to the body are computable exactly.
  bool exact_distance = false;
  /// Unset when the origin is outside K.
  std::optional<Radii> radii;
  std::variant<HPolytopeData, VPolytopeData, BallData, BoxData, RotatedData, ScaledData, CubeSumData,
               CombinationData>
      data;
};

enum class Label { Inside, Outside, BoundaryAmbiguous };

std::string to_string(Label label);

struct Classification {
  Label label;
  /// Signed depth: positive inside, negative outside.
  double margin;
  /// Decided in exact arithmetic (never BoundaryAmbiguous).
  bool exact;
};

inline constexpr double kDefaultTolerance = 1e-9;

/// Canonical one-line description, e.g. "cubesum(box[2,2])". Equal bodies
/// built the same way describe identically.
std::string describe(const ConvexBody& body);
/// FNV-1a 64 of describe(body).
std::uint64_t fingerprint(const ConvexBody& body);

/// h_K(theta) = sup over K of <x, theta>.
double support(const ConvexBody& body, const Vec& theta);

Classification classify(const ConvexBody& body, const Vec& x, double tol = kDefaultTolerance);
/// Integer queries take the exact path whenever the body allows it.
Classification classify(const ConvexBody& body, const IntPoint& x, double tol = kDefaultTolerance);

/// min over y in K of ||x - y||_inf (closure of K for open variants).
double linf_distance(const ConvexBody& body, const Vec& x);
/// Exact l_inf distance; throws Unsupported unless exact_membership().
Rational linf_distance_exact(const ConvexBody& body, const IntPoint& x);

/// Throws OriginOutside when 0 is not in K.
Radii radii(const ConvexBody& body);

/// Lebesgue volume; Ball and Box (and rotations or dilations of them) only.
double volume(const ConvexBody& body);
/// |K + eps B_2^n| by the Steiner formula; same variants as volume().
double parallel_volume(const ConvexBody& body, double eps);

/// conv({(x, -1/2) : ||x||_inf <= lambda} U {e_n}).
ConvexBody counterexample_body(const Rational& lambda, int n);

/// Volume of the Euclidean unit ball in dimension n.
double unit_ball_volume(int n);

}  // namespace latticeborell
