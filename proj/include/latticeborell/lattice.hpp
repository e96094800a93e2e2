#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "latticeborell/body.hpp"

namespace latticeborell {

struct LatticePointSet {
  /// Sorted lexicographically.
  std::vector<IntPoint> points;
  std::int64_t count = 0;
  /// BoundaryAmbiguous classifications met during the sweep.
  std::int64_t ambiguous_count = 0;
  std::uint64_t body_fingerprint = 0;
};

struct EnumerateOptions {
  double tol = kDefaultTolerance;
  /// Largest admissible number of bounding-box cells.
  double budget = 1e8;
};

/// K intersected with Z^n. Ambiguous points count as Inside for closed bodies
/// and Outside for open ones.
LatticePointSet enumerate(const ConvexBody& body, const EnumerateOptions& options = {});

/// Integer bounding box [lo_i, hi_i] of K from its support function.
std::vector<std::pair<std::int64_t, std::int64_t>> lattice_bounding_box(const ConvexBody& body);

/// Law of |<X, e_axis>| for X uniform on a lattice point set.
struct ProjectionDistribution {
  std::vector<std::int64_t> values;  // strictly increasing, nonnegative
  std::vector<std::int64_t> counts;  // positive
  std::int64_t total = 0;
  std::vector<double> cdf;

  std::int64_t max_value() const { return values.empty() ? 0 : values.back(); }
  Rational cdf_exact(std::size_t j) const;
};

/// Projection onto e_axis; axis defaults to the last coordinate.
ProjectionDistribution project(const LatticePointSet& set, int axis = -1);
ProjectionDistribution make_distribution(std::vector<std::int64_t> values, std::vector<std::int64_t> counts);

struct Moment {
  double raw;
  double root;
};

/// E|<X,e_n>|^p and its p-th root, p >= 1.
Moment moment(const ProjectionDistribution& dist, double p);
/// E|<X,e_n>|^p exactly for integer p.
Rational moment_raw_exact(const ProjectionDistribution& dist, unsigned p);
/// The p-th root moment at 100 decimal digits.
HighFloat moment_root_precise(const ProjectionDistribution& dist, const HighFloat& p);

/// Average of max_i |<x_i, e_n>| over all N-tuples of the cloud.
double expected_max(const ProjectionDistribution& dist, std::int64_t n);
Rational expected_max_exact(const ProjectionDistribution& dist, unsigned n);

/// P(|<X,e_n>| >= t).
double tail(const ProjectionDistribution& dist, double t);
Rational tail_exact(const ProjectionDistribution& dist, const Rational& t);

/// One integer vector per row.
std::string points_to_csv(const LatticePointSet& set);
nlohmann::json distribution_to_json(const ProjectionDistribution& dist);
ProjectionDistribution distribution_from_json(const nlohmann::json& j);

}  // namespace latticeborell
