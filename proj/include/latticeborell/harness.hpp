#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "latticeborell/body.hpp"
#include "latticeborell/borell.hpp"
#include "latticeborell/sampling.hpp"

namespace latticeborell {

/// One report row; keys keep insertion order.
using Row = nlohmann::ordered_json;

struct BodyPair {
  ConvexBody k;
  ConvexBody l;
  Rational lambda;
};

struct ExperimentConfig {
  std::string experiment;
  std::vector<ConvexBody> bodies;
  std::vector<Rational> lambda;
  std::vector<double> p;
  std::vector<double> q;
  std::vector<std::int64_t> n_points;
  std::vector<double> t;
  std::vector<Rational> union_a{Rational(2), Rational(4), Rational(8)};
  std::vector<unsigned> union_q{1, 2, 3};
  std::vector<unsigned> union_n{2, 8, 32};
  std::vector<BodyPair> pairs;

  std::int64_t rotations = 64;
  std::int64_t point_samples = 10000;
  std::int64_t direction_samples = 1000;
  std::int64_t replicates = 8;
  int grid_size = 5;
  std::int64_t trials = 0;
  int dimension = 2;

  std::uint64_t seed = 1;
  std::string output;
  std::string format = "jsonl";
  double tolerance = kDefaultTolerance;
  double budget = 1e8;

  double c_ref = kCRef;
  double c_ref_upper = kCRefUpper;
  double c_ref_lower = kCRefLower;
  double c = 2 * kCRef;
  /// meanwidth: sandwich, upper or lower.
  std::string mode = "sandwich";
  bool identity_only = false;
  double band_low = 0.05;
  double band_high = 20.0;
  /// convergence: assert the last C_0 gap is below this and the gaps shrink.
  std::optional<double> assert_gap;
  /// Count error rows as failed checks.
  bool fail_on_error = false;
};

Rational rational_from_json(const nlohmann::json& j);
ConvexBody body_from_json(const nlohmann::json& j);
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

/// Box, ball or V-polytope with small rational data.
ConvexBody random_rational_body(RngStream& rng, int n);

struct RunResult {
  std::vector<Row> rows;
  bool pass = true;
  std::vector<std::string> failures;
};

RunResult run_experiment(const ExperimentConfig& cfg, int threads = 1);
RunResult run_enumerate(const ExperimentConfig& cfg, int threads = 1);
RunResult run_borell(const ExperimentConfig& cfg, int threads = 1);
RunResult run_cq(const ExperimentConfig& cfg, int threads = 1);
RunResult run_brunn_minkowski(const ExperimentConfig& cfg, int threads = 1);
RunResult run_meanwidth_sweep(const ExperimentConfig& cfg, int threads = 1);
RunResult run_convergence(const ExperimentConfig& cfg, int threads = 1);
RunResult run_counterexample(const ExperimentConfig& cfg, int threads = 1);
RunResult run_shell_bound(const ExperimentConfig& cfg, int threads = 1);

enum class ReportFormat { JsonLines, Csv };

ReportFormat parse_format(const std::string& name);
/// Floats are printed with 12 significant digits.
std::string format_report(const std::vector<Row>& rows, ReportFormat format);
/// Writes to `path`, or stdout when it is empty.
void emit_report(const std::vector<Row>& rows, ReportFormat format, const std::string& path);
std::vector<Row> parse_json_lines(const std::string& text);

}  // namespace latticeborell
