#include <cstdio>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "latticeborell/error.hpp"
#include "latticeborell/harness.hpp"

using namespace latticeborell;

int main(int argc, char** argv) {
  CLI::App app{"Discrete Borell and lattice moment experiments"};
  std::string experiment;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  int threads = 1;
  app.add_option("experiment", experiment,
                 "enumerate | borell | cq | brunn-minkowski | meanwidth | convergence | counterexample | shell-bound")
      ->required();
  app.add_option("--config", config_path, "JSON config file")->required();
  app.add_option("--seed", seed, "overrides the config seed");
  app.add_option("--out", out, "report path (default: config output, else stdout)");
  app.add_option("--threads", threads, "worker threads; results do not depend on it")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  try {
    auto cfg = load_config(config_path);
    if (!cfg.experiment.empty() && cfg.experiment != experiment) {
      throw Error(ErrorKind::InvalidArgument,
                  fmt::format("config is for '{}', not '{}'", cfg.experiment, experiment));
    }
    cfg.experiment = experiment;
    if (seed) cfg.seed = *seed;
    if (!out.empty()) cfg.output = out;
    const auto result = run_experiment(cfg, threads);
    emit_report(result.rows, parse_format(cfg.format), cfg.output);
    for (const auto& failure : result.failures) fmt::print(stderr, "check failed: {}\n", failure);
    return result.pass ? 0 : 1;
  } catch (const Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  }
}
