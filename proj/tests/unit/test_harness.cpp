#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "latticeborell/error.hpp"
#include "latticeborell/harness.hpp"

using namespace latticeborell;
using nlohmann::json;

namespace {

ExperimentConfig config(const std::string& text) { return parse_config(json::parse(text)); }

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST(BodyJson, Variants) {
  EXPECT_EQ(describe(body_from_json(json::parse(R"({"type":"box","n":2,"halfwidth":"3/2"})"))), "box[3/2,3/2]");
  EXPECT_EQ(describe(body_from_json(json::parse(R"({"type":"box","halfwidths":[1, 0.25]})"))), "box[1,1/4]");
  EXPECT_EQ(describe(body_from_json(json::parse(R"({"type":"ball","n":3,"radius":2})"))), "ball[3;2]");
  EXPECT_EQ(enumerate(body_from_json(json::parse(R"({"type":"cross","n":2,"radius":2})"))).count, 13);
  EXPECT_EQ(enumerate(body_from_json(json::parse(
                          R"({"type":"hpolytope","a":[[1,0],[-1,0],[0,1],[0,-1]],"b":[1,1,1,1]})")))
                .count,
            9);
  const auto counter = body_from_json(json::parse(R"({"type":"counterexample","lambda":4,"n":2})"));
  EXPECT_EQ(describe(counter), describe(counterexample_body(Rational(4), 2)));
  const auto rotated = body_from_json(json::parse(
      R"({"type":"rotated","rotation":{"kind":"signed_permutation","perm":[1,0],"signs":[1,-1]},
          "base":{"type":"box","halfwidths":[1,2]}})"));
  EXPECT_EQ(enumerate(rotated).count, 15);
  const auto haar = body_from_json(json::parse(
      R"({"type":"rotated","rotation":{"kind":"haar","seed":3,"index":1},"base":{"type":"box","n":2,"halfwidth":2}})"));
  EXPECT_GE(enumerate(haar).count, 9);
  EXPECT_EQ(enumerate(body_from_json(json::parse(
                          R"({"type":"cubesum","base":{"type":"vpolytope","vertices":[[0,0]]}})")))
                .count,
            1);
  const auto combo = body_from_json(json::parse(
      R"({"type":"combination","mu":"1/2","first":{"type":"box","n":2,"halfwidth":"1/2"},
          "second":{"type":"vpolytope","vertices":[[0,0]]},"plus_cube":true})"));
  EXPECT_EQ(enumerate(combo).count, 9);
  EXPECT_EQ(describe(body_from_json(json::parse(R"({"type":"scaled","factor":3,"base":{"type":"ball","n":2,"radius":"1/2"}})"))),
            "ball[2;3/2]");
}

TEST(BodyJson, Errors) {
  EXPECT_THROW(body_from_json(json::parse(R"({"type":"blob"})")), Error);
  EXPECT_THROW(body_from_json(json::parse(R"({"type":"ball","n":2})")), Error);
  EXPECT_THROW(rational_from_json(json::parse("true")), Error);
}

TEST(Config, Defaults) {
  const auto cfg = config(R"({"experiment":"borell","body":{"type":"box","n":2,"halfwidth":2}})");
  EXPECT_EQ(cfg.rotations, 64);
  EXPECT_EQ(cfg.c, 32.0);
  EXPECT_EQ(cfg.bodies.size(), 1u);
  EXPECT_EQ(cfg.union_a.size(), 3u);
}

TEST(Config, Validation) {
  EXPECT_THROW(config(R"({"lambda":[4,2]})"), Error);
  EXPECT_THROW(config(R"({"point_samples":0})"), Error);
  EXPECT_THROW(config(R"({"format":"xml"})"), Error);
  EXPECT_THROW(config(R"({"rotations":"many"})"), Error);
  EXPECT_NO_THROW(config(R"({"lambda":[4,4,8]})"));
  EXPECT_THROW(load_config("/nonexistent/config.json"), Error);
}

TEST(Report, CsvShape) {
  std::vector<Row> rows;
  for (int i = 0; i < 3; ++i) {
    Row r;
    r["row"] = i;
    r["value"] = 0.1 * i;
    r["name"] = i == 1 ? "a,b" : "x";
    rows.push_back(r);
  }
  const auto csv = format_report(rows, ReportFormat::Csv);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "row,value,name");
  EXPECT_NE(csv.find("\"a,b\""), std::string::npos);
}

TEST(Report, TwelveDigits) {
  Row r;
  r["x"] = 1.0 / 3.0;
  r["y"] = 2.0;
  EXPECT_EQ(format_report({r}, ReportFormat::JsonLines), "{\"x\":0.333333333333,\"y\":2}\n");
}

TEST(Report, JsonLinesRoundTrip) {
  const auto cfg = config(R"({"experiment":"counterexample","lambda":[4,16],"dimension":2})");
  const auto text = format_report(run_experiment(cfg).rows, ReportFormat::JsonLines);
  EXPECT_EQ(format_report(parse_json_lines(text), ReportFormat::JsonLines), text);
}

TEST(Report, EmitToFile) {
  const std::string path = ::testing::TempDir() + "lb_report.csv";
  Row r;
  r["a"] = 1;
  emit_report({r}, ReportFormat::Csv, path);
  EXPECT_EQ(slurp(path), "a\n1\n");
  std::remove(path.c_str());
  EXPECT_THROW(emit_report({}, ReportFormat::Csv, path), Error);
  EXPECT_THROW(emit_report({r}, ReportFormat::Csv, "/nonexistent/dir/x.csv"), Error);
}

TEST(Experiments, ConvergenceBoxCount) {
  const auto cfg = config(R"({"experiment":"convergence","body":{"type":"box","n":2,"halfwidth":1},
                              "lambda":[10,50,100],"p":[2]})");
  const auto result = run_experiment(cfg);
  EXPECT_TRUE(result.pass);
  const auto& last = result.rows[2];
  EXPECT_NEAR(last["count_over_volume_scale"].get<double>(), 4.0401, 1e-12);
  EXPECT_LT(last["moment_rel_error_2"].get<double>(), 0.01);
  EXPECT_EQ(result.rows.back()["summary"], "convergence-gap");
}

TEST(Experiments, ConvergenceNeedsThreeLambdas) {
  EXPECT_THROW(run_experiment(config(R"({"experiment":"convergence","body":{"type":"box","n":2,"halfwidth":1},
                                          "lambda":[10,100]})")),
               Error);
}

TEST(Experiments, CounterexampleTrend) {
  const auto result = run_experiment(config(R"({"experiment":"counterexample","lambda":[4,16,64],"dimension":2})"));
  EXPECT_TRUE(result.pass);
  EXPECT_GE(result.rows[2]["raw_ratio"].get<double>(), 2 * result.rows[0]["raw_ratio"].get<double>());
  for (int i = 0; i < 3; ++i) EXPECT_LE(result.rows[i]["normalized_ratio"].get<double>(), 16.0);
}

TEST(Experiments, CounterexampleRepeatedLambda) {
  const auto result = run_experiment(config(R"({"experiment":"counterexample","lambda":[8,8,8],"dimension":2})"));
  EXPECT_TRUE(result.pass);
  EXPECT_EQ(result.rows[0]["raw_ratio"], result.rows[1]["raw_ratio"]);
  EXPECT_EQ(result.rows[1]["normalized_ratio"], result.rows[2]["normalized_ratio"]);
}

TEST(Experiments, ErrorRowDoesNotAbort) {
  const auto cfg = config(R"({"experiment":"borell","bodies":[{"type":"box","n":2,"halfwidth":"1/2"},
                              {"type":"box","n":2,"halfwidth":2}],"p":[1]})");
  const auto result = run_experiment(cfg);
  ASSERT_GT(result.rows.size(), 2u);
  EXPECT_TRUE(result.rows[0].contains("error"));
  EXPECT_EQ(result.rows[1]["check"], "discrete-borell");
  EXPECT_TRUE(result.pass);
  auto strict = cfg;
  strict.fail_on_error = true;
  EXPECT_FALSE(run_experiment(strict).pass);
}

TEST(Experiments, ShellBoundRejectsWedge) {
  const auto result = run_experiment(config(R"({"experiment":"shell-bound","bodies":[{"type":"ball","n":2,"radius":4},
                                                {"type":"counterexample","lambda":10,"n":2}],"t":[0.25]})"));
  EXPECT_TRUE(result.pass);
  bool rejected = false;
  for (const auto& row : result.rows) {
    if (row.contains("error") && row["error"].get<std::string>().rfind("hypothesis-violated", 0) == 0) rejected = true;
  }
  EXPECT_TRUE(rejected);
}

TEST(Experiments, FailingCheckFlipsResult) {
  auto cfg = config(R"({"experiment":"counterexample","lambda":[4,16],"dimension":2,"c_ref":0.01})");
  const auto result = run_experiment(cfg);
  EXPECT_FALSE(result.pass);
  EXPECT_FALSE(result.failures.empty());
}

TEST(Experiments, MeanwidthDeterministicAcrossThreads) {
  const auto cfg = config(R"({"experiment":"meanwidth","bodies":[{"type":"box","n":2,"halfwidth":1}],
                              "N":[8,64],"point_samples":400,"direction_samples":50,"replicates":2,"seed":9})");
  const auto a = format_report(run_experiment(cfg, 1).rows, ReportFormat::JsonLines);
  const auto b = format_report(run_experiment(cfg, 3).rows, ReportFormat::JsonLines);
  const auto c = format_report(run_experiment(cfg, 1).rows, ReportFormat::Csv);
  const auto d = format_report(run_experiment(cfg, 2).rows, ReportFormat::Csv);
  EXPECT_EQ(a, b);
  EXPECT_EQ(c, d);
  auto other = cfg;
  other.seed = 10;
  EXPECT_NE(format_report(run_experiment(other, 1).rows, ReportFormat::JsonLines), a);
}

TEST(Experiments, BrunnMinkowskiTrials) {
  const auto result = run_experiment(config(R"({"experiment":"brunn-minkowski","trials":20,"seed":4})"), 2);
  EXPECT_TRUE(result.pass);
  EXPECT_EQ(result.rows.size(), 20u);
}

TEST(Experiments, Unknown) { EXPECT_THROW(run_experiment(config(R"({"experiment":"nope"})")), Error); }
