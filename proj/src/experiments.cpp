#include <cmath>
#include <functional>

#include <fmt/format.h>

#include "latticeborell/error.hpp"
#include "latticeborell/harness.hpp"
#include "latticeborell/lattice.hpp"
#include "latticeborell/parallel.hpp"

namespace latticeborell {

namespace {

struct Task {
  std::string label;
  std::function<std::vector<Row>(RngStream&)> run;
};

std::string key(const char* prefix, double p) { return fmt::format("{}_{:g}", prefix, p); }

Row report_row(const InequalityReport& report, const std::string& body) {
  Row row;
  row["check"] = report.name;
  if (!body.empty()) row["body"] = body;
  row["lhs"] = report.lhs;
  row["rhs"] = report.rhs;
  row["implied_constant"] = report.implied_constant;
  row["pass"] = report.pass;
  row["exact"] = report.exact;
  for (const auto& [k, v] : report.context.items()) {
    if (!row.contains(k)) row[k] = v;
  }
  return row;
}

EnumerateOptions enumerate_options(const ExperimentConfig& cfg) { return {cfg.tolerance, cfg.budget}; }

/// Task i draws from stream i of the seed; output order is task order.
RunResult run_tasks(const ExperimentConfig& cfg, const std::vector<Task>& tasks, int threads) {
  std::vector<std::vector<Row>> groups(tasks.size());
  parallel_for(tasks.size(), threads, [&](std::size_t i) {
    RngStream rng(cfg.seed, i);
    try {
      groups[i] = tasks[i].run(rng);
    } catch (const Error& e) {
      Row row;
      row["task"] = tasks[i].label;
      row["error"] = e.what();
      groups[i] = {row};
    }
  });
  RunResult result;
  for (auto& group : groups) {
    for (auto& r : group) {
      Row row;
      row["row"] = result.rows.size();
      for (auto& [k, v] : r.items()) row[k] = v;
      result.rows.push_back(std::move(row));
    }
  }
  for (const auto& row : result.rows) {
    const bool failed = (row.contains("pass") && !row.at("pass").get<bool>()) ||
                        (cfg.fail_on_error && row.contains("error"));
    if (failed) {
      result.pass = false;
      result.failures.push_back(row.dump());
    }
  }
  return result;
}

void append(RunResult& result, Row summary) {
  Row row;
  row["row"] = result.rows.size();
  for (auto& [k, v] : summary.items()) row[k] = v;
  if (row.contains("pass") && !row.at("pass").get<bool>()) {
    result.pass = false;
    result.failures.push_back(row.dump());
  }
  result.rows.push_back(std::move(row));
}

void require_bodies(const ExperimentConfig& cfg) {
  if (cfg.bodies.empty()) throw Error(ErrorKind::InvalidArgument, "config lists no body");
}

ConvexBody dilate(const ConvexBody& body, const Rational& lambda) {
  return lambda == 1 ? body : ConvexBody::scaled(lambda, body);
}

}  // namespace

RunResult run_enumerate(const ExperimentConfig& cfg, int threads) {
  require_bodies(cfg);
  const auto lambdas = cfg.lambda.empty() ? std::vector<Rational>{Rational(1)} : cfg.lambda;
  std::vector<Task> tasks;
  for (const auto& body : cfg.bodies) {
    for (const auto& lambda : lambdas) {
      tasks.push_back({describe(body), [&cfg, body, lambda](RngStream&) {
                         const auto set = enumerate(dilate(body, lambda), enumerate_options(cfg));
                         Row row;
                         row["body"] = describe(body);
                         row["lambda"] = to_string(lambda);
                         row["count"] = set.count;
                         row["ambiguous"] = set.ambiguous_count;
                         if (set.count > 0) {
                           const auto dist = project(set);
                           row["max_projection"] = dist.max_value();
                           for (double p : cfg.p) row[key("m", p)] = moment(dist, p).root;
                         }
                         return std::vector<Row>{row};
                       }});
    }
  }
  return run_tasks(cfg, tasks, threads);
}

RunResult run_borell(const ExperimentConfig& cfg, int threads) {
  require_bodies(cfg);
  const auto ps = cfg.p.empty() ? std::vector<double>{1, 2} : cfg.p;
  const auto qs = cfg.q.empty() ? ps : cfg.q;
  std::vector<Task> tasks;
  for (const auto& body : cfg.bodies) {
    tasks.push_back({describe(body), [&cfg, &ps, &qs, body](RngStream&) {
                       const auto name = describe(body);
                       const auto data = c0_data(body, enumerate_options(cfg));
                       std::vector<Row> rows;
                       for (double p : ps) {
                         for (double q : qs) {
                           if (q >= p) rows.push_back(report_row(verify_discrete_borell(data, p, q, cfg.c_ref), name));
                         }
                       }
                       for (double p : ps) rows.push_back(report_row(paley_zygmund_check(data, p, cfg.c), name));
                       for (const auto& a : cfg.union_a) {
                         for (unsigned q : cfg.union_q) {
                           for (unsigned n : cfg.union_n) rows.push_back(report_row(union_bound_check(data.x, a, q, n), name));
                         }
                       }
                       return rows;
                     }});
  }
  return run_tasks(cfg, tasks, threads);
}

RunResult run_cq(const ExperimentConfig& cfg, int threads) {
  require_bodies(cfg);
  const auto qs = cfg.q.empty() ? std::vector<double>{1} : cfg.q;
  std::vector<Task> tasks;
  for (const auto& body : cfg.bodies) {
    for (double q : qs) {
      tasks.push_back({describe(body), [&cfg, body, q](RngStream&) {
                         const auto c = cq_estimate(body, q, cfg.rotations, cfg.grid_size, cfg.seed);
                         Row row;
                         row["body"] = describe(body);
                         row["q"] = q;
                         row["c0"] = c.c0;
                         row["cq_estimate"] = c.cq_estimate;
                         row["cq_note"] = "estimate (lower bound)";
                         row["rotations"] = c.rotation_budget;
                         row["p_grid"] = c.p_grid;
                         row["argmax_rotation"] = c.argmax_rotation;
                         row["argmax_p"] = c.argmax_p;
                         row["pass"] = c.c0 >= 1 && c.cq_estimate >= c.c0;
                         return std::vector<Row>{row};
                       }});
    }
  }
  return run_tasks(cfg, tasks, threads);
}

RunResult run_brunn_minkowski(const ExperimentConfig& cfg, int threads) {
  std::vector<Task> tasks;
  for (const auto& pair : cfg.pairs) {
    tasks.push_back({"pair", [&cfg, pair](RngStream&) {
                       return std::vector<Row>{
                           report_row(verify_discrete_bm(pair.k, pair.l, pair.lambda, enumerate_options(cfg)), "")};
                     }});
  }
  for (std::int64_t i = 0; i < cfg.trials; ++i) {
    tasks.push_back({fmt::format("trial {}", i), [&cfg, i](RngStream& rng) {
                       const auto k = random_rational_body(rng, cfg.dimension);
                       const auto l = random_rational_body(rng, cfg.dimension);
                       const Rational lambda(static_cast<long>(1 + rng.below(15)), 16);
                       auto row = report_row(verify_discrete_bm(k, l, lambda, enumerate_options(cfg)), "");
                       row["trial"] = i;
                       return std::vector<Row>{row};
                     }});
  }
  if (tasks.empty()) throw Error(ErrorKind::InvalidArgument, "config lists no pairs and no trials");
  return run_tasks(cfg, tasks, threads);
}

RunResult run_meanwidth_sweep(const ExperimentConfig& cfg, int threads) {
  require_bodies(cfg);
  if (cfg.n_points.empty()) throw Error(ErrorKind::InvalidArgument, "meanwidth needs an N sweep");
  for (auto n : cfg.n_points) {
    if (n < 3) throw Error(ErrorKind::PreconditionViolated, "meanwidth needs N >= 3");
  }
  std::vector<Task> tasks;
  if (cfg.mode == "upper" || cfg.mode == "lower") {
    const auto mode = cfg.mode == "upper" ? MeanWidthMode::Upper : MeanWidthMode::Lower;
    const double q = cfg.q.empty() ? 1.0 : cfg.q.front();
    MeanWidthOptions options;
    options.identity_only = cfg.identity_only;
    options.c_ref_upper = cfg.c_ref_upper;
    options.c_ref_lower = cfg.c_ref_lower;
    options.c = cfg.c;
    options.grid_size = cfg.grid_size;
    for (const auto& body : cfg.bodies) {
      for (auto n : cfg.n_points) {
        tasks.push_back({describe(body), [&cfg, body, n, mode, q, options](RngStream&) {
                           return std::vector<Row>{
                               report_row(verify_meanwidth_discrete(body, n, mode, q, cfg.rotations, cfg.seed, options), "")};
                         }});
      }
    }
    return run_tasks(cfg, tasks, threads);
  }
  if (cfg.mode != "sandwich") throw Error(ErrorKind::InvalidArgument, "unknown meanwidth mode " + cfg.mode);
  for (const auto& body : cfg.bodies) {
    for (auto n : cfg.n_points) {
      tasks.push_back({describe(body), [&cfg, body, n](RngStream& rng) {
                         const auto replicates = std::max<std::int64_t>(8, cfg.point_samples / n);
                         const auto kn =
                             random_polytope_mean_width(body, n, replicates, cfg.direction_samples, rng.substream(0));
                         const auto zp = mean_width_centroid(body, std::log(static_cast<double>(n)), cfg.direction_samples,
                                                             cfg.point_samples, cfg.replicates, rng.substream(1));
                         Row row;
                         row["body"] = describe(body);
                         row["N"] = n;
                         row["ew_kn"] = kn.value;
                         row["ew_kn_stderr"] = kn.stderr;
                         row["w_zlogn"] = zp.value;
                         row["w_zlogn_stderr"] = zp.stderr;
                         row["ratio"] = kn.value / zp.value;
                         row["replicates"] = replicates;
                         row["pass"] = kn.value / zp.value >= cfg.band_low && kn.value / zp.value <= cfg.band_high;
                         return std::vector<Row>{row};
                       }});
    }
  }
  auto result = run_tasks(cfg, tasks, threads);
  // Per body: hull monotonicity within 3 stderr and the spread of the ratio.
  const std::size_t per_body = cfg.n_points.size();
  for (std::size_t b = 0; b < cfg.bodies.size(); ++b) {
    bool monotone = true;
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    bool complete = true;
    for (std::size_t i = 0; i < per_body; ++i) {
      const auto& row = result.rows[b * per_body + i];
      if (!row.contains("ratio")) {
        complete = false;
        continue;
      }
      lo = std::min(lo, row.at("ratio").get<double>());
      hi = std::max(hi, row.at("ratio").get<double>());
      if (i == 0) continue;
      const auto& prev = result.rows[b * per_body + i - 1];
      if (!prev.contains("ratio")) continue;
      const double slack = 3 * std::hypot(row.at("ew_kn_stderr").get<double>(), prev.at("ew_kn_stderr").get<double>());
      if (row.at("ew_kn").get<double>() + slack < prev.at("ew_kn").get<double>()) monotone = false;
    }
    Row summary;
    summary["summary"] = "meanwidth-sweep";
    summary["body"] = describe(cfg.bodies[b]);
    summary["monotone"] = monotone;
    summary["log_ratio_range"] = complete ? std::log(hi / lo) : std::numeric_limits<double>::quiet_NaN();
    summary["pass"] = complete && monotone && std::log(hi / lo) <= std::log(10.0);
    append(result, summary);
  }
  return result;
}

RunResult run_convergence(const ExperimentConfig& cfg, int threads) {
  require_bodies(cfg);
  if (cfg.lambda.size() < 3) throw Error(ErrorKind::InvalidArgument, "convergence needs at least 3 lambda values");
  const auto ps = cfg.p.empty() ? std::vector<double>{1} : cfg.p;
  std::vector<Task> tasks;
  for (const auto& body : cfg.bodies) {
    for (const auto& lambda : cfg.lambda) {
      tasks.push_back({describe(body), [&cfg, &ps, body, lambda](RngStream& rng) {
                         const auto k = dilate(body, lambda);
                         const double l = to_double(lambda);
                         const int n = body.dim();
                         Row row;
                         row["body"] = describe(body);
                         row["lambda"] = to_string(lambda);
                         const auto data = c0_data(k, enumerate_options(cfg));
                         row["count"] = data.g_k;
                         row["count_over_volume_scale"] = static_cast<double>(data.g_k) / std::pow(l, n);
                         try {
                           const double vol = volume(body);
                           row["volume"] = vol;
                           row["volume_rel_error"] =
                               std::abs(static_cast<double>(data.g_k) / std::pow(l, n) - vol) / vol;
                         } catch (const Error&) {
                           row["volume"] = nullptr;
                         }
                         for (double p : ps) {
                           row[key("c0", p)] = c0(data, p);
                           const double scaled = moment(data.x, p).root / l;
                           double continuous;
                           try {
                             continuous = continuous_moment_root(body, p);
                           } catch (const Error&) {
                             Vec e = Vec::Zero(n);
                             e(n - 1) = 1;
                             auto stream = rng.substream(static_cast<std::uint64_t>(p * 1000));
                             continuous = centroid_support_mc(body, p, e, cfg.point_samples, stream);
                           }
                           row[key("scaled_moment", p)] = scaled;
                           row[key("continuous_moment", p)] = continuous;
                           row[key("moment_rel_error", p)] = std::abs(scaled - continuous) / continuous;
                         }
                         for (double q : cfg.q) {
                           try {
                             row[key("cq", q)] = cq_estimate(k, q, cfg.rotations, cfg.grid_size, cfg.seed).cq_estimate;
                           } catch (const Error& e) {
                             row[key("cq_error", q)] = e.what();
                           }
                         }
                         return std::vector<Row>{row};
                       }});
    }
  }
  auto result = run_tasks(cfg, tasks, threads);
  const std::size_t per_body = cfg.lambda.size();
  for (std::size_t b = 0; b < cfg.bodies.size(); ++b) {
    for (double p : ps) {
      std::vector<double> gaps;
      for (std::size_t i = 0; i < per_body; ++i) {
        const auto& row = result.rows[b * per_body + i];
        if (row.contains(key("c0", p))) gaps.push_back(std::abs(row.at(key("c0", p)).get<double>() - 1));
      }
      Row summary;
      summary["summary"] = "convergence-gap";
      summary["body"] = describe(cfg.bodies[b]);
      summary["p"] = p;
      if (gaps.empty()) {
        summary["error"] = "no successful rows";
        append(result, summary);
        continue;
      }
      bool shrinking = true;
      for (std::size_t i = 1; i < gaps.size(); ++i) shrinking = shrinking && gaps[i] < gaps[i - 1];
      summary["first_gap"] = gaps.front();
      summary["last_gap"] = gaps.back();
      summary["shrinking"] = shrinking;
      if (cfg.assert_gap) summary["pass"] = shrinking && gaps.back() < *cfg.assert_gap;
      append(result, summary);
    }
  }
  return result;
}

RunResult run_counterexample(const ExperimentConfig& cfg, int threads) {
  if (cfg.lambda.empty()) throw Error(ErrorKind::InvalidArgument, "counterexample needs a lambda sweep");
  if (cfg.dimension < 2) throw Error(ErrorKind::InvalidArgument, "counterexample needs n >= 2");
  const double p = cfg.p.empty() ? 1.0 : cfg.p.front();
  const double q = cfg.q.empty() ? 2.0 : cfg.q.front();
  std::vector<Task> tasks;
  for (const auto& lambda : cfg.lambda) {
    tasks.push_back({to_string(lambda), [&cfg, lambda, p, q](RngStream&) {
                       const auto body = counterexample_body(lambda, cfg.dimension);
                       const auto data = c0_data(body, enumerate_options(cfg));
                       const double m_p = moment(data.x, p).root;
                       const double m_q = moment(data.x, q).root;
                       const double c = c0(data, p);
                       Row row;
                       row["lambda"] = to_string(lambda);
                       row["n"] = cfg.dimension;
                       row["p"] = p;
                       row["q"] = q;
                       row["m_p"] = m_p;
                       row["m_q"] = m_q;
                       row["raw_ratio"] = m_q / m_p;
                       row["c0"] = c;
                       row["normalized_ratio"] = m_q / ((q / p) * c * m_p);
                       row["pass"] = m_q / ((q / p) * c * m_p) <= cfg.c_ref;
                       return std::vector<Row>{row};
                     }});
  }
  auto result = run_tasks(cfg, tasks, threads);
  bool increasing = true;
  for (std::size_t i = 1; i < cfg.lambda.size(); ++i) {
    const auto& a = result.rows[i - 1];
    const auto& b = result.rows[i];
    if (!a.contains("raw_ratio") || !b.contains("raw_ratio")) {
      increasing = false;
      continue;
    }
    const double ra = a.at("raw_ratio").get<double>();
    const double rb = b.at("raw_ratio").get<double>();
    increasing = increasing && (cfg.lambda[i] == cfg.lambda[i - 1] ? ra == rb : rb > ra);
  }
  Row summary;
  summary["summary"] = "counterexample-trend";
  summary["raw_ratio_increasing"] = increasing;
  if (result.rows.front().contains("raw_ratio") && result.rows[cfg.lambda.size() - 1].contains("raw_ratio")) {
    summary["growth"] = result.rows[cfg.lambda.size() - 1].at("raw_ratio").get<double>() /
                        result.rows.front().at("raw_ratio").get<double>();
  }
  summary["pass"] = increasing;
  append(result, summary);
  return result;
}

RunResult run_shell_bound(const ExperimentConfig& cfg, int threads) {
  require_bodies(cfg);
  const auto ps = cfg.p.empty() ? std::vector<double>{1} : cfg.p;
  std::vector<Task> tasks;
  for (const auto& body : cfg.bodies) {
    tasks.push_back({describe(body), [&cfg, &ps, body](RngStream&) {
                       const auto name = describe(body);
                       std::vector<Row> rows;
                       // A violated hypothesis marks its own row and the sweep goes on.
                       auto guarded = [&](Row row, const std::function<void(Row&)>& fill) {
                         try {
                           fill(row);
                         } catch (const Error& e) {
                           row["error"] = e.what();
                         }
                         rows.push_back(std::move(row));
                       };
                       for (double p : ps) {
                         Row row;
                         row["check"] = "c0-upper-bound";
                         row["body"] = name;
                         row["p"] = p;
                         guarded(row, [&](Row& r) {
                           const auto bound = c0_upper_bound(body, p);
                           const double t = std::sqrt(static_cast<double>(body.dim())) / bound.inner;
                           const auto count = shell_count(body, t);
                           const double value = c0(body, p);
                           r["t"] = t;
                           r["shell_count"] = count;
                           r["formula"] = bound.shell_count_bound;
                           r["c0"] = value;
                           r["bound"] = bound.bound;
                           r["inner"] = bound.inner;
                           r["outer"] = bound.outer;
                           r["pass"] = value <= bound.bound && static_cast<double>(count) <= bound.shell_count_bound;
                         });
                       }
                       for (double t : cfg.t) {
                         Row row;
                         row["check"] = "shell-count";
                         row["body"] = name;
                         row["t"] = t;
                         guarded(row, [&](Row& r) {
                           const auto count = shell_count(body, t);
                           const double formula = shell_count_formula(body, t);
                           r["shell_count"] = count;
                           r["formula"] = formula;
                           r["pass"] = static_cast<double>(count) <= formula;
                         });
                       }
                       return rows;
                     }});
  }
  return run_tasks(cfg, tasks, threads);
}

RunResult run_experiment(const ExperimentConfig& cfg, int threads) {
  const auto& e = cfg.experiment;
  if (e == "enumerate") return run_enumerate(cfg, threads);
  if (e == "borell") return run_borell(cfg, threads);
  if (e == "cq") return run_cq(cfg, threads);
  if (e == "brunn-minkowski") return run_brunn_minkowski(cfg, threads);
  if (e == "meanwidth") return run_meanwidth_sweep(cfg, threads);
  if (e == "convergence") return run_convergence(cfg, threads);
  if (e == "counterexample") return run_counterexample(cfg, threads);
  if (e == "shell-bound") return run_shell_bound(cfg, threads);
  throw Error(ErrorKind::InvalidArgument, "unknown experiment '" + e + "'");
}

}  // namespace latticeborell
