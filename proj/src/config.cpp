#include <fstream>
#include <sstream>

#include "latticeborell/error.hpp"
#include "latticeborell/harness.hpp"

namespace latticeborell {

namespace {

using json = nlohmann::json;

RVec rvec_from_json(const json& j) {
  RVec out;
  for (const auto& v : j) out.push_back(rational_from_json(v));
  return out;
}

Mat matrix_from_json(const json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  Mat m(rows, rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (static_cast<Eigen::Index>(j[r].size()) != rows) throw Error(ErrorKind::ParseError, "matrix must be square");
    for (Eigen::Index c = 0; c < rows; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

Rotation rotation_from_json(const json& j, int n) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "identity") return Rotation::identity(n);
  if (kind == "signed_permutation") {
    return Rotation::signed_permutation(j.at("perm").get<std::vector<int>>(), j.at("signs").get<std::vector<int>>());
  }
  if (kind == "haar") return haar_rotation(j.at("seed").get<std::uint64_t>(), j.at("index").get<std::uint64_t>(), n);
  if (kind == "matrix") return Rotation::user(matrix_from_json(j.at("matrix")));
  throw Error(ErrorKind::ParseError, "unknown rotation kind " + kind);
}

template <class T>
std::vector<T> list(const json& j, const char* key, std::vector<T> fallback = {}) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_array()) return {v.get<T>()};
  return v.get<std::vector<T>>();
}

std::vector<Rational> rational_list(const json& j, const char* key, std::vector<Rational> fallback = {}) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_array()) return {rational_from_json(v)};
  return rvec_from_json(v);
}

void require_positive(std::int64_t v, const char* name) {
  if (v < 1) throw Error(ErrorKind::InvalidArgument, std::string(name) + " must be positive");
}

}  // namespace

Rational rational_from_json(const json& j) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
  if (j.is_number()) return parse_rational(j.dump());
  throw Error(ErrorKind::ParseError, "expected a rational, got " + j.dump());
}

ConvexBody body_from_json(const json& j) {
  try {
    const auto type = j.at("type").get<std::string>();
    if (type == "box") {
      if (j.contains("halfwidths")) return ConvexBody::box(rvec_from_json(j.at("halfwidths")));
      return ConvexBody::box(j.at("n").get<int>(), rational_from_json(j.at("halfwidth")));
    }
    if (type == "ball") return ConvexBody::ball(j.at("n").get<int>(), rational_from_json(j.at("radius")));
    if (type == "cross") {
      const int n = j.at("n").get<int>();
      const Rational s = rational_from_json(j.at("radius"));
      std::vector<RVec> vertices;
      for (int i = 0; i < n; ++i) {
        for (int sign : {1, -1}) {
          RVec v(static_cast<std::size_t>(n), Rational(0));
          v[static_cast<std::size_t>(i)] = sign * s;
          vertices.push_back(v);
        }
      }
      return ConvexBody::vpolytope(vertices);
    }
    if (type == "hpolytope") {
      std::vector<RVec> a;
      for (const auto& row : j.at("a")) a.push_back(rvec_from_json(row));
      return ConvexBody::hpolytope(a, rvec_from_json(j.at("b")));
    }
    if (type == "vpolytope") {
      std::vector<RVec> vertices;
      for (const auto& v : j.at("vertices")) vertices.push_back(rvec_from_json(v));
      return ConvexBody::vpolytope(vertices);
    }
    if (type == "rotated") {
      const auto base = body_from_json(j.at("base"));
      return ConvexBody::rotated(rotation_from_json(j.at("rotation"), base.dim()), base);
    }
    if (type == "scaled") return ConvexBody::scaled(rational_from_json(j.at("factor")), body_from_json(j.at("base")));
    if (type == "cubesum") return ConvexBody::cube_sum(body_from_json(j.at("base")));
    if (type == "combination") {
      return ConvexBody::combination(rational_from_json(j.at("mu")), body_from_json(j.at("first")),
                                     body_from_json(j.at("second")), j.value("plus_cube", false));
    }
    if (type == "counterexample") {
      return counterexample_body(rational_from_json(j.at("lambda")), j.at("n").get<int>());
    }
    throw Error(ErrorKind::ParseError, "unknown body type " + type);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("body: ") + e.what());
  }
}

ExperimentConfig parse_config(const json& j) {
  ExperimentConfig cfg;
  try {
    cfg.experiment = j.value("experiment", "");
    if (j.contains("body")) cfg.bodies.push_back(body_from_json(j.at("body")));
    if (j.contains("bodies")) {
      for (const auto& b : j.at("bodies")) cfg.bodies.push_back(body_from_json(b));
    }
    cfg.lambda = rational_list(j, "lambda");
    cfg.p = list<double>(j, "p");
    cfg.q = list<double>(j, "q");
    cfg.n_points = list<std::int64_t>(j, "N");
    cfg.t = list<double>(j, "t");
    cfg.union_a = rational_list(j, "union_a", cfg.union_a);
    cfg.union_q = list<unsigned>(j, "union_q", cfg.union_q);
    cfg.union_n = list<unsigned>(j, "union_N", cfg.union_n);
    if (j.contains("pairs")) {
      for (const auto& pair : j.at("pairs")) {
        cfg.pairs.push_back(
            {body_from_json(pair.at("k")), body_from_json(pair.at("l")), rational_from_json(pair.at("lambda"))});
      }
    }
    cfg.rotations = j.value("rotations", cfg.rotations);
    cfg.point_samples = j.value("point_samples", cfg.point_samples);
    cfg.direction_samples = j.value("direction_samples", cfg.direction_samples);
    cfg.replicates = j.value("replicates", cfg.replicates);
    cfg.grid_size = j.value("grid_size", cfg.grid_size);
    cfg.trials = j.value("trials", cfg.trials);
    cfg.dimension = j.value("dimension", cfg.dimension);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.output = j.value("output", cfg.output);
    cfg.format = j.value("format", cfg.format);
    cfg.tolerance = j.value("tolerance", cfg.tolerance);
    cfg.budget = j.value("budget", cfg.budget);
    cfg.c_ref = j.value("c_ref", cfg.c_ref);
    cfg.c_ref_upper = j.value("c_ref_upper", cfg.c_ref_upper);
    cfg.c_ref_lower = j.value("c_ref_lower", cfg.c_ref_lower);
    cfg.c = j.value("C", cfg.c);
    cfg.mode = j.value("mode", cfg.mode);
    cfg.identity_only = j.value("identity_only", cfg.identity_only);
    cfg.band_low = j.value("band_low", cfg.band_low);
    cfg.band_high = j.value("band_high", cfg.band_high);
    if (j.contains("assert_gap")) cfg.assert_gap = j.at("assert_gap").get<double>();
    cfg.fail_on_error = j.value("fail_on_error", cfg.fail_on_error);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("config: ") + e.what());
  }
  require_positive(cfg.point_samples, "point_samples");
  require_positive(cfg.direction_samples, "direction_samples");
  require_positive(cfg.replicates, "replicates");
  require_positive(cfg.grid_size, "grid_size");
  if (cfg.rotations < 0) throw Error(ErrorKind::InvalidArgument, "rotations must be >= 0");
  for (std::size_t i = 1; i < cfg.lambda.size(); ++i) {
    if (cfg.lambda[i] < cfg.lambda[i - 1]) throw Error(ErrorKind::InvalidArgument, "lambda sweep must not decrease");
  }
  for (const auto& l : cfg.lambda) {
    if (l <= 0) throw Error(ErrorKind::InvalidArgument, "lambda values must be positive");
  }
  parse_format(cfg.format);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_config(json::parse(buffer.str()));
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ParseError, path + ": " + e.what());
  }
}

ConvexBody random_rational_body(RngStream& rng, int n) {
  const auto kind = rng.below(3);
  if (kind == 0) {
    RVec h;
    for (int i = 0; i < n; ++i) h.emplace_back(static_cast<long>(1 + rng.below(12)), 4);
    return ConvexBody::box(h);
  }
  if (kind == 1) return ConvexBody::ball(n, Rational(static_cast<long>(1 + rng.below(12)), 4));
  const auto m = static_cast<std::size_t>(n) + 1 + rng.below(4);
  std::vector<RVec> vertices;
  for (std::size_t v = 0; v < m; ++v) {
    RVec x;
    for (int i = 0; i < n; ++i) x.emplace_back(static_cast<long>(rng.below(13)) - 6, 2);
    vertices.push_back(x);
  }
  return ConvexBody::vpolytope(vertices);
}

}  // namespace latticeborell
