#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fsbp/basis.hpp"
#include "fsbp/construct.hpp"
#include "fsbp/lbfgs.hpp"
#include "fsbp/operator.hpp"
#include "fsbp/parametrize.hpp"
#include "fsbp/pde.hpp"
#include "fsbp/verify.hpp"

namespace fsbp::io {

using json = nlohmann::json;

inline constexpr std::string_view kToolVersion = "0.1.0";
inline constexpr std::string_view kOperatorSchema = "fsbp-operator/1";

/// Configuration problem; the message starts with the dotted path of the field.
class ConfigError : public Error {
public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Strict JSON object reading

class ObjectReader {
public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("", "expected an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  const json& at(const std::string& key) {
    if (!has(key)) fail(key, "missing required field");
    return j_.at(key);
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  template <class T>
  T get(const std::string& key) {
    const json& v = at(key);
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) fail(key, "expected a boolean");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) fail(key, "expected an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0) fail(key, "expected a non-negative integer");
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) fail(key, "expected a number");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) fail(key, "expected a string");
    }
    return v.get<T>();
  }

  template <class T>
  T get_or(const std::string& key, T fallback) {
    return has(key) ? get<T>(key) : fallback;
  }

  std::vector<double> numbers(const std::string& key) {
    const json& v = at(key);
    if (!v.is_array()) fail(key, "expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) fail(key, "expected an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  /// Rejects keys that were never asked for.
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) fail(it.key(), "unknown key");
    }
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    const std::string where = key.empty() ? (path_.empty() ? "<root>" : path_) : field(key);
    throw ConfigError(where + ": " + what);
  }

private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

// ---------------------------------------------------------------------------
// Descriptors

inline json to_json(const SpaceDescriptor& d) {
  json j{{"kind", std::string(to_string(d.kind))}};
  if (d.kind == SpaceKind::monomial) j["degree"] = d.degree;
  if (d.kind == SpaceKind::hermite_oscillator) j["n_max"] = d.n_max;
  return j;
}

inline SpaceDescriptor parse_space(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  SpaceDescriptor d;
  try {
    d.kind = parse_space_kind(r.get<std::string>("kind"));
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    r.fail("kind", e.what());
  }
  if (d.kind == SpaceKind::monomial) {
    d.degree = r.get<int>("degree");
    if (d.degree < 0) r.fail("degree", "must be non-negative");
  }
  if (d.kind == SpaceKind::hermite_oscillator) {
    d.n_max = r.get_or<int>("n_max", 10);
    if (d.n_max < 0) r.fail("n_max", "must be non-negative");
  }
  r.finish();
  return d;
}

inline std::string_view to_string(GridKind k) {
  switch (k) {
    case GridKind::equidistant: return "equidistant";
    case GridKind::chebyshev_lobatto: return "chebyshev_lobatto";
    case GridKind::gauss_lobatto: return "gauss_lobatto";
  }
  return "?";
}

inline std::optional<GridKind> parse_grid_kind(std::string_view s) {
  if (s == "equidistant") return GridKind::equidistant;
  if (s == "chebyshev_lobatto") return GridKind::chebyshev_lobatto;
  if (s == "gauss_lobatto") return GridKind::gauss_lobatto;
  return std::nullopt;  // "explicit"
}

struct GridSpec {
  std::optional<GridKind> kind = GridKind::equidistant;  // nullopt: explicit node list
  int n = 10;
  Interval interval{-1.0, 1.0};
  std::vector<double> nodes;

  int size() const { return kind ? n : static_cast<int>(nodes.size()); }
  Grid build() const { return kind ? make_grid(interval, *kind, n) : make_grid(interval, nodes); }
};

inline Interval parse_interval(ObjectReader& r, const std::string& key) {
  const auto v = r.numbers(key);
  if (v.size() != 2) r.fail(key, "expected [x_left, x_right]");
  try {
    return Interval(v[0], v[1]);
  } catch (const Error& e) {
    r.fail(key, e.what());
  }
}

inline GridSpec parse_grid(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  GridSpec g;
  const auto kind = r.get_or<std::string>("kind", "equidistant");
  if (kind == "explicit") {
    g.kind.reset();
    g.nodes = r.numbers("nodes");
    if (g.nodes.size() < 2) r.fail("nodes", "need at least two nodes");
    if (r.has("interval")) {
      g.interval = parse_interval(r, "interval");
    } else {
      try {
        g.interval = Interval(g.nodes.front(), g.nodes.back());
      } catch (const Error& e) {
        r.fail("nodes", e.what());
      }
    }
  } else {
    g.kind = parse_grid_kind(kind);
    if (!g.kind) r.fail("kind", "unknown grid kind '" + kind + "'");
    g.n = r.get<int>("n");
    if (g.n < 2) r.fail("n", "must be >= 2");
    if (r.has("interval")) g.interval = parse_interval(r, "interval");
  }
  r.finish();
  try {
    (void)g.build();
  } catch (const Error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return g;
}

inline OptimizerOptions parse_optimizer(const json& j, const std::string& path, OptimizerOptions o = {}) {
  ObjectReader r(j, path);
  o.memory = r.get_or("memory", o.memory);
  o.max_iters = r.get_or("max_iters", o.max_iters);
  o.objective_tol = r.get_or("objective_tol", o.objective_tol);
  o.grad_tol = r.get_or("grad_tol", o.grad_tol);
  o.max_restarts = r.get_or("max_restarts", o.max_restarts);
  o.rng_seed = r.get_or<std::uint64_t>("rng_seed", o.rng_seed);
  o.init_scale = r.get_or("init_scale", o.init_scale);
  r.finish();
  try {
    o.validate();
  } catch (const Error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return o;
}

inline json to_json(const OptimizerOptions& o) {
  return {{"memory", o.memory},         {"max_iters", o.max_iters},       {"objective_tol", o.objective_tol},
          {"grad_tol", o.grad_tol},     {"max_restarts", o.max_restarts}, {"rng_seed", o.rng_seed},
          {"init_scale", o.init_scale}};
}

inline NormMode parse_mode(ObjectReader& r, const std::string& key, NormMode fallback) {
  if (!r.has(key)) return fallback;
  try {
    return parse_norm_mode(r.get<std::string>(key));
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    r.fail(key, e.what());
  }
}

inline std::optional<int> parse_bandwidth(ObjectReader& r, int n) {
  if (!r.has("bandwidth")) return std::nullopt;
  const int w = r.get<int>("bandwidth");
  if (w < 1 || w >= n) r.fail("bandwidth", "must satisfy 1 <= bandwidth < N = " + std::to_string(n));
  return w;
}

// ---------------------------------------------------------------------------
// Run configuration

struct ConstructConfig {
  SpaceDescriptor space;
  GridSpec grid;
  NormMode mode = NormMode::logistic_normalized;
  std::optional<int> bandwidth;
  OptimizerOptions optimizer;
  double rank_tol = 1e-10;
  std::string operator_path = "operator.json";
  std::string report_path = "report.json";
};

struct VerifyConfig {
  std::optional<SpaceDescriptor> space;  // defaults to the one recorded in the operator file
  double tolerance = 1e-10;
};

struct ConvergenceConfig {
  SpaceDescriptor space;
  int nodes = 10;
  std::vector<int> blocks{4, 8, 16, 32};
  GridKind grid_kind = GridKind::equidistant;
  NormMode mode = NormMode::logistic_normalized;
  std::optional<int> bandwidth;
  OptimizerOptions optimizer;
  double end_time = 1.0;
  double cfl = 0.2;
  std::string csv_path = "convergence.csv";
};

struct SchrodingerRunConfig {
  SchrodingerConfig run;
  std::string series_path = "schrodinger_norm.csv";
  std::string snapshot_path = "schrodinger_state.csv";
};

struct RunConfig {
  std::optional<ConstructConfig> construct;
  std::optional<VerifyConfig> verify;
  std::optional<ConvergenceConfig> convergence;
  std::optional<SchrodingerRunConfig> schrodinger;
};

inline ConstructConfig parse_construct(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  ConstructConfig c;
  c.space = parse_space(r.at("space"), r.field("space"));
  c.grid = parse_grid(r.at("grid"), r.field("grid"));
  c.mode = parse_mode(r, "mode", c.mode);
  c.bandwidth = parse_bandwidth(r, c.grid.size());
  if (r.has("optimizer")) c.optimizer = parse_optimizer(r.at("optimizer"), r.field("optimizer"));
  c.rank_tol = r.get_or("rank_tol", c.rank_tol);
  if (!(c.rank_tol > 0.0)) r.fail("rank_tol", "must be positive");
  c.operator_path = r.get_or<std::string>("operator_out", c.operator_path);
  c.report_path = r.get_or<std::string>("report_out", c.report_path);
  r.finish();
  return c;
}

inline VerifyConfig parse_verify(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  VerifyConfig c;
  if (r.has("space")) c.space = parse_space(r.at("space"), r.field("space"));
  c.tolerance = r.get_or("tolerance", c.tolerance);
  if (!(c.tolerance > 0.0)) r.fail("tolerance", "must be positive");
  r.finish();
  return c;
}

inline ConvergenceConfig parse_convergence(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  ConvergenceConfig c;
  c.space = parse_space(r.at("space"), r.field("space"));
  c.nodes = r.get_or("nodes", c.nodes);
  if (c.nodes < 2) r.fail("nodes", "must be >= 2");
  if (r.has("blocks")) {
    const auto b = r.numbers("blocks");
    c.blocks.clear();
    for (double v : b) {
      if (v < 1 || v != std::floor(v)) r.fail("blocks", "entries must be positive integers");
      c.blocks.push_back(static_cast<int>(v));
    }
  }
  if (c.blocks.size() < 3) r.fail("blocks", "need at least three resolutions");
  if (r.has("grid_kind")) {
    const auto k = parse_grid_kind(r.get<std::string>("grid_kind"));
    if (!k) r.fail("grid_kind", "must be equidistant, chebyshev_lobatto or gauss_lobatto");
    c.grid_kind = *k;
  }
  c.mode = parse_mode(r, "mode", c.mode);
  c.bandwidth = parse_bandwidth(r, c.nodes);
  if (r.has("optimizer")) c.optimizer = parse_optimizer(r.at("optimizer"), r.field("optimizer"));
  c.end_time = r.get_or("end_time", c.end_time);
  if (!(c.end_time > 0.0)) r.fail("end_time", "must be positive");
  c.cfl = r.get_or("cfl", c.cfl);
  if (!(c.cfl > 0.0)) r.fail("cfl", "must be positive");
  c.csv_path = r.get_or<std::string>("csv_out", c.csv_path);
  r.finish();
  return c;
}

inline SchrodingerRunConfig parse_schrodinger(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  SchrodingerRunConfig c;
  if (r.has("space")) {
    const auto s = r.get<std::string>("space");
    if (s == "hermite") c.run.space = SchrodingerSpace::hermite;
    else if (s == "polynomial") c.run.space = SchrodingerSpace::polynomial;
    else r.fail("space", "must be 'hermite' or 'polynomial'");
  }
  c.run.n = r.get_or("n", c.run.n);
  if (c.run.n < 10) r.fail("n", "must be >= 10");
  c.run.end_time = r.get_or("end_time", c.run.end_time);
  if (!(c.run.end_time >= 0.0)) r.fail("end_time", "must be non-negative");
  if (r.has("dt")) {
    c.run.dt = r.get<double>("dt");
    if (!(*c.run.dt > 0.0)) r.fail("dt", "must be positive");
  }
  c.run.cfl = r.get_or("cfl", c.run.cfl);
  if (!(c.run.cfl > 0.0)) r.fail("cfl", "must be positive");
  c.run.snapshot_every = r.get_or("snapshot_every", c.run.snapshot_every);
  if (c.run.snapshot_every < 1) r.fail("snapshot_every", "must be >= 1");
  if (r.has("optimizer")) c.run.optimizer = parse_optimizer(r.at("optimizer"), r.field("optimizer"), c.run.optimizer);
  c.series_path = r.get_or<std::string>("series_out", c.series_path);
  c.snapshot_path = r.get_or<std::string>("snapshot_out", c.snapshot_path);
  r.finish();
  return c;
}

inline RunConfig parse_config_document(const json& j) {
  ObjectReader r(j, "");
  RunConfig c;
  if (r.has("construct")) c.construct = parse_construct(r.at("construct"), "construct");
  if (r.has("verify")) c.verify = parse_verify(r.at("verify"), "verify");
  if (r.has("convergence")) c.convergence = parse_convergence(r.at("convergence"), "convergence");
  if (r.has("schrodinger")) c.schrodinger = parse_schrodinger(r.at("schrodinger"), "schrodinger");
  r.finish();
  return c;
}

inline RunConfig parse_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("<root>: malformed document: ") + e.what());
  }
  return parse_config_document(j);
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
  if (!out) throw Error("write to '" + path + "' failed");
}

inline RunConfig load_config(const std::string& path) { return parse_config(read_text(path)); }

// ---------------------------------------------------------------------------
// Operator files

struct OperatorMetadata {
  std::string mode = "logistic_normalized";
  std::optional<int> bandwidth;
  std::uint64_t seed = 0;
  double residual = 0.0;
  std::string tool_version = std::string(kToolVersion);
};

struct OperatorFile {
  FsbpOperator op;
  std::optional<SpaceDescriptor> space;
  OperatorMetadata metadata;
  std::string schema_version = std::string(kOperatorSchema);
};

inline json to_json(const OperatorFile& f) {
  const int n = f.op.size();
  json q = json::array();
  for (int i = 0; i < n; ++i) {
    json row = json::array();
    for (int k = 0; k < n; ++k) row.push_back(f.op.q(i, k));
    q.push_back(std::move(row));
  }
  json p = json::array();
  for (int i = 0; i < n; ++i) p.push_back(f.op.p[i]);
  json meta{{"mode", f.metadata.mode},
            {"bandwidth", f.metadata.bandwidth ? json(*f.metadata.bandwidth) : json(nullptr)},
            {"seed", f.metadata.seed},
            {"residual", f.metadata.residual},
            {"tool_version", f.metadata.tool_version}};
  return {{"schema_version", f.schema_version},
          {"space", f.space ? to_json(*f.space) : json{{"kind", "custom"}, {"name", f.op.space_name}}},
          {"space_name", f.op.space_name},
          {"constants_exact", f.op.constants_exact},
          {"grid", {{"interval", {f.op.grid.interval().left, f.op.grid.interval().right}}, {"nodes", f.op.grid.nodes()}}},
          {"p", std::move(p)},
          {"Q", std::move(q)},
          {"metadata", std::move(meta)}};
}

inline OperatorFile operator_from_json(const json& j) {
  ObjectReader r(j, "");
  const auto schema = r.get<std::string>("schema_version");
  if (schema != kOperatorSchema) r.fail("schema_version", "unsupported schema '" + schema + "'");
  std::optional<SpaceDescriptor> space_desc;
  OperatorMetadata meta;
  const json& space = r.at("space");
  if (space.is_object() && space.value("kind", "") == "custom") {
    ObjectReader sr(space, "space");
    (void)sr.get<std::string>("kind");
    (void)sr.get_or<std::string>("name", "");
    sr.finish();
  } else {
    space_desc = parse_space(space, "space");
  }
  const auto space_name = r.get<std::string>("space_name");
  const bool constants_exact = r.get<bool>("constants_exact");

  ObjectReader gr(r.at("grid"), "grid");
  const Interval interval = parse_interval(gr, "interval");
  auto nodes = gr.numbers("nodes");
  gr.finish();
  std::optional<Grid> grid;
  try {
    grid.emplace(interval, std::move(nodes));
  } catch (const Error& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }
  const int n = grid->size();

  const auto pv = r.numbers("p");
  if (static_cast<int>(pv.size()) != n) r.fail("p", "length does not match the grid");
  Vector p(n);
  for (int i = 0; i < n; ++i) {
    if (!(pv[i] > 0.0)) r.fail("p", "entry " + std::to_string(i) + " is not positive");
    p[i] = pv[i];
  }
  const json& qj = r.at("Q");
  if (!qj.is_array() || static_cast<int>(qj.size()) != n) r.fail("Q", "expected an N x N array of rows");
  Matrix q(n, n);
  for (int i = 0; i < n; ++i) {
    if (!qj[i].is_array() || static_cast<int>(qj[i].size()) != n) r.fail("Q", "row " + std::to_string(i) + " has the wrong length");
    for (int k = 0; k < n; ++k) {
      if (!qj[i][k].is_number()) r.fail("Q", "non-numeric entry");
      q(i, k) = qj[i][k].get<double>();
    }
  }

  ObjectReader mr(r.at("metadata"), "metadata");
  meta.mode = mr.get_or<std::string>("mode", meta.mode);
  if (mr.has("bandwidth")) meta.bandwidth = mr.get<int>("bandwidth");
  meta.seed = mr.get_or<std::uint64_t>("seed", 0);
  meta.residual = mr.get_or("residual", 0.0);
  meta.tool_version = mr.get_or<std::string>("tool_version", "");
  mr.finish();
  r.finish();
  return {FsbpOperator{std::move(*grid), std::move(p), std::move(q), space_name, constants_exact}, space_desc, meta,
          schema};
}

inline void write_operator(const std::string& path, const OperatorFile& f) { write_text(path, to_json(f).dump(2) + "\n"); }

inline OperatorFile read_operator(const std::string& path) {
  const auto text = read_text(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("operator file '" + path + "' is malformed: " + e.what());
  }
  return operator_from_json(j);
}

// ---------------------------------------------------------------------------
// Reports and CSV

inline json to_json(const OptimizationReport& r) {
  return {{"status", std::string(to_string(r.status))},
          {"final_objective", r.final_objective},
          {"final_grad_norm", r.final_grad_norm},
          {"iterations", r.iterations},
          {"restarts_used", r.restarts_used},
          {"objective_history", r.objective_history}};
}

inline json to_json(const VerificationReport& v) {
  return {{"sbp_defect", v.sbp_defect},
          {"exactness_defect", v.exactness_defect},
          {"min_weight", v.min_weight},
          {"constants_defect", v.constants_defect},
          {"spectral_norm_D", v.spectral_norm_d},
          {"pass", v.pass}};
}

inline std::string format_double(double v) {
  std::ostringstream ss;
  ss.precision(17);
  ss << v;
  return ss.str();
}

/// Columns: n_total,blocks,h,error,order (order empty on the first row).
inline std::string convergence_csv(const ConvergenceTable& t) {
  std::string out = "n_total,blocks,h,error,order\n";
  for (const auto& r : t.rows) {
    out += std::to_string(r.n_total) + "," + std::to_string(r.blocks) + "," + format_double(r.h) + "," +
           format_double(r.error) + "," + (std::isnan(r.order) ? "" : format_double(r.order)) + "\n";
  }
  return out;
}

inline std::string probability_csv(const std::vector<double>& t, const std::vector<double>& prob) {
  std::string out = "t,probability_norm\n";
  for (std::size_t i = 0; i < t.size(); ++i) out += format_double(t[i]) + "," + format_double(prob[i]) + "\n";
  return out;
}

inline std::string state_csv(const Vector& x, const Vector& u1, const Vector& u2) {
  std::string out = "x,u1,u2,abs_psi_sq\n";
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    out += format_double(x[i]) + "," + format_double(u1[i]) + "," + format_double(u2[i]) + "," +
           format_double(u1[i] * u1[i] + u2[i] * u2[i]) + "\n";
  }
  return out;
}

}  // namespace fsbp::io
