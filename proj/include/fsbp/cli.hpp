#pragma once

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fsbp/fixtures.hpp"
#include "fsbp/io.hpp"

namespace fsbp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailed = 1;
inline constexpr int kExitUsage = 2;

/// Seed precedence: command-line flag, then FSBP_SEED, then the config file.
inline std::uint64_t resolve_seed(std::uint64_t from_config, const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("FSBP_SEED"); env && *env) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(env, &used);
      if (used != std::string(env).size()) throw std::invalid_argument("trailing characters");
      return v;
    } catch (const std::exception&) {
      throw io::ConfigError(std::string("FSBP_SEED: not an unsigned integer: '") + env + "'");
    }
  }
  return from_config;
}

template <class T>
const T& require_section(const std::optional<T>& section, const char* name, const std::string& path) {
  if (!section) throw io::ConfigError(std::string(name) + ": section missing from '" + path + "'");
  return *section;
}

inline io::json report_json(const Construction& c) {
  return {{"optimization", io::to_json(c.report)},
          {"verification", io::to_json(c.verification)},
          {"retained_dim", c.retained_dim},
          {"dropped_columns", c.dropped_columns}};
}

struct Args {
  std::string config;
  std::string operator_path;
  std::string report_path;
  std::string csv_path;
  std::string series_path;
  std::string snapshot_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> tolerance;
};

inline int do_construct(const Args& a, std::ostream& out) {
  auto cfg = require_section(io::load_config(a.config).construct, "construct", a.config);
  cfg.optimizer.rng_seed = resolve_seed(cfg.optimizer.rng_seed, a.seed);
  if (!a.operator_path.empty()) cfg.operator_path = a.operator_path;
  if (!a.report_path.empty()) cfg.report_path = a.report_path;
  const Grid grid = cfg.grid.build();
  const auto space = make_builtin_space(cfg.space);

  const auto c = construct_operator(space, grid, cfg.mode, cfg.bandwidth, cfg.optimizer, cfg.rank_tol);
  const bool ok = c.report.status == OptStatus::converged;
  auto report = report_json(c);
  report["operator_out"] = ok ? io::json(cfg.operator_path) : io::json(nullptr);
  io::write_text(cfg.report_path, report.dump(2) + "\n");
  if (ok) {
    io::OperatorMetadata meta{std::string(to_string(cfg.mode)), cfg.bandwidth, cfg.optimizer.rng_seed,
                              std::sqrt(c.report.final_objective)};
    io::write_operator(cfg.operator_path, io::OperatorFile{c.op, cfg.space, meta});
  }
  out << space.name << " N=" << grid.size() << ": " << to_string(c.report.status)
      << " F=" << c.report.final_objective << " iterations=" << c.report.iterations << "\n";
  return ok ? kExitOk : kExitFailed;
}

inline int do_verify(const Args& a, std::ostream& out) {
  const auto file = io::read_operator(a.operator_path);
  io::VerifyConfig vc;
  if (!a.config.empty()) {
    if (auto v = io::load_config(a.config).verify) vc = *v;
  }
  if (a.tolerance) {
    if (!(*a.tolerance > 0.0)) throw io::ConfigError("--tol: must be positive");
    vc.tolerance = *a.tolerance;
  }
  const auto desc = vc.space ? vc.space : file.space;
  if (!desc) throw io::ConfigError("verify.space: operator file has no space descriptor; supply one in the config");
  const auto rep = check_operator(file.op, make_builtin_space(*desc), vc.tolerance);
  out << io::to_json(rep).dump(2) << "\n";
  return rep.pass ? kExitOk : kExitFailed;
}

inline int do_convergence(const Args& a, std::ostream& out) {
  auto cfg = require_section(io::load_config(a.config).convergence, "convergence", a.config);
  cfg.optimizer.rng_seed = resolve_seed(cfg.optimizer.rng_seed, a.seed);
  if (!a.csv_path.empty()) cfg.csv_path = a.csv_path;
  AdvectionStudy study;
  study.grid_kind = cfg.grid_kind;
  study.mode = cfg.mode;
  study.bandwidth = cfg.bandwidth;
  study.optimizer = cfg.optimizer;
  study.end_time = cfg.end_time;
  study.cfl = cfg.cfl;
  std::vector<Resolution> grids;
  for (int b : cfg.blocks) grids.push_back({b, cfg.nodes});
  const auto table = advection_convergence(make_builtin_space(cfg.space), grids, study);
  const auto csv = io::convergence_csv(table);
  io::write_text(cfg.csv_path, csv);
  out << csv << "fitted order: " << table.fitted_order << "\n";
  return kExitOk;
}

inline int do_schrodinger(const Args& a, std::ostream& out) {
  auto cfg = require_section(io::load_config(a.config).schrodinger, "schrodinger", a.config);
  cfg.run.optimizer.rng_seed = resolve_seed(cfg.run.optimizer.rng_seed, a.seed);
  if (!a.series_path.empty()) cfg.series_path = a.series_path;
  if (!a.snapshot_path.empty()) cfg.snapshot_path = a.snapshot_path;
  const auto run = schrodinger_run(cfg.run);
  io::write_text(cfg.series_path, io::probability_csv(run.times, run.probability));
  io::write_text(cfg.snapshot_path, io::state_csv(run.x, run.u1, run.u2));
  out << "dt=" << run.dt << " steps=" << std::ceil(cfg.run.end_time / run.dt) << " relative drift=" << run.relative_drift()
      << "\n";
  return kExitOk;
}

inline int do_fixtures(std::ostream& out) {
  bool all = true;
  for (const auto& f : fixtures::all()) {
    const auto rep = check_operator(f.op, make_builtin_space(f.space), f.tolerances);
    all = all && rep.pass;
    out << (rep.pass ? "PASS " : "FAIL ") << f.name << " sbp=" << rep.sbp_defect << " exact=" << rep.exactness_defect
        << " min_p=" << rep.min_weight << " sum_p_err=" << rep.constants_defect << " |D|_2=" << rep.spectral_norm_d
        << "\n";
  }
  return all ? kExitOk : kExitFailed;
}

/// Entry point shared by the executable and the tests.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Function-space SBP operator construction and verification", "fsbp"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(io::kToolVersion));
  Args a;

  auto* construct = app.add_subcommand("construct", "Build an operator from a config file");
  construct->add_option("--config", a.config, "JSON config with a 'construct' section")->required();
  construct->add_option("--out", a.operator_path, "Operator file (overrides config)");
  construct->add_option("--report", a.report_path, "Report file (overrides config)");
  construct->add_option("--seed", a.seed, "RNG seed for restarts");

  auto* verify = app.add_subcommand("verify", "Check an operator file");
  verify->add_option("--operator", a.operator_path, "Operator file")->required();
  verify->add_option("--config", a.config, "JSON config with an optional 'verify' section");
  verify->add_option("--tol", a.tolerance, "Verification tolerance");

  auto* convergence = app.add_subcommand("convergence", "Advection convergence study");
  convergence->add_option("--config", a.config, "JSON config with a 'convergence' section")->required();
  convergence->add_option("--csv", a.csv_path, "Output CSV (overrides config)");
  convergence->add_option("--seed", a.seed, "RNG seed for restarts");

  auto* schrodinger = app.add_subcommand("schrodinger", "Harmonic-oscillator Schroedinger run");
  schrodinger->add_option("--config", a.config, "JSON config with a 'schrodinger' section")->required();
  schrodinger->add_option("--series", a.series_path, "Probability time series CSV");
  schrodinger->add_option("--snapshot", a.snapshot_path, "Final state CSV");
  schrodinger->add_option("--seed", a.seed, "RNG seed for restarts");

  auto* fixtures = app.add_subcommand("fixtures", "Verify the embedded reference operators");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (construct->parsed()) return do_construct(a, out);
    if (verify->parsed()) return do_verify(a, out);
    if (convergence->parsed()) return do_convergence(a, out);
    if (schrodinger->parsed()) return do_schrodinger(a, out);
    if (fixtures->parsed()) return do_fixtures(out);
  } catch (const io::ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailed;
  }
  return kExitUsage;
}

}  // namespace fsbp::cli
