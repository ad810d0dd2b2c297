#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fsbp/basis.hpp"
#include "fsbp/construct.hpp"
#include "fsbp/operator.hpp"
#include "fsbp/verify.hpp"

namespace fsbp {

// ---------------------------------------------------------------------------
// Time integration

using SnapshotFn = std::function<void(double, const Vector&)>;

/// Classical fourth-order Runge-Kutta. The last step is shortened to land on
/// end_time exactly. Throws on non-finite state.
template <class Rhs>
Vector rk4_integrate(Rhs&& rhs, Vector state, double dt, double end_time, const SnapshotFn& snapshot = {}) {
  if (!(dt > 0.0)) throw Error("time step must be positive");
  if (!(end_time >= 0.0)) throw Error("end time must be non-negative");
  double t = 0.0;
  if (snapshot) snapshot(t, state);
  long step = 0;
  while (t < end_time) {
    double h = dt;
    if (t + h >= end_time || end_time - (t + h) < 1e-12 * dt) h = end_time - t;
    const Vector k1 = rhs(state);
    const Vector k2 = rhs(Vector(state + 0.5 * h * k1));
    const Vector k3 = rhs(Vector(state + 0.5 * h * k2));
    const Vector k4 = rhs(Vector(state + h * k3));
    state += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    ++step;
    t = (h == end_time - t) ? end_time : t + h;
    if (!state.allFinite()) {
      throw Error("non-finite state after step " + std::to_string(step) + " at t = " + std::to_string(t));
    }
    if (snapshot) snapshot(t, state);
  }
  return state;
}

// ---------------------------------------------------------------------------
// Periodic linear advection u_t + u_x = 0, multi-block with upwind SATs

/// Identical blocks of a reference operator tiling a periodic domain.
class AdvectionProblem {
public:
  AdvectionProblem(FsbpOperator reference, int blocks, double end_time, std::function<double(double)> initial,
                   double cfl = 0.2, Interval domain = Interval(-1.0, 1.0))
      : reference_(std::move(reference)), blocks_(blocks), end_time_(end_time), initial_(std::move(initial)),
        cfl_(cfl), domain_(domain) {
    if (blocks_ < 1) throw Error("advection needs at least one block");
    if (!(cfl_ > 0.0)) throw Error("cfl must be positive");
    const Interval& ref = reference_.grid.interval();
    const double block_len = domain_.length() / blocks_;
    scale_ = block_len / ref.length();
    d_ = reference_.derivative() / scale_;
    p_ = reference_.p * scale_;
    const int n = reference_.size();
    x_.resize(static_cast<Eigen::Index>(blocks_) * n);
    for (int b = 0; b < blocks_; ++b) {
      const double left = domain_.left + b * block_len;
      for (int i = 0; i < n; ++i) x_[b * n + i] = left + (reference_.grid[i] - ref.left) * scale_;
    }
  }

  int blocks() const { return blocks_; }
  int block_size() const { return reference_.size(); }
  int total_nodes() const { return blocks_ * block_size(); }
  double end_time() const { return end_time_; }
  double cfl() const { return cfl_; }
  const Interval& domain() const { return domain_; }
  const Vector& nodes() const { return x_; }
  const Matrix& block_derivative() const { return d_; }
  const Vector& block_weights() const { return p_; }
  const std::function<double(double)>& initial() const { return initial_; }

  double min_spacing() const { return reference_.grid.min_spacing() * scale_; }
  double mean_spacing() const { return domain_.length() / (total_nodes() - blocks_); }

  /// dt = cfl h_min / ||D||_2
  double time_step() const { return cfl_ * min_spacing() / spectral_norm(d_); }

  Vector initial_state() const { return x_.unaryExpr([this](double x) { return initial_(x); }); }

  /// Initial data transported to time t, wrapped periodically.
  Vector exact_state(double t) const {
    const double len = domain_.length();
    return x_.unaryExpr([&](double x) {
      double y = std::fmod(x - t - domain_.left, len);
      if (y < 0.0) y += len;
      return initial_(domain_.left + y);
    });
  }

  /// Block-diagonal P energy sum_b e_b^T P_b f_b.
  double energy_product(const Vector& e, const Vector& f) const {
    const int n = block_size();
    double s = 0.0;
    for (int b = 0; b < blocks_; ++b) {
      s += (e.segment(b * n, n).cwiseProduct(p_)).dot(f.segment(b * n, n));
    }
    return s;
  }

private:
  FsbpOperator reference_;
  int blocks_;
  double end_time_;
  std::function<double(double)> initial_;
  double cfl_;
  Interval domain_;
  double scale_ = 1.0;
  Matrix d_;
  Vector p_;
  Vector x_;
};

/// du_b/dt = -D u_b - P^{-1} e_1 (u_b(x_L) - u_{b-1}(x_R)), blocks periodic.
inline Vector advection_rhs(const Vector& state, const AdvectionProblem& problem) {
  const int n = problem.block_size(), nb = problem.blocks();
  if (state.size() != static_cast<Eigen::Index>(n) * nb) throw Error("advection state has the wrong length");
  Vector out(state.size());
  const Matrix& d = problem.block_derivative();
  const double p0 = problem.block_weights()[0];
  for (int b = 0; b < nb; ++b) {
    const int upstream = (b + nb - 1) % nb;
    out.segment(b * n, n).noalias() = -d * state.segment(b * n, n);
    out[b * n] -= (state[b * n] - state[upstream * n + n - 1]) / p0;
  }
  return out;
}

struct AdvectionRun {
  Vector final_state;
  double error = 0.0;  // P-norm of the error at end_time
  double dt = 0.0;
};

inline AdvectionRun advection_solve(const AdvectionProblem& problem) {
  const double dt = problem.time_step();
  auto rhs = [&problem](const Vector& u) { return advection_rhs(u, problem); };
  AdvectionRun run;
  run.dt = dt;
  run.final_state = rk4_integrate(rhs, problem.initial_state(), dt, problem.end_time());
  const Vector e = run.final_state - problem.exact_state(problem.end_time());
  run.error = std::sqrt(problem.energy_product(e, e));
  return run;
}

struct ConvergenceRow {
  int blocks = 0;
  int nodes_per_block = 0;
  int n_total = 0;
  double h = 0.0;
  double error = 0.0;
  double order = std::numeric_limits<double>::quiet_NaN();  // against the previous row
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  double fitted_order = 0.0;
};

/// Least-squares slope of log(error) against log(h).
inline double fitted_order(const std::vector<double>& h, const std::vector<double>& err) {
  const std::size_t n = h.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(h[i]);
    my += std::log(err[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (std::log(h[i]) - mx) * (std::log(err[i]) - my);
    sxx += (std::log(h[i]) - mx) * (std::log(h[i]) - mx);
  }
  return sxy / sxx;
}

struct Resolution {
  int blocks = 1;
  int nodes = 10;  // per block
};

struct AdvectionStudy {
  GridKind grid_kind = GridKind::equidistant;
  NormMode mode = NormMode::logistic_normalized;
  std::optional<int> bandwidth;
  OptimizerOptions optimizer;
  double end_time = 1.0;
  double cfl = 0.2;
  std::function<double(double)> initial = [](double x) { return std::sin(std::numbers::pi * x); };
};

/// One reference operator is built per distinct block size on [-1, 1]; each
/// resolution tiles [-1, 1] with `blocks` copies and is integrated to end_time.
inline ConvergenceTable advection_convergence(const FunctionSpace& space, const std::vector<Resolution>& grids,
                                              const AdvectionStudy& study = {}) {
  if (grids.size() < 3) throw Error("a convergence study needs at least three resolutions");
  std::map<int, FsbpOperator> operators;
  ConvergenceTable table;
  std::vector<double> hs, errs;
  for (const auto& res : grids) {
    auto it = operators.find(res.nodes);
    if (it == operators.end()) {
      auto c = construct_operator(space, make_grid(Interval(-1.0, 1.0), study.grid_kind, res.nodes), study.mode,
                                  study.bandwidth, study.optimizer);
      if (c.report.status != OptStatus::converged) {
        throw Error("operator construction infeasible for " + space.name + " with N = " + std::to_string(res.nodes));
      }
      it = operators.emplace(res.nodes, std::move(c.op)).first;
    }
    AdvectionProblem problem(it->second, res.blocks, study.end_time, study.initial, study.cfl);
    const auto run = advection_solve(problem);
    ConvergenceRow row{res.blocks, res.nodes, problem.total_nodes(), problem.mean_spacing(), run.error};
    if (!table.rows.empty()) {
      const auto& prev = table.rows.back();
      row.order = std::log(prev.error / row.error) / std::log(prev.h / row.h);
    }
    table.rows.push_back(row);
    hs.push_back(row.h);
    errs.push_back(row.error);
  }
  table.fitted_order = fitted_order(hs, errs);
  return table;
}

// ---------------------------------------------------------------------------
// Schroedinger equation psi_t = -i (-psi_xx + V psi), psi = u1 + i u2

/// Semi-discretization du1 = A u2, du2 = -A u1 with A = V - D^2 + P^{-1} B D.
class SchrodingerProblem {
public:
  SchrodingerProblem(FsbpOperator op, std::function<double(double)> potential, double end_time,
                     std::function<std::complex<double>(double)> initial_wave, std::optional<double> dt = std::nullopt,
                     double cfl = 0.1)
      : op_(std::move(op)), potential_(std::move(potential)), end_time_(end_time), initial_(std::move(initial_wave)) {
    const int n = op_.size();
    const Matrix d = op_.derivative();
    hamiltonian_ = -d * d;
    for (int i = 0; i < n; ++i) hamiltonian_(i, i) += potential_(op_.grid[i]);
    hamiltonian_.row(0) -= d.row(0) / op_.p[0];
    hamiltonian_.row(n - 1) += d.row(n - 1) / op_.p[n - 1];
    if (dt) {
      if (!(*dt > 0.0)) throw Error("time step must be positive");
      dt_ = *dt;
    } else {
      if (!(cfl > 0.0)) throw Error("cfl must be positive");
      dt_ = cfl / spectral_norm(hamiltonian_);
    }
  }

  int size() const { return op_.size(); }
  const FsbpOperator& op() const { return op_; }
  const Matrix& hamiltonian() const { return hamiltonian_; }
  double end_time() const { return end_time_; }
  double dt() const { return dt_; }

  /// State layout [u1; u2].
  Vector initial_state() const {
    const int n = size();
    Vector s(2 * n);
    for (int i = 0; i < n; ++i) {
      const auto psi = initial_(op_.grid[i]);
      s[i] = psi.real();
      s[n + i] = psi.imag();
    }
    return s;
  }

  /// u1^T P u1 + u2^T P u2
  double probability(const Vector& state) const {
    const int n = size();
    return state.head(n).cwiseProduct(op_.p).dot(state.head(n)) +
           state.tail(n).cwiseProduct(op_.p).dot(state.tail(n));
  }

private:
  FsbpOperator op_;
  std::function<double(double)> potential_;
  double end_time_;
  std::function<std::complex<double>(double)> initial_;
  Matrix hamiltonian_;
  double dt_ = 0.0;
};

inline Vector schrodinger_rhs(const Vector& state, const SchrodingerProblem& problem) {
  const int n = problem.size();
  if (state.size() != 2 * n) throw Error("Schroedinger state has the wrong length");
  Vector out(2 * n);
  out.head(n).noalias() = problem.hamiltonian() * state.tail(n);
  out.tail(n).noalias() = -problem.hamiltonian() * state.head(n);
  return out;
}

enum class SchrodingerSpace { hermite, polynomial };

struct SchrodingerConfig {
  SchrodingerSpace space = SchrodingerSpace::hermite;
  int n = 100;
  double end_time = std::numbers::pi / 2.0;
  std::optional<double> dt;
  double cfl = 0.1;
  int snapshot_every = 100;  // steps between probability samples
  OptimizerOptions optimizer = [] {
    OptimizerOptions o;
    o.memory = 30;
    o.objective_tol = 1e-16;
    return o;
  }();
  std::function<std::complex<double>(double)> initial = [](double x) {
    return std::complex<double>(std::exp(-(x - 2.5) * (x - 2.5)), 0.0);
  };
};

struct SchrodingerRun {
  FsbpOperator op;
  OptimizationReport construction;
  double dt = 0.0;
  std::vector<double> times;
  std::vector<double> probability;
  Vector x;
  Vector u1;
  Vector u2;

  double relative_drift() const { return std::abs(probability.back() - probability.front()) / probability.front(); }
};

inline FunctionSpace schrodinger_space(SchrodingerSpace s) {
  return s == SchrodingerSpace::hermite ? make_builtin_space({SpaceKind::hermite_oscillator, 0, 10})
                                        : make_builtin_space({SpaceKind::monomial, 4});
}

/// Harmonic potential V = x^2 on [-10, 10] with an FSBP operator on the Hermite
/// space {1, x, psi_0..psi_10} or a degree-4 polynomial operator.
inline SchrodingerRun schrodinger_run(const SchrodingerConfig& cfg) {
  if (cfg.n < 10) throw Error("Schroedinger run needs N >= 10");
  if (cfg.dt && !(*cfg.dt > 0.0)) throw Error("time step must be positive");
  const auto space = schrodinger_space(cfg.space);
  auto c = construct_operator(space, make_grid(Interval(-10.0, 10.0), GridKind::equidistant, cfg.n),
                              NormMode::logistic_normalized, std::nullopt, cfg.optimizer);
  if (c.report.status != OptStatus::converged) throw Error("operator construction infeasible for " + space.name);

  SchrodingerProblem problem(c.op, [](double x) { return x * x; }, cfg.end_time, cfg.initial, cfg.dt, cfg.cfl);
  SchrodingerRun run{c.op, c.report, problem.dt(), {}, {}, c.op.grid.as_vector(), {}, {}};
  long step = 0;
  auto snap = [&](double t, const Vector& s) {
    if (step++ % std::max(1, cfg.snapshot_every) == 0 || t == cfg.end_time) {
      run.times.push_back(t);
      run.probability.push_back(problem.probability(s));
    }
  };
  const Vector fin = rk4_integrate([&problem](const Vector& s) { return schrodinger_rhs(s, problem); },
                                   problem.initial_state(), problem.dt(), cfg.end_time, snap);
  run.u1 = fin.head(cfg.n);
  run.u2 = fin.tail(cfg.n);
  return run;
}

}  // namespace fsbp
