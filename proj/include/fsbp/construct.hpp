#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "fsbp/basis.hpp"
#include "fsbp/lbfgs.hpp"
#include "fsbp/objective.hpp"
#include "fsbp/operator.hpp"
#include "fsbp/parametrize.hpp"
#include "fsbp/verify.hpp"

namespace fsbp {

inline std::pair<ParamVector, OptimizationReport> lbfgs_minimize(const ObjectiveContext& ctx, const ParamVector& start,
                                                                 const OptimizerOptions& opts) {
  check_param_shape(ctx, start);
  const Eigen::Index ns = ctx.sigma_size();
  auto fg = [&ctx, ns](const Vector& z, Vector& g) {
    const ParamVector params = ParamVector::unflatten(z, ns);
    ParamVector grad;
    const double f = objective_with_gradient(ctx, params, grad);
    g = grad.flatten();
    return f;
  };
  auto [z, rep] = lbfgs_minimize(fg, start.flatten(), opts);
  return {ParamVector::unflatten(z, ns), std::move(rep)};
}

struct Construction {
  FsbpOperator op;  // best candidate; certified only when report.status == converged
  OptimizationReport report;
  ParamVector params;
  VerificationReport verification;
  int retained_dim = 0;
  std::vector<int> dropped_columns;
};

/// Tolerances a converged operator is certified against: 10 sqrt(objective_tol),
/// with the exactness bound scaled by the magnitude of the declared basis.
inline VerifyTolerances certification_tolerances(const VandermondePair& original, double objective_tol) {
  const double cert = 10.0 * std::sqrt(objective_tol);
  const double scale = std::max({1.0, original.values.cwiseAbs().maxCoeff(), original.derivs.cwiseAbs().maxCoeff()});
  return {cert, cert * scale, cert};
}

/// Orthonormalize the basis, then minimize from sigma = rho = 0 and, if needed,
/// from seeded Gaussian restarts. The first restart (by index) that converges wins.
/// A run that reaches objective_tol but fails certification is polished with up to
/// three further runs at a 100x tighter objective before it is rejected.
inline Construction construct_operator(const FunctionSpace& space, const Grid& grid,
                                       NormMode mode = NormMode::logistic_normalized,
                                       std::optional<int> bandwidth = std::nullopt,
                                       const OptimizerOptions& opts = {}, double rank_tol = 1e-10) {
  if (space.dim < 1) throw Error("function space must have dimension >= 1");
  opts.validate();
  check_bandwidth(grid.size(), bandwidth);
  const auto original = evaluate_vandermonde(space, grid);
  const auto ortho = orthonormalize(original, rank_tol);
  const auto ctx = make_objective_context(ortho.pair, grid.interval(), mode, bandwidth);
  const auto tol = certification_tolerances(original, opts.objective_tol);

  auto build = [&](const ParamVector& params) {
    return assemble_operator(grid, skew_from_params(params.sigma, grid.size(), bandwidth),
                             norm_from_params(params.rho, grid.interval(), mode), space.name);
  };

  std::optional<Construction> best;
  int total_iters = 0;
  int attempts = 0;
  for (int attempt = 0; attempt <= opts.max_restarts; ++attempt) {
    attempts = attempt;
    ParamVector start{Vector::Zero(ctx.sigma_size()), Vector::Zero(ctx.nodes())};
    if (attempt > 0) {
      std::mt19937_64 rng(opts.rng_seed + static_cast<std::uint64_t>(attempt));
      std::normal_distribution<double> normal(0.0, 1.0);
      for (auto& v : start.sigma) v = opts.init_scale * normal(rng);
      for (auto& v : start.rho) v = opts.init_scale * normal(rng);
    }
    auto [params, report] = lbfgs_minimize(ctx, start, opts);
    total_iters += report.iterations;
    auto op = build(params);
    auto check = check_operator(op, space, tol);

    OptimizerOptions polish = opts;
    for (int round = 0; round < 3 && report.status == OptStatus::converged && !check.pass; ++round) {
      polish.objective_tol /= 100.0;
      auto [p2, r2] = lbfgs_minimize(ctx, params, polish);
      total_iters += r2.iterations;
      r2.objective_history.insert(r2.objective_history.begin(), report.objective_history.begin(),
                                  report.objective_history.end() - 1);
      const bool reached = r2.status == OptStatus::converged;
      params = std::move(p2);
      report = std::move(r2);
      report.status = reached ? OptStatus::converged : OptStatus::stalled;
      op = build(params);
      check = check_operator(op, space, tol);
    }
    if (report.status == OptStatus::converged && !check.pass) report.status = OptStatus::stalled;

    const bool done = report.status == OptStatus::converged;
    if (!best || done || report.final_objective < best->report.final_objective) {
      best = Construction{std::move(op), std::move(report), std::move(params), check, ortho.retained, ortho.dropped};
    }
    if (done) break;
  }

  if (best->report.status != OptStatus::converged) best->report.status = OptStatus::infeasible;
  best->report.iterations = total_iters;
  best->report.restarts_used = attempts;
  return std::move(*best);
}

}  // namespace fsbp
