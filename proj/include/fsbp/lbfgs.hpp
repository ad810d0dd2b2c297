#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fsbp/basis.hpp"

namespace fsbp {

struct OptimizerOptions {
  int memory = 10;
  int max_iters = 20000;
  double objective_tol = 1e-24;
  double grad_tol = 1e-16;
  int max_restarts = 8;
  std::uint64_t rng_seed = 0;
  double init_scale = 0.5;

  void validate() const {
    if (memory < 1) throw Error("optimizer memory must be >= 1");
    if (max_iters < 1) throw Error("optimizer max_iters must be >= 1");
    if (!(objective_tol > 0.0) || !(grad_tol > 0.0)) throw Error("optimizer tolerances must be positive");
    if (max_restarts < 0) throw Error("optimizer max_restarts must be >= 0");
    if (!(init_scale >= 0.0)) throw Error("optimizer init_scale must be non-negative");
  }
};

enum class OptStatus { converged, stalled, infeasible };

inline std::string_view to_string(OptStatus s) {
  switch (s) {
    case OptStatus::converged: return "converged";
    case OptStatus::stalled: return "stalled";
    case OptStatus::infeasible: return "infeasible";
  }
  return "?";
}

struct OptimizationReport {
  OptStatus status = OptStatus::stalled;
  double final_objective = std::numeric_limits<double>::infinity();
  double final_grad_norm = std::numeric_limits<double>::infinity();
  int iterations = 0;
  int restarts_used = 0;
  std::vector<double> objective_history;  // accepted values, starting point first
};

namespace detail {

struct LineSearchResult {
  bool ok = false;
  double step = 0.0;
  double value = 0.0;
  Vector x;
  Vector grad;
};

inline constexpr double kWolfeC1 = 1e-4;
inline constexpr double kWolfeC2 = 0.9;
inline constexpr int kMaxLineSearchEvals = 60;

// Minimizer of the cubic through (a, fa, da) and (b, fb, db), safeguarded into
// the interior of [a, b]; falls back to bisection.
inline double cubic_step(double a, double fa, double da, double b, double fb, double db) {
  const double lo = std::min(a, b), hi = std::max(a, b);
  const double d1 = da + db - 3.0 * (fa - fb) / (a - b);
  const double disc = d1 * d1 - da * db;
  double t = 0.5 * (a + b);
  if (disc >= 0.0) {
    const double d2 = std::copysign(std::sqrt(disc), b - a);
    const double denom = db - da + 2.0 * d2;
    if (denom != 0.0) {
      const double c = b - (b - a) * (db + d2 - d1) / denom;
      if (std::isfinite(c)) t = c;
    }
  }
  const double margin = 0.1 * (hi - lo);
  if (!(t > lo + margin && t < hi - margin)) t = 0.5 * (a + b);
  return t;
}

/// Strong-Wolfe line search (bracketing followed by zoom).
template <class Fn>
LineSearchResult strong_wolfe(Fn& fg, const Vector& x0, double f0, const Vector& g0, const Vector& dir,
                              double step0) {
  const double dphi0 = g0.dot(dir);
  LineSearchResult best{false, 0.0, f0, x0, g0};
  int evals = 0;
  auto probe = [&](double a, double& f, double& df, Vector& x, Vector& g) {
    x = x0 + a * dir;
    f = fg(x, g);
    df = g.dot(dir);
    ++evals;
    if (std::isfinite(f) && f < best.value) best = {false, a, f, x, g};
  };

  double a_prev = 0.0, f_prev = f0, d_prev = dphi0;
  double a = step0;
  Vector x, g;
  double f = 0.0, df = 0.0;

  auto zoom = [&](double lo, double f_lo, double d_lo, double hi, double f_hi, double d_hi) {
    while (evals < kMaxLineSearchEvals) {
      if (std::abs(hi - lo) <= 1e-16 * std::max(1.0, std::abs(lo))) break;
      const double aj = std::isfinite(f_hi) ? cubic_step(lo, f_lo, d_lo, hi, f_hi, d_hi) : 0.5 * (lo + hi);
      double fj, dj;
      probe(aj, fj, dj, x, g);
      if (!std::isfinite(fj) || fj > f0 + kWolfeC1 * aj * dphi0 || fj >= f_lo) {
        hi = aj;
        f_hi = fj;
        d_hi = dj;
      } else {
        if (std::abs(dj) <= -kWolfeC2 * dphi0) return LineSearchResult{true, aj, fj, x, g};
        if (dj * (hi - lo) >= 0.0) {
          hi = lo;
          f_hi = f_lo;
          d_hi = d_lo;
        }
        lo = aj;
        f_lo = fj;
        d_lo = dj;
      }
    }
    return LineSearchResult{};
  };

  for (int i = 0; evals < kMaxLineSearchEvals; ++i) {
    probe(a, f, df, x, g);
    if (!std::isfinite(f) || f > f0 + kWolfeC1 * a * dphi0 || (i > 0 && f >= f_prev)) {
      auto r = zoom(a_prev, f_prev, d_prev, a, f, df);
      return r.ok ? r : best;
    }
    if (std::abs(df) <= -kWolfeC2 * dphi0) return LineSearchResult{true, a, f, x, g};
    if (df >= 0.0) {
      auto r = zoom(a, f, df, a_prev, f_prev, d_prev);
      return r.ok ? r : best;
    }
    a_prev = a;
    f_prev = f;
    d_prev = df;
    a *= 2.0;
  }
  return best;
}

}  // namespace detail

/// Limited-memory BFGS (two-loop recursion) with a strong-Wolfe line search.
/// `fg(x, g)` returns f(x) and writes the gradient into g.
template <class Fn>
std::pair<Vector, OptimizationReport> lbfgs_minimize(Fn&& fg, Vector x, const OptimizerOptions& opts) {
  opts.validate();
  OptimizationReport rep;
  Vector g(x.size());
  double f = fg(x, g);
  rep.objective_history.push_back(f);

  std::deque<Vector> s_hist, y_hist;
  std::deque<double> rho_hist;
  bool fresh_restart = true;

  auto finish = [&](OptStatus st) {
    rep.status = st;
    rep.final_objective = f;
    rep.final_grad_norm = g.norm();
    return std::pair<Vector, OptimizationReport>{x, rep};
  };

  while (true) {
    if (f <= opts.objective_tol) return finish(OptStatus::converged);
    if (g.norm() <= opts.grad_tol || rep.iterations >= opts.max_iters) return finish(OptStatus::stalled);

    // two-loop recursion
    Vector q = -g;
    std::vector<double> alpha(s_hist.size());
    for (std::size_t i = s_hist.size(); i-- > 0;) {
      alpha[i] = rho_hist[i] * s_hist[i].dot(q);
      q -= alpha[i] * y_hist[i];
    }
    if (!s_hist.empty()) q *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    for (std::size_t i = 0; i < s_hist.size(); ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(q);
      q += (alpha[i] - beta) * s_hist[i];
    }
    if (!(q.dot(g) < 0.0)) {
      q = -g;
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
    }

    const double step0 = s_hist.empty() ? std::min(1.0, 1.0 / q.norm()) : 1.0;
    auto ls = detail::strong_wolfe(fg, x, f, g, q, step0);
    ++rep.iterations;

    if (!(ls.value < f)) {
      // no progress along this direction: retry once from steepest descent
      if (s_hist.empty() && fresh_restart) return finish(OptStatus::stalled);
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      fresh_restart = true;
      continue;
    }
    fresh_restart = false;

    Vector s = ls.x - x;
    Vector y = ls.grad - g;
    const double sy = s.dot(y);
    if (sy > 1e-14 * s.norm() * y.norm()) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > opts.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    x = std::move(ls.x);
    g = std::move(ls.grad);
    f = ls.value;
    rep.objective_history.push_back(f);
  }
}

}  // namespace fsbp
