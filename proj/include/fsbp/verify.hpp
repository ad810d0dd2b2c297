#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "fsbp/basis.hpp"
#include "fsbp/operator.hpp"
#include "fsbp/objective.hpp"

namespace fsbp {

struct VerifyTolerances {
  double sbp = 1e-10;
  double exactness = 1e-10;
  double constants = 1e-10;

  VerifyTolerances() = default;
  explicit VerifyTolerances(double tol) : sbp(tol), exactness(tol), constants(tol) {}
  VerifyTolerances(double sbp_tol, double exact_tol, double constants_tol)
      : sbp(sbp_tol), exactness(exact_tol), constants(constants_tol) {}
};

struct VerificationReport {
  double sbp_defect = 0.0;         // max |Q + Q^T - B|
  double exactness_defect = 0.0;   // max |D V - Vx|
  double min_weight = 0.0;
  double constants_defect = 0.0;   // |sum p - (x_R - x_L)|
  double spectral_norm_d = 0.0;
  bool pass = false;
};

namespace detail {

// Power iteration on M^T M from v; returns the Rayleigh estimate of sigma_max^2.
inline double power_iterate(const Matrix& mtm, Vector v, double tol) {
  double lambda = 0.0;
  for (int it = 0; it < 100000; ++it) {
    const Vector w = mtm * v;
    const double next = w.norm();
    if (next == 0.0) return 0.0;
    v = w / next;
    if (std::abs(next - lambda) <= tol * next) return next;
    lambda = next;
  }
  throw Error("spectral_norm: power iteration did not converge");
}

}  // namespace detail

/// Largest singular value by power iteration on M^T M, started from the
/// normalized all-ones vector. A second run from a ramp covers operators whose
/// symmetry keeps the all-ones iterate out of the dominant subspace.
/// Throws after 1e5 iterations without convergence.
inline double spectral_norm(const Matrix& m, double tol = 1e-12) {
  if (!(tol > 0.0)) throw Error("spectral_norm tolerance must be positive");
  if (m.size() == 0) return 0.0;
  const Matrix mtm = m.transpose() * m;
  const Eigen::Index n = mtm.cols();
  const double even = detail::power_iterate(mtm, Vector::Ones(n).normalized(), tol);
  const double ramp = detail::power_iterate(mtm, Vector::LinSpaced(n, 1.0, static_cast<double>(n)).normalized(), tol);
  return std::sqrt(std::max(even, ramp));
}

inline VerificationReport check_operator(const FsbpOperator& op, const FunctionSpace& space,
                                         const VerifyTolerances& tol) {
  VerificationReport rep;
  const int n = op.size();
  rep.sbp_defect = (op.q + op.q.transpose() - boundary_matrix(n)).cwiseAbs().maxCoeff();
  rep.min_weight = op.p.minCoeff();
  rep.constants_defect = std::abs(op.p.sum() - op.grid.interval().length());
  const Matrix d = op.derivative();
  try {
    const auto pair = evaluate_vandermonde(space, op.grid);
    rep.exactness_defect = (d * pair.values - pair.derivs).cwiseAbs().maxCoeff();
  } catch (const Error&) {
    rep.exactness_defect = std::numeric_limits<double>::infinity();
  }
  try {
    rep.spectral_norm_d = spectral_norm(d);
  } catch (const Error&) {
    rep.spectral_norm_d = std::numeric_limits<double>::quiet_NaN();
  }
  const bool constants_ok = !op.constants_exact || rep.constants_defect <= tol.constants;
  rep.pass = std::isfinite(rep.exactness_defect) && rep.sbp_defect <= tol.sbp &&
             rep.exactness_defect <= tol.exactness && rep.min_weight > 0.0 && constants_ok;
  return rep;
}

inline VerificationReport check_operator(const FsbpOperator& op, const FunctionSpace& space, double tol) {
  return check_operator(op, space, VerifyTolerances(tol));
}

/// |sum_n p_n f(x_n) - exact|
inline double quadrature_error(const FsbpOperator& op, const std::function<double(double)>& probe,
                               double exact_integral) {
  double sum = 0.0;
  for (int i = 0; i < op.size(); ++i) sum += op.p[i] * probe(op.grid[i]);
  return std::abs(sum - exact_integral);
}

}  // namespace fsbp
