#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "fsbp/basis.hpp"
#include "fsbp/parametrize.hpp"

namespace fsbp {

/// B = diag(-1, 0, ..., 0, 1)
inline Matrix boundary_matrix(int n) {
  Matrix b = Matrix::Zero(n, n);
  b(0, 0) = -1.0;
  b(n - 1, n - 1) = 1.0;
  return b;
}

/// Fixed data of the least-squares problem min ||X W + B V / 2||_F^2.
struct ObjectiveContext {
  VandermondePair basis;  // usually Sobolev-orthonormalized
  Matrix w;               // [V; -Vx]
  Matrix half_bv;         // B V / 2
  Interval interval;
  NormMode mode = NormMode::logistic_normalized;
  std::optional<int> bandwidth;
  std::vector<std::pair<int, int>> pairs;

  int nodes() const { return basis.rows(); }
  int sigma_size() const { return static_cast<int>(pairs.size()); }
  int param_size() const { return sigma_size() + nodes(); }
};

inline ObjectiveContext make_objective_context(VandermondePair basis, Interval interval, NormMode mode,
                                               std::optional<int> bandwidth = std::nullopt) {
  const int n = basis.rows();
  if (n < 2) throw Error("objective needs at least two nodes");
  ObjectiveContext ctx;
  ctx.w = stack_w(basis);
  ctx.half_bv = Matrix::Zero(n, basis.cols());
  ctx.half_bv.row(0) = -0.5 * basis.values.row(0);
  ctx.half_bv.row(n - 1) = 0.5 * basis.values.row(n - 1);
  ctx.basis = std::move(basis);
  ctx.interval = interval;
  ctx.mode = mode;
  ctx.bandwidth = bandwidth;
  ctx.pairs = skew_index_pairs(n, bandwidth);
  return ctx;
}

inline void check_param_shape(const ObjectiveContext& ctx, const ParamVector& params) {
  if (params.sigma.size() != ctx.sigma_size() || params.rho.size() != ctx.nodes()) {
    throw Error("parameter dimensions do not match the objective context");
  }
}

/// R = S V - P Vx + B V / 2, evaluated through the triangle of S and the diagonal of P.
inline Matrix residual(const ObjectiveContext& ctx, const ParamVector& params) {
  check_param_shape(ctx, params);
  const Matrix& v = ctx.basis.values;
  const NormMatrix p = norm_from_params(params.rho, ctx.interval, ctx.mode);
  Matrix r = ctx.half_bv - p.p.asDiagonal() * ctx.basis.derivs;
  for (std::size_t i = 0; i < ctx.pairs.size(); ++i) {
    const auto [k, l] = ctx.pairs[i];
    const double s = params.sigma[static_cast<Eigen::Index>(i)];
    r.row(k) += s * v.row(l);
    r.row(l) -= s * v.row(k);
  }
  return r;
}

inline double objective_value(const ObjectiveContext& ctx, const ParamVector& params) {
  return residual(ctx, params).squaredNorm();
}

/// Chain rule from dF/dp (the diagonal of P) back to the pre-weights rho.
inline Vector chain_norm_gradient(const Vector& dp, const Vector& rho, const Interval& interval, NormMode mode) {
  const double len = interval.length();
  switch (mode) {
    case NormMode::logistic_raw:
      return rho.unaryExpr([](double r) {
        const double s = detail::logistic(r);
        return s * (1.0 - s);
      }).cwiseProduct(dp);
    case NormMode::logistic_normalized: {
      const Vector s = rho.unaryExpr([](double r) { return detail::logistic(r); });
      const double total = s.sum();
      const Vector p = s * (len / total);
      const double mean = dp.dot(p) / len;
      const Vector ds = (dp.array() - mean).matrix() * (len / total);
      return ds.cwiseProduct(s.cwiseProduct((1.0 - s.array()).matrix()));
    }
    case NormMode::softmax: {
      const Vector e = (rho.array() - rho.maxCoeff()).exp().matrix();
      const Vector p = e * (len / e.sum());
      const double mean = dp.dot(p) / len;
      return p.cwiseProduct((dp.array() - mean).matrix());
    }
  }
  return dp;
}

/// F and dF/d(sigma, rho). With G = 2R: dF/dsigma_(k,l) = (G V^T)_kl - (G V^T)_lk and
/// dF/dp_n = -(G Vx^T)_nn.
inline double objective_with_gradient(const ObjectiveContext& ctx, const ParamVector& params, ParamVector& grad) {
  const Matrix r = residual(ctx, params);
  const Matrix& v = ctx.basis.values;
  grad.sigma.resize(ctx.sigma_size());
  for (std::size_t i = 0; i < ctx.pairs.size(); ++i) {
    const auto [k, l] = ctx.pairs[i];
    grad.sigma[static_cast<Eigen::Index>(i)] = 2.0 * (r.row(k).dot(v.row(l)) - r.row(l).dot(v.row(k)));
  }
  const Vector dp = -2.0 * r.cwiseProduct(ctx.basis.derivs).rowwise().sum();
  grad.rho = chain_norm_gradient(dp, params.rho, ctx.interval, ctx.mode);
  return r.squaredNorm();
}

inline ParamVector objective_gradient(const ObjectiveContext& ctx, const ParamVector& params) {
  ParamVector g;
  objective_with_gradient(ctx, params, g);
  return g;
}

}  // namespace fsbp
