#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "fsbp/error.hpp"

namespace fsbp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Interval {
  double left = -1.0;
  double right = 1.0;

  Interval() = default;
  Interval(double l, double r) : left(l), right(r) {
    if (!(std::isfinite(l) && std::isfinite(r) && l < r)) {
      throw Error("interval requires finite x_left < x_right");
    }
  }

  double length() const { return right - left; }
  bool operator==(const Interval&) const = default;
};

/// Ordered nodes on an interval; both endpoints are nodes.
class Grid {
public:
  Grid(Interval interval, std::vector<double> nodes)
      : interval_(interval), nodes_(std::move(nodes)) {
    if (nodes_.size() < 2) throw Error("grid needs at least two nodes");
    if (nodes_.front() != interval_.left || nodes_.back() != interval_.right) {
      throw Error("grid endpoints must coincide with the interval boundary");
    }
    for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) {
      if (!(nodes_[i] < nodes_[i + 1])) throw Error("grid nodes must be strictly increasing");
    }
  }

  const Interval& interval() const { return interval_; }
  const std::vector<double>& nodes() const { return nodes_; }
  int size() const { return static_cast<int>(nodes_.size()); }
  double operator[](int i) const { return nodes_[static_cast<std::size_t>(i)]; }

  double min_spacing() const {
    double h = interval_.length();
    for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) h = std::min(h, nodes_[i + 1] - nodes_[i]);
    return h;
  }

  Vector as_vector() const { return Eigen::Map<const Vector>(nodes_.data(), size()); }

private:
  Interval interval_;
  std::vector<double> nodes_;
};

enum class GridKind { equidistant, chebyshev_lobatto, gauss_lobatto };

namespace detail {

// Legendre-Gauss-Lobatto nodes on [-1, 1], ascending.
inline std::vector<double> lobatto_reference_nodes(int n) {
  const int deg = n - 1;
  std::vector<double> x(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) x[i] = -std::cos(std::numbers::pi * i / deg);
  if (deg == 1) return x;
  for (int i = 1; i < deg; ++i) {
    double xi = x[i];
    for (int it = 0; it < 100; ++it) {
      double p_prev = 1.0, p = xi;
      for (int k = 2; k <= deg; ++k) {
        const double p_next = ((2.0 * k - 1.0) * xi * p - (k - 1.0) * p_prev) / k;
        p_prev = p;
        p = p_next;
      }
      const double step = (xi * p - p_prev) / (deg * p);
      xi -= step;
      if (std::abs(step) < 1e-16) break;
    }
    x[i] = xi;
  }
  return x;
}

}  // namespace detail

inline Grid make_grid(Interval interval, GridKind kind, int n) {
  if (n < 2) throw Error("grid needs at least two nodes");
  std::vector<double> nodes(static_cast<std::size_t>(n));
  const double a = interval.left, b = interval.right;
  std::vector<double> ref;
  switch (kind) {
    case GridKind::equidistant:
      for (int i = 0; i < n; ++i) nodes[i] = a + (b - a) * i / (n - 1.0);
      break;
    case GridKind::chebyshev_lobatto:
      for (int i = 0; i < n; ++i) {
        nodes[i] = a + 0.5 * (b - a) * (1.0 - std::cos(std::numbers::pi * i / (n - 1.0)));
      }
      break;
    case GridKind::gauss_lobatto:
      ref = detail::lobatto_reference_nodes(n);
      for (int i = 0; i < n; ++i) nodes[i] = a + 0.5 * (b - a) * (ref[i] + 1.0);
      break;
  }
  nodes.front() = a;
  nodes.back() = b;
  return Grid(interval, std::move(nodes));
}

inline Grid make_grid(Interval interval, std::vector<double> nodes) {
  return Grid(interval, std::move(nodes));
}

/// A finite-dimensional space of C1 functions with analytic derivatives.
struct FunctionSpace {
  std::string name;
  int dim = 0;
  std::function<double(int, double)> eval;
  std::function<double(int, double)> eval_deriv;
};

enum class SpaceKind { monomial, exponential, gaussian_advection, hermite_oscillator };

struct SpaceDescriptor {
  SpaceKind kind = SpaceKind::monomial;
  int degree = 0;  // monomial
  int n_max = 10;  // hermite_oscillator

  bool operator==(const SpaceDescriptor&) const = default;
};

inline std::string_view to_string(SpaceKind k) {
  switch (k) {
    case SpaceKind::monomial: return "monomial";
    case SpaceKind::exponential: return "exponential";
    case SpaceKind::gaussian_advection: return "gaussian_advection";
    case SpaceKind::hermite_oscillator: return "hermite_oscillator";
  }
  return "?";
}

inline SpaceKind parse_space_kind(std::string_view s) {
  if (s == "monomial") return SpaceKind::monomial;
  if (s == "exponential") return SpaceKind::exponential;
  if (s == "gaussian_advection") return SpaceKind::gaussian_advection;
  if (s == "hermite_oscillator") return SpaceKind::hermite_oscillator;
  throw Error("unknown space kind '" + std::string(s) + "'");
}

/// Hermite functions psi_n(x) = exp(-x^2/2) H_n(x) for n = 0..n_max, built by
/// recurrence on psi directly so nothing overflows on [-10, 10].
inline std::vector<double> hermite_functions(int n_max, double x) {
  std::vector<double> psi(static_cast<std::size_t>(n_max) + 1);
  psi[0] = std::exp(-0.5 * x * x);
  if (n_max >= 1) psi[1] = 2.0 * x * psi[0];
  for (int n = 1; n < n_max; ++n) psi[n + 1] = 2.0 * x * psi[n] - 2.0 * n * psi[n - 1];
  return psi;
}

/// psi_n' = -x psi_n + 2n psi_{n-1}, from H_n' = 2n H_{n-1}.
inline double hermite_function_deriv(int n, double x) {
  const auto psi = hermite_functions(n, x);
  const double lower = n > 0 ? 2.0 * n * psi[n - 1] : 0.0;
  return -x * psi[n] + lower;
}

inline FunctionSpace make_builtin_space(const SpaceDescriptor& d) {
  switch (d.kind) {
    case SpaceKind::monomial: {
      if (d.degree < 0) throw Error("monomial degree must be non-negative");
      return {"monomial(" + std::to_string(d.degree) + ")", d.degree + 1,
              [](int k, double x) { return std::pow(x, k); },
              [](int k, double x) { return k == 0 ? 0.0 : k * std::pow(x, k - 1); }};
    }
    case SpaceKind::exponential:
      return {"exponential", 3,
              [](int k, double x) { return k == 0 ? 1.0 : k == 1 ? x : std::exp(x); },
              [](int k, double x) { return k == 0 ? 0.0 : k == 1 ? 1.0 : std::exp(x); }};
    case SpaceKind::gaussian_advection: {
      // {x, exp(-(1+x)^2/9), exp(-(3/5+x)^2/9)}
      auto shift = [](int k) { return k == 1 ? 1.0 : 0.6; };
      return {"gaussian_advection", 3,
              [shift](int k, double x) {
                if (k == 0) return x;
                const double y = shift(k) + x;
                return std::exp(-y * y / 9.0);
              },
              [shift](int k, double x) {
                if (k == 0) return 1.0;
                const double y = shift(k) + x;
                return -2.0 * y / 9.0 * std::exp(-y * y / 9.0);
              }};
    }
    case SpaceKind::hermite_oscillator: {
      if (d.n_max < 0) throw Error("hermite n_max must be non-negative");
      // {1, x, psi_0, ..., psi_nmax}
      return {"hermite_oscillator(" + std::to_string(d.n_max) + ")", d.n_max + 3,
              [](int k, double x) {
                if (k == 0) return 1.0;
                if (k == 1) return x;
                return hermite_functions(k - 2, x)[static_cast<std::size_t>(k - 2)];
              },
              [](int k, double x) {
                if (k == 0) return 0.0;
                if (k == 1) return 1.0;
                return hermite_function_deriv(k - 2, x);
              }};
    }
  }
  throw Error("unknown space descriptor");
}

/// Space from user closures; values[k] and derivs[k] describe the k-th basis function.
inline FunctionSpace make_tabulated_space(std::string name,
                                          std::vector<std::function<double(double)>> values,
                                          std::vector<std::function<double(double)>> derivs) {
  if (values.size() != derivs.size()) throw Error("value/derivative closure count mismatch");
  const int dim = static_cast<int>(values.size());
  return {std::move(name), dim, [values](int k, double x) { return values[k](x); },
          [derivs](int k, double x) { return derivs[k](x); }};
}

/// Basis values (V) and derivatives (Vx) on a grid, N x K each.
struct VandermondePair {
  Matrix values;
  Matrix derivs;

  int rows() const { return static_cast<int>(values.rows()); }
  int cols() const { return static_cast<int>(values.cols()); }
};

inline VandermondePair evaluate_vandermonde(const FunctionSpace& space, const Grid& grid) {
  const int n = grid.size(), k = space.dim;
  VandermondePair out{Matrix(n, k), Matrix(n, k)};
  for (int j = 0; j < k; ++j) {
    for (int i = 0; i < n; ++i) {
      const double v = space.eval(j, grid[i]);
      const double dv = space.eval_deriv(j, grid[i]);
      if (!std::isfinite(v) || !std::isfinite(dv)) {
        throw Error("basis function " + std::to_string(j) + " of '" + space.name +
                    "' is not finite at x = " + std::to_string(grid[i]));
      }
      out.values(i, j) = v;
      out.derivs(i, j) = dv;
    }
  }
  return out;
}

/// W = [V; -Vx]
inline Matrix stack_w(const VandermondePair& pair) {
  Matrix w(2 * pair.rows(), pair.cols());
  w.topRows(pair.rows()) = pair.values;
  w.bottomRows(pair.rows()) = -pair.derivs;
  return w;
}

inline VandermondePair unstack_w(const Matrix& w) {
  const auto n = w.rows() / 2;
  return {w.topRows(n), -w.bottomRows(n)};
}

/// Gram matrix of the discrete Sobolev (H1) inner product, V^T V + Vx^T Vx.
inline Matrix sobolev_gram(const VandermondePair& pair) {
  return pair.values.transpose() * pair.values + pair.derivs.transpose() * pair.derivs;
}

enum class GramSchmidtVariant { modified, classical };

struct OrthonormalBasis {
  VandermondePair pair;
  int retained = 0;
  std::vector<int> dropped;  // input column indices judged dependent
};

/// Discrete-Sobolev orthonormalization of the basis columns. The modified variant
/// projects sequentially and repeats the projection once; the classical variant
/// projects against the original column in a single pass.
inline OrthonormalBasis orthonormalize(const VandermondePair& pair, double rank_tol = 1e-10,
                                       GramSchmidtVariant variant = GramSchmidtVariant::modified) {
  if (!(rank_tol > 0.0)) throw Error("rank tolerance must be positive");
  const Matrix w = stack_w(pair);
  Matrix q(w.rows(), w.cols());
  OrthonormalBasis out;
  int r = 0;
  for (int j = 0; j < w.cols(); ++j) {
    Vector v = w.col(j);
    const double before = v.norm();
    if (variant == GramSchmidtVariant::modified) {
      for (int pass = 0; pass < 2; ++pass) {
        for (int l = 0; l < r; ++l) v -= q.col(l).dot(v) * q.col(l);
      }
    } else {
      const Vector coeff = q.leftCols(r).transpose() * w.col(j);
      v -= q.leftCols(r) * coeff;
    }
    const double after = v.norm();
    if (before == 0.0 || after < rank_tol * before) {
      out.dropped.push_back(j);
      continue;
    }
    q.col(r++) = v / after;
  }
  if (r == 0) throw Error("all basis columns are numerically degenerate");
  out.retained = r;
  out.pair = unstack_w(q.leftCols(r));
  return out;
}

}  // namespace fsbp
