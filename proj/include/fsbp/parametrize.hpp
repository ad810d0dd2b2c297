#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fsbp/basis.hpp"

namespace fsbp {

/// How the unconstrained pre-weights rho map to the diagonal of P.
enum class NormMode { logistic_normalized, logistic_raw, softmax };

inline std::string_view to_string(NormMode m) {
  switch (m) {
    case NormMode::logistic_normalized: return "logistic_normalized";
    case NormMode::logistic_raw: return "logistic_raw";
    case NormMode::softmax: return "softmax";
  }
  return "?";
}

inline NormMode parse_norm_mode(std::string_view s) {
  if (s == "logistic_normalized") return NormMode::logistic_normalized;
  if (s == "logistic_raw") return NormMode::logistic_raw;
  if (s == "softmax") return NormMode::softmax;
  throw Error("unknown parametrization mode '" + std::string(s) + "'");
}

inline void check_bandwidth(int n, std::optional<int> bandwidth) {
  if (bandwidth && (*bandwidth < 1 || *bandwidth >= n)) {
    throw Error("bandwidth must satisfy 1 <= w < N (got w = " + std::to_string(*bandwidth) +
                ", N = " + std::to_string(n) + ")");
  }
}

/// Parametrized strict-upper-triangle positions (k, l), k < l, row-major,
/// restricted to l - k <= w in banded mode.
inline std::vector<std::pair<int, int>> skew_index_pairs(int n, std::optional<int> bandwidth) {
  check_bandwidth(n, bandwidth);
  const int w = bandwidth.value_or(n - 1);
  std::vector<std::pair<int, int>> pairs;
  for (int k = 0; k < n; ++k) {
    for (int l = k + 1; l <= std::min(n - 1, k + w); ++l) pairs.emplace_back(k, l);
  }
  return pairs;
}

inline int skew_param_count(int n, std::optional<int> bandwidth) {
  return static_cast<int>(skew_index_pairs(n, bandwidth).size());
}

/// Optimization variables: sigma fills the skew part, rho the quadrature weights.
struct ParamVector {
  Vector sigma;
  Vector rho;

  Eigen::Index size() const { return sigma.size() + rho.size(); }

  Vector flatten() const {
    Vector z(size());
    z << sigma, rho;
    return z;
  }

  static ParamVector unflatten(const Vector& z, Eigen::Index sigma_len) {
    return {z.head(sigma_len), z.tail(z.size() - sigma_len)};
  }
};

/// Skew-symmetric matrix stored as its strict upper triangle so that
/// S^T = -S holds exactly.
class SkewMatrix {
public:
  SkewMatrix(int n, std::optional<int> bandwidth, Vector upper)
      : n_(n), bandwidth_(bandwidth), pairs_(skew_index_pairs(n, bandwidth)), upper_(std::move(upper)) {
    if (upper_.size() != static_cast<Eigen::Index>(pairs_.size())) {
      throw Error("skew parameter length " + std::to_string(upper_.size()) + " does not match " +
                  std::to_string(pairs_.size()) + " for N = " + std::to_string(n));
    }
  }

  int size() const { return n_; }
  std::optional<int> bandwidth() const { return bandwidth_; }
  const Vector& upper() const { return upper_; }
  const std::vector<std::pair<int, int>>& pairs() const { return pairs_; }

  Matrix dense() const {
    Matrix s = Matrix::Zero(n_, n_);
    for (std::size_t i = 0; i < pairs_.size(); ++i) {
      const auto [k, l] = pairs_[i];
      s(k, l) = upper_[static_cast<Eigen::Index>(i)];
      s(l, k) = -upper_[static_cast<Eigen::Index>(i)];
    }
    return s;
  }

private:
  int n_;
  std::optional<int> bandwidth_;
  std::vector<std::pair<int, int>> pairs_;
  Vector upper_;
};

inline SkewMatrix skew_from_params(const Vector& sigma, int n, std::optional<int> bandwidth = std::nullopt) {
  return SkewMatrix(n, bandwidth, sigma);
}

/// Inverse of skew_from_params. Rejects inputs that are not skew, or that have
/// entries outside the band.
inline Vector params_from_skew(const Matrix& s, std::optional<int> bandwidth = std::nullopt) {
  if (s.rows() != s.cols()) throw Error("skew matrix must be square");
  const int n = static_cast<int>(s.rows());
  if ((s + s.transpose()).cwiseAbs().maxCoeff() > 1e-12) throw Error("matrix is not skew-symmetric");
  const auto pairs = skew_index_pairs(n, bandwidth);
  if (bandwidth) {
    for (int k = 0; k < n; ++k) {
      for (int l = k + *bandwidth + 1; l < n; ++l) {
        if (s(k, l) != 0.0) throw Error("skew matrix has entries outside the band");
      }
    }
  }
  Vector sigma(static_cast<Eigen::Index>(pairs.size()));
  for (std::size_t i = 0; i < pairs.size(); ++i) sigma[static_cast<Eigen::Index>(i)] = s(pairs[i].first, pairs[i].second);
  return sigma;
}

inline Vector params_from_skew(const SkewMatrix& s) { return s.upper(); }

/// Diagonal of the norm matrix P.
struct NormMatrix {
  Vector p;
  Interval interval;
  bool constants_exact = true;
};

namespace detail {

inline constexpr double kSigmoidFloor = 1e-300;

inline double logistic(double r) {
  const double s = r >= 0.0 ? 1.0 / (1.0 + std::exp(-r)) : std::exp(r) / (1.0 + std::exp(r));
  return std::clamp(s, kSigmoidFloor, 1.0 - kSigmoidFloor);
}

}  // namespace detail

inline NormMatrix norm_from_params(const Vector& rho, const Interval& interval, NormMode mode) {
  if (!rho.allFinite()) throw Error("pre-weights must be finite");
  const double len = interval.length();
  NormMatrix out{Vector(rho.size()), interval, mode != NormMode::logistic_raw};
  switch (mode) {
    case NormMode::logistic_raw:
      out.p = rho.unaryExpr([](double r) { return detail::logistic(r); });
      break;
    case NormMode::logistic_normalized: {
      const Vector s = rho.unaryExpr([](double r) { return detail::logistic(r); });
      out.p = s * (len / s.sum());
      break;
    }
    case NormMode::softmax: {
      const Vector e = (rho.array() - rho.maxCoeff()).exp().matrix();
      out.p = e * (len / e.sum());
      break;
    }
  }
  return out;
}

/// X = [S | diag(p)], N x 2N.
inline Matrix assemble_x(const SkewMatrix& s, const NormMatrix& p) {
  const int n = s.size();
  if (p.p.size() != n) throw Error("skew and norm sizes differ");
  Matrix x = Matrix::Zero(n, 2 * n);
  x.leftCols(n) = s.dense();
  x.rightCols(n).diagonal() = p.p;
  return x;
}

}  // namespace fsbp
