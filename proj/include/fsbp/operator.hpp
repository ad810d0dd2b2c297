#pragma once

#include <string>
#include <utility>

#include "fsbp/basis.hpp"
#include "fsbp/parametrize.hpp"

namespace fsbp {

/// Diagonal-norm SBP operator D = P^{-1} Q on a grid.
struct FsbpOperator {
  Grid grid;
  Vector p;
  Matrix q;
  std::string space_name;
  bool constants_exact = true;

  int size() const { return grid.size(); }
  Matrix derivative() const { return p.cwiseInverse().asDiagonal() * q; }
};

/// Q = S + B/2 with P = diag(p).
inline FsbpOperator assemble_operator(const Grid& grid, const SkewMatrix& s, const NormMatrix& p,
                                      std::string space_name) {
  if (s.size() != grid.size() || p.p.size() != grid.size()) throw Error("operator parts do not match the grid");
  Matrix q = s.dense();
  q(0, 0) = -0.5;
  q(grid.size() - 1, grid.size() - 1) = 0.5;
  return {grid, p.p, std::move(q), std::move(space_name), p.constants_exact};
}

}  // namespace fsbp
