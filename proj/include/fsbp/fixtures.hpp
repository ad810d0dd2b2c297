#pragma once

#include <initializer_list>
#include <string>
#include <vector>

#include "fsbp/basis.hpp"
#include "fsbp/operator.hpp"
#include "fsbp/verify.hpp"

namespace fsbp::fixtures {

// Reference operators printed to four significant figures. Tolerances follow
// from that rounding: 5e-4 per entry, propagated through row sums.
struct Fixture {
  std::string name;
  FsbpOperator op;
  SpaceDescriptor space;
  VerifyTolerances tolerances;
};

inline const VerifyTolerances kRoundedTolerances{1e-3, 5e-3, 1e-3};

namespace detail {

inline FsbpOperator make(const Interval& iv, std::initializer_list<double> p,
                         std::initializer_list<std::initializer_list<double>> q, const std::string& space_name) {
  const int n = static_cast<int>(p.size());
  Vector pv(n);
  int i = 0;
  for (double v : p) pv[i++] = v;
  Matrix qm(n, n);
  i = 0;
  for (const auto& row : q) {
    if (static_cast<int>(row.size()) != n) throw Error("fixture row length mismatch");
    int k = 0;
    for (double v : row) qm(i, k++) = v;
    ++i;
  }
  if (i != n) throw Error("fixture row count mismatch");
  return FsbpOperator{make_grid(iv, GridKind::equidistant, n), pv, qm, space_name, true};
}

}  // namespace detail

/// N = 9 operator exact for polynomials up to degree 4, full Q.
inline Fixture dense_order4_n9() {
  auto op = detail::make(
      {-1.0, 1.0}, {0.0788, 0.3432, 0.1873, 0.2349, 0.3117, 0.2349, 0.1873, 0.3432, 0.0788},
      {{-0.5, 0.6136, 0.005545, -0.09575, -0.07992, 0.02095, 0.04167, 0.008644, -0.01473},
       {-0.6136, 0, 0.3198, 0.3079, 0.1251, -0.09406, -0.08702, 0.03314, 0.008644},
       {-0.005545, -0.3198, 0, 0.142, 0.1949, 0.06355, -0.02978, -0.08702, 0.04167},
       {0.09575, -0.3079, -0.142, 0, 0.178, 0.1858, 0.06355, -0.09406, 0.02095},
       {0.07992, -0.1251, -0.1949, -0.178, 0, 0.178, 0.1949, 0.1251, -0.07992},
       {-0.02095, 0.09406, -0.06355, -0.1858, -0.178, 0, 0.142, 0.3079, -0.09575},
       {-0.04167, 0.08702, 0.02978, -0.06355, -0.1949, -0.142, 0, 0.3198, 0.005545},
       {-0.008644, -0.03314, 0.08702, 0.09406, -0.1251, -0.3079, -0.3198, 0, 0.6136},
       {0.01473, -0.008644, -0.04167, -0.02095, 0.07992, 0.09575, -0.005545, -0.6136, 0.5}},
      "monomial(4)");
  return {"dense_order4_n9", std::move(op), {SpaceKind::monomial, 4}, kRoundedTolerances};
}

/// N = 9 classical diagonal-norm operator (interior order 4, boundary order 2).
inline Fixture classical_order4_n9() {
  auto op = detail::make(
      {-1.0, 1.0}, {0.08854, 0.3073, 0.224, 0.2552, 0.25, 0.2552, 0.224, 0.3073, 0.08854},
      {{-0.5, 0.6146, -0.08333, -0.03125, 0, 0, 0, 0, 0},
       {-0.6146, 0, 0.6146, 0, 0, 0, 0, 0, 0},
       {0.08333, -0.6146, 0, 0.6146, -0.08333, 0, 0, 0, 0},
       {0.03125, 0, -0.6146, 0, 0.6667, -0.08333, 0, 0, 0},
       {0, 0, 0.08333, -0.6667, 0, 0.6667, -0.08333, 0, 0},
       {0, 0, 0, 0.08333, -0.6667, 0, 0.6146, 0, -0.03125},
       {0, 0, 0, 0, 0.08333, -0.6146, 0, 0.6146, -0.08333},
       {0, 0, 0, 0, 0, 0, -0.6146, 0, 0.6146},
       {0, 0, 0, 0, 0, 0.03125, 0.08333, -0.6146, 0.5}},
      "monomial(2)");
  return {"classical_order4_n9", std::move(op), {SpaceKind::monomial, 2}, kRoundedTolerances};
}

/// N = 5 operator on [0, 1] exact for {1, x, e^x}.
inline Fixture exponential_n5() {
  auto op = detail::make({0.0, 1.0}, {0.076, 0.3621, 0.1245, 0.3609, 0.0766},
                         {{-0.5, 0.653, -0.0350, -0.1927, 0.0748},
                          {-0.653, 0, 0.3198, 0.5238, -0.1907},
                          {0.03503, -0.3198, 0, 0.3215, -0.0367},
                          {0.1927, -0.5238, -0.3215, 0, 0.6526},
                          {-0.0748, 0.1907, 0.0367, -0.6526, 0.5}},
                         "exponential");
  return {"exponential_n5", std::move(op), {SpaceKind::exponential}, kRoundedTolerances};
}

/// N = 4 operator on [0, 1] exact (to print precision) for {1, x, e^x}.
inline Fixture exponential_n4() {
  auto op = detail::make({0.0, 1.0}, {0.1413, 0.3301, 0.4159, 0.1127},
                         {{-0.5, 0.5097, 0.0568, -0.0665},
                          {-0.5097, 0, 0.5386, -0.029},
                          {-0.0568, -0.5386, 0, 0.5955},
                          {0.0665, 0.029, -0.5955, 0.5}},
                         "exponential");
  return {"exponential_n4", std::move(op), {SpaceKind::exponential}, kRoundedTolerances};
}

inline std::vector<Fixture> all() { return {dense_order4_n9(), classical_order4_n9(), exponential_n5(), exponential_n4()}; }

}  // namespace fsbp::fixtures
