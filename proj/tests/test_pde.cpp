#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fsbp/construct.hpp"
#include "fsbp/pde.hpp"

using namespace fsbp;

namespace {

const FsbpOperator& cubic_operator() {
  static const FsbpOperator op = construct_operator(make_builtin_space({SpaceKind::monomial, 3}),
                                                    make_grid(Interval(-1, 1), GridKind::equidistant, 10))
                                     .op;
  return op;
}

Vector random_vector(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Vector v(n);
  for (auto& x : v) x = nd(rng);
  return v;
}

}  // namespace

TEST(Rk4, ZeroRhsKeepsState) {
  Vector u(3);
  u << 1, -2, 3;
  const Vector out = rk4_integrate([](const Vector& s) { return Vector::Zero(s.size()).eval(); }, u, 0.1, 1.0);
  EXPECT_EQ(out, u);
}

TEST(Rk4, ExponentialDecay) {
  const Vector out = rk4_integrate([](const Vector& s) { return (-s).eval(); }, Vector::Ones(1), 0.1, 1.0);
  EXPECT_NEAR(out[0], std::exp(-1.0), 1e-5);
}

TEST(Rk4, OneStepIsQuarticTaylor) {
  std::mt19937_64 rng(61);
  for (int t = 0; t < 10; ++t) {
    Matrix a(6, 6);
    for (int i = 0; i < 6; ++i) a.col(i) = random_vector(6, rng);
    const double dt = 0.9 / (a.norm());  // Frobenius bounds the 2-norm, so ||dt A|| <= 0.9
    const Vector u = random_vector(6, rng);
    const Vector out = rk4_integrate([&a](const Vector& s) { return (a * s).eval(); }, u, dt, dt);
    const Matrix m = dt * a;
    const Matrix taylor = Matrix::Identity(6, 6) + m + m * m / 2.0 + m * m * m / 6.0 + m * m * m * m / 24.0;
    EXPECT_LT((out - taylor * u).cwiseAbs().maxCoeff(), 1e-13 * std::max(1.0, u.cwiseAbs().maxCoeff()));
  }
}

TEST(Rk4, LandsOnEndTime) {
  std::vector<double> times;
  rk4_integrate([](const Vector& s) { return s; }, Vector::Ones(1), 0.3, 1.0,
                [&](double t, const Vector&) { times.push_back(t); });
  ASSERT_EQ(times.size(), 5u);
  EXPECT_EQ(times.back(), 1.0);
}

TEST(Rk4, RejectsBadStepAndBlowUp) {
  auto rhs = [](const Vector& s) { return s; };
  EXPECT_THROW(rk4_integrate(rhs, Vector::Ones(1), 0.0, 1.0), Error);
  EXPECT_THROW(rk4_integrate([](const Vector& s) { return (s.array().square() * 1e200).matrix().eval(); },
                             Vector::Constant(1, 1e200), 1.0, 10.0),
               Error);
}

TEST(Advection, ConstantStateIsSteady) {
  AdvectionProblem problem(cubic_operator(), 4, 1.0, [](double) { return 3.0; });
  const Vector rhs = advection_rhs(Vector::Constant(problem.total_nodes(), 3.0), problem);
  // D 1 = 0 holds to the construction tolerance, amplified by 1/h on each block
  EXPECT_LT(rhs.cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Advection, InteriorRowsDifferentiateSpaceFunctions) {
  AdvectionProblem problem(cubic_operator(), 1, 1.0, [](double x) { return x * x * x; });
  const Vector rhs = advection_rhs(problem.initial_state(), problem);
  const Vector& x = problem.nodes();
  for (int i = 1; i < x.size(); ++i) EXPECT_NEAR(rhs[i], -3 * x[i] * x[i], 1e-10);
}

TEST(Advection, EnergyRateNonPositive) {
  std::mt19937_64 rng(67);
  for (int blocks : {1, 3, 7}) {
    AdvectionProblem problem(cubic_operator(), blocks, 1.0, [](double) { return 0.0; });
    for (int t = 0; t < 20; ++t) {
      const Vector u = random_vector(problem.total_nodes(), rng);
      const double rate = problem.energy_product(u, advection_rhs(u, problem));
      EXPECT_LE(rate, 1e-12 * u.squaredNorm());
    }
  }
}

TEST(Advection, TimeStepScalesWithBlocks) {
  AdvectionProblem coarse(cubic_operator(), 2, 1.0, [](double) { return 0.0; });
  AdvectionProblem fine(cubic_operator(), 4, 1.0, [](double) { return 0.0; });
  EXPECT_NEAR(coarse.time_step() / fine.time_step(), 4.0, 1e-9);  // h halves and ||D|| doubles
}

TEST(Advection, ConstantDataExactAtAllResolutions) {
  AdvectionStudy study;
  study.initial = [](double) { return 1.0; };
  const auto table = advection_convergence(make_builtin_space({SpaceKind::monomial, 3}), {{2, 10}, {4, 10}, {8, 10}},
                                           study);
  for (const auto& row : table.rows) EXPECT_LT(row.error, 1e-10);
}

TEST(Advection, NeedsThreeResolutions) {
  EXPECT_THROW(advection_convergence(make_builtin_space({SpaceKind::monomial, 1}), {{2, 4}, {4, 4}}), Error);
}

TEST(Advection, FittedOrderOfSyntheticData) {
  std::vector<double> h{0.1, 0.05, 0.025, 0.0125}, e;
  for (double v : h) e.push_back(3.0 * std::pow(v, 4));
  EXPECT_NEAR(fitted_order(h, e), 4.0, 1e-12);
}

TEST(Schrodinger, ZeroStateZeroRhs) {
  SchrodingerProblem problem(cubic_operator(), [](double x) { return x * x; }, 1.0,
                             [](double) { return std::complex<double>(0.0); });
  EXPECT_EQ(schrodinger_rhs(Vector::Zero(20), problem), Vector::Zero(20));
}

TEST(Schrodinger, ProbabilityRateVanishes) {
  std::mt19937_64 rng(71);
  SchrodingerProblem problem(cubic_operator(), [](double x) { return 1.0 + x * x; }, 1.0,
                             [](double) { return std::complex<double>(0.0); });
  const Vector& p = problem.op().p;
  for (int t = 0; t < 50; ++t) {
    const Vector s = random_vector(20, rng);
    const Vector d = schrodinger_rhs(s, problem);
    const double rate = s.head(10).cwiseProduct(p).dot(d.head(10)) + s.tail(10).cwiseProduct(p).dot(d.tail(10));
    EXPECT_LT(std::abs(rate), 1e-10 * s.squaredNorm());
  }
}

TEST(Schrodinger, PotentialOnlyRotatesPointwise) {
  auto op = cubic_operator();
  op.q.setZero();
  SchrodingerProblem problem(op, [](double x) { return 2.0 + x; }, 1.0, [](double) { return std::complex<double>(0.0); });
  std::mt19937_64 rng(73);
  const Vector s = random_vector(20, rng);
  const Vector d = schrodinger_rhs(s, problem);
  for (int i = 0; i < 10; ++i) {
    EXPECT_NEAR(s[i] * d[i] + s[10 + i] * d[10 + i], 0.0, 1e-14);
    EXPECT_NEAR(d[i], (2.0 + op.grid[i]) * s[10 + i], 1e-14);
  }
}

TEST(Schrodinger, ZeroTimeStepRejected) {
  EXPECT_THROW(SchrodingerProblem(cubic_operator(), [](double) { return 0.0; }, 1.0,
                                  [](double) { return std::complex<double>(1.0); }, 0.0),
               Error);
  SchrodingerConfig cfg;
  cfg.dt = 0.0;
  EXPECT_THROW(schrodinger_run(cfg), Error);
}

TEST(Schrodinger, GroundStateKeepsItsDensity) {
  SchrodingerConfig cfg;
  cfg.initial = [](double x) { return std::complex<double>(std::exp(-0.5 * x * x), 0.0); };
  const auto run = schrodinger_run(cfg);
  EXPECT_LT(run.relative_drift(), 1e-3);
  double worst = 0.0;
  for (int i = 0; i < run.x.size(); ++i) {
    const double rho0 = std::exp(-run.x[i] * run.x[i]);
    worst = std::max(worst, std::abs(run.u1[i] * run.u1[i] + run.u2[i] * run.u2[i] - rho0));
  }
  EXPECT_LT(worst, 1e-6);
  // psi(t) = exp(-i t) psi_0, so at t = pi/2 the state is -i psi_0
  const int mid = static_cast<int>(run.x.size()) / 2;
  EXPECT_NEAR(run.u2[mid], -std::exp(-0.5 * run.x[mid] * run.x[mid]), 1e-6);
}
