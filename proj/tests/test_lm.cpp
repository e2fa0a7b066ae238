#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Cholesky>
#include <cmath>
#include <limits>
#include <random>

#include "fieldcal/error.hpp"
#include "fieldcal/lm.hpp"

using namespace fieldcal;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// Classic banana-valley problem; minimum at (1, 1) with zero residuals.
VectorXd rosenbrock(const VectorXd& p) {
  VectorXd r(2);
  r << 10.0 * (p[1] - p[0] * p[0]), 1.0 - p[0];
  return r;
}

}  // namespace

TEST_CASE("minimizes the banana valley to its known optimum") {
  VectorXd start(2);
  start << -1.2, 1.0;
  const LmSolution sol = lm_minimize(rosenbrock, start);
  CHECK(sol.params[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(sol.params[1] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(sol.report.final_cost < 1e-12);
  CHECK(sol.report.converged);
}

TEST_CASE("solves a linear least-squares problem to the analytic optimum") {
  // r = A p - b with more rows than columns; optimum is the normal-equations
  // solution.
  MatrixXd a(5, 2);
  a << 1, 1, 1, 2, 1, 3, 1, 4, 1, 5;
  VectorXd b(5);
  b << 2.1, 3.9, 6.2, 8.0, 9.8;
  auto residuals = [&](const VectorXd& p) -> VectorXd { return a * p - b; };

  const VectorXd expected = (a.transpose() * a).ldlt().solve(a.transpose() * b);
  const double expected_cost = (a * expected - b).squaredNorm();

  VectorXd start = VectorXd::Zero(2);
  const LmSolution sol = lm_minimize(residuals, start);
  CHECK((sol.params - expected).norm() < 1e-7);
  CHECK(sol.report.final_cost == doctest::Approx(expected_cost).epsilon(1e-10));
}

TEST_CASE("cost trace starts at the initial cost, ends at the final, never rises") {
  VectorXd start(2);
  start << -1.2, 1.0;
  const LmSolution sol = lm_minimize(rosenbrock, start);
  REQUIRE(!sol.report.cost_trace.empty());
  CHECK(sol.report.cost_trace.front() == sol.report.initial_cost);
  CHECK(sol.report.cost_trace.back() == sol.report.final_cost);
  for (size_t i = 1; i < sol.report.cost_trace.size(); ++i) {
    CHECK(sol.report.cost_trace[i] <= sol.report.cost_trace[i - 1]);
  }
  CHECK(sol.report.final_cost <= sol.report.initial_cost);
}

TEST_CASE("an already-optimal start terminates immediately") {
  VectorXd start(2);
  start << 1.0, 1.0;
  const LmSolution sol = lm_minimize(rosenbrock, start);
  CHECK(sol.report.iterations <= 2);
  CHECK(sol.report.final_cost < 1e-20);
}

TEST_CASE("rejects under-determined problems and non-finite seeds") {
  auto one_residual = [](const VectorXd& p) -> VectorXd {
    VectorXd r(1);
    r << p[0] + p[1];
    return r;
  };
  CHECK_THROWS_AS(lm_minimize(one_residual, VectorXd::Zero(2)), FitError);

  auto poisoned = [](const VectorXd& p) -> VectorXd {
    VectorXd r(2);
    r << std::numeric_limits<double>::infinity(), p[0];
    return r;
  };
  CHECK_THROWS_AS(lm_minimize(poisoned, VectorXd::Zero(1)), FitError);
}

TEST_CASE("iteration cap stops a still-improving fit and reports it") {
  VectorXd start(2);
  start << -1.2, 1.0;
  LmOptions opts;
  opts.max_iterations = 2;
  const LmSolution sol = lm_minimize(rosenbrock, start, opts);
  CHECK(sol.report.iterations == 2);
  CHECK(!sol.report.converged);
  CHECK(sol.report.final_cost <= sol.report.initial_cost);
}

TEST_CASE("finite-difference jacobian matches analytic derivatives") {
  auto residuals = [](const VectorXd& p) -> VectorXd {
    VectorXd r(3);
    r << std::sin(p[0]) + p[1] * p[1], std::exp(0.3 * p[0]) - p[1], p[0] * p[1];
    return r;
  };
  VectorXd at(2);
  at << 0.7, -1.3;
  const MatrixXd j = fd_jacobian(residuals, at);
  MatrixXd expected(3, 2);
  expected << std::cos(at[0]), 2.0 * at[1],
      0.3 * std::exp(0.3 * at[0]), -1.0,
      at[1], at[0];
  CHECK((j - expected).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("jacobian directional derivatives match cost differences at random points") {
  auto residuals = [](const VectorXd& p) -> VectorXd {
    VectorXd r(4);
    r << p[0] * p[0] - p[1], std::sin(p[1]) + 0.5 * p[2], p[2] * p[0] - 1.0,
        0.1 * (p[0] + p[1] + p[2]);
    return r;
  };
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    VectorXd p(3);
    p << u(rng), u(rng), u(rng);
    VectorXd dir(3);
    dir << u(rng), u(rng), u(rng);
    dir.normalize();

    const MatrixXd j = fd_jacobian(residuals, p);
    const VectorXd r = residuals(p);
    const double analytic = 2.0 * r.dot(j * dir);  // d/dt |r(p + t dir)|^2 at 0

    const double eps = 1e-6;
    const double fd = (residuals(p + eps * dir).squaredNorm() -
                       residuals(p - eps * dir).squaredNorm()) /
                      (2.0 * eps);
    const double scale = std::max({std::abs(analytic), std::abs(fd), 1e-6});
    CHECK(std::abs(analytic - fd) / scale < 1e-4);
  }
}

TEST_CASE("non-finite residuals inside a probe step do not poison the jacobian") {
  // The second residual blows up left of zero; the FD probe at p[0] = 0 steps
  // into that region, and the contract zeroes that entry instead of
  // propagating the infinity.
  auto residuals = [](const VectorXd& p) -> VectorXd {
    VectorXd r(2);
    r << p[0], p[0] < 0.0 ? std::numeric_limits<double>::infinity() : p[0] * 2.0;
    return r;
  };
  const MatrixXd j = fd_jacobian(residuals, VectorXd::Zero(1));
  CHECK(j.allFinite());
  CHECK(j(0, 0) == doctest::Approx(1.0).epsilon(1e-6));
}
