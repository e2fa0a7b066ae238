#include "fieldcal/lm.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "fieldcal/error.hpp"

namespace fieldcal {

Eigen::MatrixXd fd_jacobian(const ResidualFn& residuals, const Eigen::VectorXd& params,
                            double relative_step, double min_step) {
  const Eigen::Index n = params.size();
  Eigen::MatrixXd jacobian;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double step = std::max(std::abs(params[j]) * relative_step, min_step);
    Eigen::VectorXd forward = params;
    Eigen::VectorXd backward = params;
    forward[j] += step;
    backward[j] -= step;
    const Eigen::VectorXd column = (residuals(forward) - residuals(backward)) / (2.0 * step);
    if (jacobian.size() == 0) jacobian.resize(column.size(), n);
    jacobian.col(j) = column.unaryExpr(
        [](double v) { return std::isfinite(v) ? v : 0.0; });
  }
  return jacobian;
}

LmSolution lm_minimize(const ResidualFn& residuals, const Eigen::VectorXd& initial,
                       const LmOptions& options) {
  LmSolution solution;
  solution.params = initial;

  Eigen::VectorXd r = residuals(initial);
  if (r.size() < initial.size()) {
    throw FitError("under-determined fit: fewer residuals than parameters");
  }
  double cost = r.squaredNorm();
  if (!std::isfinite(cost)) {
    throw FitError("invalid seed: cost is not finite at the initial point");
  }

  FitReport& report = solution.report;
  report.initial_cost = cost;
  report.cost_trace.push_back(cost);

  double lambda = options.initial_lambda;
  if (cost == 0.0) report.converged = true;

  while (!report.converged && report.iterations < options.max_iterations) {
    ++report.iterations;

    const Eigen::MatrixXd jacobian =
        fd_jacobian(residuals, solution.params, options.fd_relative_step, options.fd_min_step);
    const Eigen::VectorXd gradient = 2.0 * jacobian.transpose() * r;
    if (gradient.lpNorm<Eigen::Infinity>() < options.gradient_tolerance) {
      report.converged = true;
      break;
    }

    const Eigen::MatrixXd jtj = jacobian.transpose() * jacobian;
    const Eigen::VectorXd rhs = -jacobian.transpose() * r;

    bool accepted = false;
    while (lambda < 1e14) {
      Eigen::MatrixXd damped = jtj;
      for (Eigen::Index i = 0; i < damped.rows(); ++i) {
        damped(i, i) += lambda * std::max(jtj(i, i), 1e-12);
      }
      const Eigen::VectorXd delta = damped.ldlt().solve(rhs);
      if (delta.allFinite()) {
        const Eigen::VectorXd candidate = solution.params + delta;
        const Eigen::VectorXd r_new = residuals(candidate);
        const double cost_new = r_new.squaredNorm();
        if (std::isfinite(cost_new) && cost_new < cost) {
          const double relative_decrease = (cost - cost_new) / cost;
          solution.params = candidate;
          r = r_new;
          cost = cost_new;
          report.cost_trace.push_back(cost);
          lambda /= options.lambda_down;
          accepted = true;
          if (relative_decrease < options.cost_tolerance || cost == 0.0) {
            report.converged = true;
          }
          break;
        }
      }
      lambda *= options.lambda_up;
    }
    if (!accepted) {
      // No damping level can improve the cost: numerically at a minimum.
      report.converged = true;
    }
  }

  report.final_cost = cost;
  return solution;
}

}  // namespace fieldcal
