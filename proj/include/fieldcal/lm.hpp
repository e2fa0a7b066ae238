#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

namespace fieldcal {

struct LmOptions {
  int max_iterations = 200;
  double initial_lambda = 1e-3;
  double lambda_up = 10.0;    // multiplier after a rejected step
  double lambda_down = 10.0;  // divisor after an accepted step
  double cost_tolerance = 1e-10;      // relative cost decrease per accepted step
  double gradient_tolerance = 1e-10;  // infinity norm of the cost gradient
  double fd_relative_step = 1e-6;
  double fd_min_step = 1e-8;
};

/// Outcome of one least-squares fit. Costs are sums of squared residuals.
struct FitReport {
  int iterations = 0;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  bool converged = false;  // false only when the iteration cap stopped a still-improving fit
  std::vector<double> cost_trace;  // initial cost followed by each accepted step's cost
};

struct LmSolution {
  Eigen::VectorXd params;
  FitReport report;
};

using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Central finite-difference Jacobian of the residual vector. Steps are
/// relative to each parameter's magnitude with an absolute floor. Non-finite
/// entries (a residual became unmeasurable inside the probe step) are zeroed
/// so one bad direction cannot poison the whole system.
Eigen::MatrixXd fd_jacobian(const ResidualFn& residuals, const Eigen::VectorXd& params,
                            double relative_step = 1e-6, double min_step = 1e-8);

/// Levenberg–Marquardt with finite-difference Jacobians. Throws FitError when
/// the problem has fewer residuals than parameters or the initial cost is not
/// finite. Accepted-step costs along the trace never increase, and the final
/// cost never exceeds the initial one.
LmSolution lm_minimize(const ResidualFn& residuals, const Eigen::VectorXd& initial,
                       const LmOptions& options = {});

}  // namespace fieldcal
