#pragma once

#include <Eigen/Dense>
#include <functional>

namespace qcost {

struct OptimizerConfig {
  double objective_rel_tol = 1e-10;
  double param_tol = 1e-8;
  int max_iterations = 500;
  double fd_step = 1e-6;  // central-difference step, scaled by max(1,|x_i|)
};

struct OptimResult {
  Eigen::VectorXd x;
  double objective = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

// BFGS with backtracking Armijo line search and central-difference numeric
// gradients. Intended for low-dimensional smooth objectives.
OptimResult minimize_bfgs(const std::function<double(const Eigen::VectorXd&)>& f,
                          const Eigen::VectorXd& x0,
                          const OptimizerConfig& config = {});

}  // namespace qcost
