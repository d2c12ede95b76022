#include "qcost/optimizer.hpp"

#include <cmath>

namespace qcost {

namespace {

Eigen::VectorXd central_gradient(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, double step, int& evals) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = step * std::max(1.0, std::fabs(x[i]));
    const double xi = x[i];
    xp[i] = xi + h;
    const double fp = f(xp);
    xp[i] = xi - h;
    const double fm = f(xp);
    xp[i] = xi;
    g[i] = (fp - fm) / (2.0 * h);
    evals += 2;
  }
  return g;
}

}  // namespace

OptimResult minimize_bfgs(const std::function<double(const Eigen::VectorXd&)>& f,
                          const Eigen::VectorXd& x0,
                          const OptimizerConfig& cfg) {
  const Eigen::Index n = x0.size();
  OptimResult res;
  res.x = x0;
  res.objective = f(res.x);
  res.evaluations = 1;

  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);  // inverse Hessian
  Eigen::VectorXd g = central_gradient(f, res.x, cfg.fd_step, res.evaluations);

  int plateau = 0;  // consecutive iterations with negligible improvement
  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    res.iterations = iter + 1;
    Eigen::VectorXd dir = -(H * g);
    double slope = g.dot(dir);
    if (!(slope < 0.0)) {  // reset to steepest descent
      H.setIdentity();
      dir = -g;
      slope = g.dot(dir);
      if (!(slope < 0.0)) {
        res.grad_norm = g.norm();
        res.converged = g.norm() <= 1e-12 * std::max(1.0, std::fabs(res.objective));
        return res;
      }
    }

    // Backtracking Armijo.
    double alpha = 1.0;
    const double c1 = 1e-4;
    double f_new = res.objective;
    Eigen::VectorXd x_new = res.x;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      x_new = res.x + alpha * dir;
      f_new = f(x_new);
      ++res.evaluations;
      if (f_new <= res.objective + c1 * alpha * slope) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      res.grad_norm = g.norm();
      // No descent along a descent direction: gradient noise floor reached.
      res.converged = true;
      return res;
    }

    const Eigen::VectorXd s = x_new - res.x;
    const double f_old = res.objective;
    res.x = x_new;
    res.objective = f_new;

    Eigen::VectorXd g_new =
        central_gradient(f, res.x, cfg.fd_step, res.evaluations);
    const Eigen::VectorXd y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      // BFGS inverse update.
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
      H = (I - rho * s * y.transpose()) * H * (I - rho * y * s.transpose()) +
          rho * s * s.transpose();
    }
    g = g_new;

    const double obj_change = std::fabs(f_old - f_new);
    const double step_inf = s.cwiseAbs().maxCoeff();
    const bool negligible =
        obj_change <= cfg.objective_rel_tol * std::max(1.0, std::fabs(f_new));
    plateau = negligible ? plateau + 1 : 0;
    // Done when the iterate settles, or when the objective has plateaued
    // repeatedly (flat valleys: steps stay large while f stops moving).
    if ((negligible && step_inf <= cfg.param_tol) || plateau >= 3) {
      res.grad_norm = g.norm();
      res.converged = true;
      return res;
    }
  }

  res.grad_norm = g.norm();
  res.converged = false;
  return res;
}

}  // namespace qcost
