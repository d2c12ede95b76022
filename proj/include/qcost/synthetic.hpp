#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "qcost/design.hpp"
#include "qcost/estimator.hpp"
#include "qcost/panel.hpp"

namespace qcost {

// Data-generating process for the location-scale panel model. Innovations are
// normalized so E[eps] = 0 and E|eps| = 1 analytically; the implied scale is
// kept positive by redrawing regressors (assumption iii), with a hard error
// if more than half of all draws get rejected.
struct DgpSpec {
  int n = 100;
  int T = 5;
  std::uint64_t seed = 1;
  int start_year = 2009;

  double beta0 = 0.0;
  Eigen::VectorXd eta;         // T-1, time index values for t = 2..T
  Eigen::VectorXd beta1;       // 9
  Eigen::VectorXd beta1_star;  // 9
  Eigen::VectorXd beta2;       // 45
  Eigen::VectorXd beta2_star;  // 45

  double gamma0 = 1.0;
  Eigen::VectorXd theta;
  Eigen::VectorXd gamma1;
  Eigen::VectorXd gamma1_star;
  Eigen::VectorXd gamma2;
  Eigen::VectorXd gamma2_star;

  double lambda_sd = 0.2;    // location fixed-effect dispersion
  double sigma_fe_sd = 0.05; // scale fixed-effect dispersion

  // gaussian and lognormal are normalized to E|eps| = 1; degenerate sets
  // eps = 0 (noise-free recovery checks).
  enum class Innovation { gaussian, lognormal, degenerate };
  Innovation innovation = Innovation::gaussian;

  double regressor_corr = 0.3;  // common-factor share of regressor variance
  double regressor_sd = 0.5;
  Eigen::VectorXd regressor_mean;  // 9, defaults to zero

  double missing_rate = 0.0;  // unbalanced-panel option (first/last years kept)

  // Well-behaved heteroskedastic baseline with nonzero starred blocks.
  static DgpSpec baseline(int n, int T, std::uint64_t seed);
  // All scale slopes zero: u = gamma0 * eps.
  static DgpSpec homoskedastic(int n, int T, std::uint64_t seed);

  // tau-quantile of the innovation law (analytic).
  double innovation_quantile(double tau) const;
};

struct SimulatedPanel {
  PanelDataset panel;
  TranslogDesign design;
  DgpSpec spec;
  LocationFit true_location;  // coefficient truth + realized lambda; residuals = true u
  ScaleFit true_scale;        // coefficient truth + realized sigma; scale_values = true scale
  std::int64_t scale_redraws = 0;

  double q_tau_true(double tau) const { return spec.innovation_quantile(tau); }
};

SimulatedPanel simulate_panel(const DgpSpec& spec);

// Brute-force 1-D check-function minimizer: evaluates the objective at every
// breakpoint u_i/z_i and every midpoint, O(N^2); ties resolve to the smallest
// minimizer. Independent of estimate_q_tau by construction.
double oracle_qreg_1d(const std::vector<double>& u, const std::vector<double>& z,
                      double tau);

// Central finite differences of predict_quantile, component-wise.
Eigen::Matrix<double, kNumRegressors, 1> oracle_fd_gradient(
    const QuantileCoeffs& coeffs,
    const Eigen::Matrix<double, kNumRegressors, 1>& v, double step = 1e-5);

// Empirical tau-quantile of simulated log cost at fixed (v, t), bank effects
// zero, over `draws` innovations.
double oracle_quantile_by_simulation(const DgpSpec& spec,
                                     const Eigen::Matrix<double, kNumRegressors, 1>& v,
                                     int t, double tau, int draws,
                                     std::uint64_t seed = 7);

}  // namespace qcost
