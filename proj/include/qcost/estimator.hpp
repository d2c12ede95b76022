#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "qcost/design.hpp"
#include "qcost/optimizer.hpp"
#include "qcost/profiled_sse.hpp"

namespace qcost {

struct FitConvergence {
  bool converged = false;
  int iterations = 0;
  int evaluations = 0;
  double objective = 0.0;
  double grad_norm = 0.0;
  int starts = 0;
};

// Step-1 output. eta[k] is the time index for year t = k+2 (eta_1 = 0 by
// normalization); beta0_star = 1 implicitly. sum(lambda) = 0 and per-bank
// residual means are 0 by construction.
struct LocationFit {
  double beta0 = 0.0;
  Eigen::VectorXd eta;         // T-1
  Eigen::VectorXd beta1;       // 9
  Eigen::VectorXd beta1_star;  // 9
  Eigen::VectorXd beta2;       // 45
  Eigen::VectorXd beta2_star;  // 45
  Eigen::VectorXd lambda;      // n banks
  Eigen::VectorXd residuals;   // N observations
  FitConvergence convergence;

  double eta_at(int t) const { return t <= 1 ? 0.0 : eta[t - 2]; }
};

// Step-2 output, same structure on |residuals|; scale_values holds the fitted
// scale multiplier per observation, with nonpositive fits flagged (never used
// silently in Step 3).
struct ScaleFit {
  double gamma0 = 0.0;
  Eigen::VectorXd theta;        // T-1
  Eigen::VectorXd gamma1;       // 9
  Eigen::VectorXd gamma1_star;  // 9
  Eigen::VectorXd gamma2;       // 45
  Eigen::VectorXd gamma2_star;  // 45
  Eigen::VectorXd sigma;        // n banks
  Eigen::VectorXd scale_values; // N observations
  std::vector<Eigen::Index> positivity_violations;
  bool positivity_warning = false;  // violations > 0.1% of observations
  FitConvergence convergence;

  double theta_at(int t) const { return t <= 1 ? 0.0 : theta[t - 2]; }
};

struct EstimatorConfig {
  OptimizerConfig optimizer;
  // Default multi-starts: zero vector and year-mean response differences.
  bool default_starts = true;
  std::vector<Eigen::VectorXd> extra_starts;
  // Pseudo-inverse fallback: proceed when the within design is collinear.
  bool allow_collinear = false;
  bool throw_on_nonconvergence = true;
};

// Shared estimation machinery for the location and scale stages; holds the
// precomputed profiled-SSE tensors so bootstrap replicas only rebind the
// response vector.
class MmqrEstimator {
 public:
  MmqrEstimator(const TranslogDesign& design, EstimatorConfig config = {});

  LocationFit estimate_location() const;  // response = design log-cost
  LocationFit estimate_location(const Eigen::VectorXd& response,
                                const EstimatorConfig* override_cfg = nullptr) const;
  ScaleFit estimate_scale(const Eigen::VectorXd& residuals,
                          const std::optional<Eigen::VectorXd>& theta_start,
                          const EstimatorConfig* override_cfg = nullptr) const;

  const TranslogDesign& design() const { return *design_; }
  const ProfiledSse& profiled() const { return profiled_; }
  const EstimatorConfig& config() const { return config_; }

 private:
  struct StageFitRaw {
    Eigen::VectorXd eta;
    Eigen::VectorXd coef;  // 108
    double intercept = 0.0;
    Eigen::VectorXd fixed_effects;
    Eigen::VectorXd residuals;
    FitConvergence convergence;
  };
  StageFitRaw fit_stage(const Eigen::VectorXd& response,
                        const std::vector<Eigen::VectorXd>& starts,
                        const EstimatorConfig& cfg) const;

  const TranslogDesign* design_;
  EstimatorConfig config_;
  ProfiledSse profiled_;
};

// Free-function forms of the per-operation contracts.
LocationFit estimate_location(const TranslogDesign& design,
                              const EstimatorConfig& config = {});
ScaleFit estimate_scale(const TranslogDesign& design,
                        const Eigen::VectorXd& residuals,
                        const EstimatorConfig& config = {},
                        const std::optional<Eigen::VectorXd>& theta_start = {});

// Profiled concentrated SSE at a given eta (diagnostic / test surface).
// Returns the objective and the inner closed-form coefficient blocks.
struct ProfiledValue {
  double objective;
  Eigen::VectorXd beta1, beta2, beta1_star, beta2_star;
};
ProfiledValue profiled_sse(const Eigen::VectorXd& eta,
                           const TranslogDesign& design);

// Step 3: exact minimizer of sum rho_tau(u - z q) over scalar q via weighted
// breakpoint selection. Rows with nonpositive z are excluded.
double estimate_q_tau(const Eigen::VectorXd& residuals,
                      const Eigen::VectorXd& scale_values, double tau);

// Composite coefficients of the fitted conditional quantile at (tau, t).
struct QuantileCoeffs {
  double alpha0 = 0.0;
  Eigen::Matrix<double, kNumRegressors, 1> alpha1;
  Eigen::Matrix<double, kNumQuad, 1> alpha2;
};
QuantileCoeffs quantile_coefficients(const LocationFit& loc,
                                     const ScaleFit& scale, double q_tau,
                                     int t);

// Q_c[tau | v, t, bank]: bank effect mu = lambda_i + sigma_i * q_tau, or 0 in
// mean-effect mode.
double predict_quantile(const QuantileCoeffs& coeffs,
                        const Eigen::Matrix<double, kNumRegressors, 1>& v,
                        double mu = 0.0);

// Location/scale function values (no innovation), used by measures, the
// bootstrap and the simulator.
double location_value(const LocationFit& loc,
                      const Eigen::Matrix<double, kNumRegressors, 1>& v, int t,
                      double lambda_i);
double scale_value(const ScaleFit& scale,
                   const Eigen::Matrix<double, kNumRegressors, 1>& v, int t,
                   double sigma_i);

// Complete fit artifact: both stages plus the innovation quantiles for the
// requested tau grid.
struct ModelFit {
  LocationFit location;
  ScaleFit scale;
  std::vector<double> taus;
  std::vector<double> q_taus;
  std::vector<std::string> bank_ids;
  int year_min = 0;
  int T = 0;

  double mu(int bank, std::size_t tau_index) const {
    return location.lambda[bank] + scale.sigma[bank] * q_taus[tau_index];
  }
  int bank_index(const std::string& id) const;
};

ModelFit fit_model(const TranslogDesign& design, const std::vector<double>& taus,
                   const EstimatorConfig& config = {});

}  // namespace qcost
