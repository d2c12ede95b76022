#include "qcost/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qcost/errors.hpp"
#include "qcost/stats.hpp"

namespace qcost {

namespace {

// Linear predictor without intercept and fixed effects:
//   eta_t + [b1 + eta_t b1*]'v + 0.5 [b2 + eta_t b2*]'vquad
// with coef = [b1; b2; b1*; b2*] in the profiled layout.
Eigen::VectorXd stage_linear_predictor(const TranslogDesign& design,
                                       const Eigen::VectorXd& eta,
                                       const Eigen::VectorXd& coef) {
  const Eigen::Index N = design.rows();
  const auto base_v = coef.segment(0, kNumRegressors);
  const auto base_q = coef.segment(kNumRegressors, kNumQuad);
  const auto star_v = coef.segment(ProfiledSse::kBase, kNumRegressors);
  const auto star_q = coef.segment(ProfiledSse::kBase + kNumRegressors, kNumQuad);
  Eigen::VectorXd lp(N);
  for (Eigen::Index i = 0; i < N; ++i) {
    const int t = design.time[static_cast<std::size_t>(i)];
    const double e = t <= 1 ? 0.0 : eta[t - 2];
    double val = e;
    val += design.v.row(i).dot(base_v) + e * design.v.row(i).dot(star_v);
    val += 0.5 * (design.vquad.row(i).dot(base_q) +
                  e * design.vquad.row(i).dot(star_q));
    lp[i] = val;
  }
  return lp;
}

std::vector<Eigen::VectorXd> default_eta_starts(const TranslogDesign& design,
                                                const Eigen::VectorXd& response) {
  const int Tm1 = design.T - 1;
  std::vector<Eigen::VectorXd> starts;
  starts.push_back(Eigen::VectorXd::Zero(Tm1));

  // Year-mean response differences relative to t = 1.
  Eigen::VectorXd sums = Eigen::VectorXd::Zero(design.T);
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(design.T);
  for (Eigen::Index i = 0; i < response.size(); ++i) {
    const int t = design.time[static_cast<std::size_t>(i)];
    sums[t - 1] += response[i];
    counts[t - 1] += 1.0;
  }
  Eigen::VectorXd meandiff(Tm1);
  const double base = sums[0] / std::max(1.0, counts[0]);
  for (int k = 0; k < Tm1; ++k) {
    const double m = sums[k + 1] / std::max(1.0, counts[k + 1]);
    meandiff[k] = m - base;
  }
  starts.push_back(std::move(meandiff));
  return starts;
}

}  // namespace

MmqrEstimator::MmqrEstimator(const TranslogDesign& design, EstimatorConfig config)
    : design_(&design), config_(std::move(config)), profiled_(design) {}

MmqrEstimator::StageFitRaw MmqrEstimator::fit_stage(
    const Eigen::VectorXd& response, const std::vector<Eigen::VectorXd>& starts,
    const EstimatorConfig& cfg) const {
  if (!cfg.allow_collinear) {
    auto bad = profiled_.collinear_base_columns();
    if (!bad.empty()) {
      std::ostringstream msg;
      msg << "within design is rank deficient; collinear columns:";
      for (const auto& c : bad) msg << ' ' << c;
      msg << " (enable the pseudo-inverse fallback to proceed)";
      throw Error(ErrorKind::estimation, msg.str());
    }
  }

  const auto resp = profiled_.bind(response);
  auto objective = [&](const Eigen::VectorXd& eta) {
    return profiled_.evaluate(eta, resp).sse;
  };

  OptimResult best;
  bool have = false;
  int total_evals = 0;
  for (const auto& s0 : starts) {
    OptimResult r = minimize_bfgs(objective, s0, cfg.optimizer);
    total_evals += r.evaluations;
    if (!have || r.objective < best.objective) {
      best = std::move(r);
      have = true;
    }
  }
  if (!have) throw Error(ErrorKind::estimation, "no optimizer starts provided");

  if (!best.converged && cfg.throw_on_nonconvergence) {
    std::ostringstream msg;
    msg << "outer optimization did not converge after "
        << cfg.optimizer.max_iterations
        << " iterations; best objective = " << best.objective
        << ", gradient norm = " << best.grad_norm << ", best eta = [";
    for (Eigen::Index k = 0; k < best.x.size(); ++k) {
      if (k) msg << ", ";
      msg << best.x[k];
    }
    msg << "]";
    throw Error(ErrorKind::estimation, msg.str());
  }

  StageFitRaw out;
  out.eta = best.x;
  out.coef = profiled_.evaluate(best.x, resp).coef;
  out.convergence.converged = best.converged;
  out.convergence.iterations = best.iterations;
  out.convergence.evaluations = total_evals;
  out.convergence.objective = best.objective;
  out.convergence.grad_norm = best.grad_norm;
  out.convergence.starts = static_cast<int>(starts.size());

  // Intercept and fixed effects under the sum-to-zero normalization; using
  // the unweighted mean of per-bank means keeps sum(fe) = 0 exactly for
  // unbalanced panels (identical to the grand mean when balanced).
  const Eigen::VectorXd lp = stage_linear_predictor(*design_, out.eta, out.coef);
  const Eigen::VectorXd r = response - lp;
  const int n = design_->n_banks;
  Eigen::VectorXd bank_mean(n);
  for (int b = 0; b < n; ++b) {
    bank_mean[b] =
        r.segment(design_->bank_start[static_cast<std::size_t>(b)],
                  design_->bank_count[static_cast<std::size_t>(b)])
            .mean();
  }
  out.intercept = bank_mean.mean();
  out.fixed_effects = bank_mean.array() - out.intercept;
  out.residuals.resize(r.size());
  for (Eigen::Index i = 0; i < r.size(); ++i)
    out.residuals[i] = r[i] - bank_mean[design_->group[static_cast<std::size_t>(i)]];
  return out;
}

LocationFit MmqrEstimator::estimate_location() const {
  return estimate_location(design_->logc);
}

LocationFit MmqrEstimator::estimate_location(
    const Eigen::VectorXd& response, const EstimatorConfig* override_cfg) const {
  const EstimatorConfig& cfg = override_cfg ? *override_cfg : config_;
  std::vector<Eigen::VectorXd> starts;
  if (cfg.default_starts) starts = default_eta_starts(*design_, response);
  for (const auto& s : cfg.extra_starts) starts.push_back(s);
  auto raw = fit_stage(response, starts, cfg);

  LocationFit fit;
  fit.beta0 = raw.intercept;
  fit.eta = std::move(raw.eta);
  fit.beta1 = raw.coef.segment(0, kNumRegressors);
  fit.beta2 = raw.coef.segment(kNumRegressors, kNumQuad);
  fit.beta1_star = raw.coef.segment(ProfiledSse::kBase, kNumRegressors);
  fit.beta2_star = raw.coef.segment(ProfiledSse::kBase + kNumRegressors, kNumQuad);
  fit.lambda = std::move(raw.fixed_effects);
  fit.residuals = std::move(raw.residuals);
  fit.convergence = raw.convergence;
  return fit;
}

ScaleFit MmqrEstimator::estimate_scale(
    const Eigen::VectorXd& residuals,
    const std::optional<Eigen::VectorXd>& theta_start,
    const EstimatorConfig* override_cfg) const {
  if (residuals.size() != design_->rows())
    throw Error(ErrorKind::estimation, "residual vector length mismatch");
  const EstimatorConfig& cfg = override_cfg ? *override_cfg : config_;
  const Eigen::VectorXd abs_u = residuals.cwiseAbs();

  std::vector<Eigen::VectorXd> starts;
  if (cfg.default_starts) starts = default_eta_starts(*design_, abs_u);
  if (theta_start && theta_start->size() == design_->T - 1)
    starts.push_back(*theta_start);
  for (const auto& s : cfg.extra_starts) starts.push_back(s);
  auto raw = fit_stage(abs_u, starts, cfg);

  ScaleFit fit;
  fit.gamma0 = raw.intercept;
  fit.theta = std::move(raw.eta);
  fit.gamma1 = raw.coef.segment(0, kNumRegressors);
  fit.gamma2 = raw.coef.segment(kNumRegressors, kNumQuad);
  fit.gamma1_star = raw.coef.segment(ProfiledSse::kBase, kNumRegressors);
  fit.gamma2_star = raw.coef.segment(ProfiledSse::kBase + kNumRegressors, kNumQuad);
  fit.sigma = std::move(raw.fixed_effects);
  fit.convergence = raw.convergence;

  // Fitted scale per observation: gamma0 + theta_t + slopes + sigma_i.
  const Eigen::VectorXd lp =
      stage_linear_predictor(*design_, fit.theta, raw.coef);
  fit.scale_values.resize(lp.size());
  for (Eigen::Index i = 0; i < lp.size(); ++i) {
    fit.scale_values[i] =
        fit.gamma0 + lp[i] + fit.sigma[design_->group[static_cast<std::size_t>(i)]];
    if (!(fit.scale_values[i] > 0.0)) fit.positivity_violations.push_back(i);
  }
  fit.positivity_warning =
      static_cast<double>(fit.positivity_violations.size()) >
      0.001 * static_cast<double>(lp.size());
  return fit;
}

LocationFit estimate_location(const TranslogDesign& design,
                              const EstimatorConfig& config) {
  return MmqrEstimator(design, config).estimate_location();
}

ScaleFit estimate_scale(const TranslogDesign& design,
                        const Eigen::VectorXd& residuals,
                        const EstimatorConfig& config,
                        const std::optional<Eigen::VectorXd>& theta_start) {
  return MmqrEstimator(design, config).estimate_scale(residuals, theta_start);
}

ProfiledValue profiled_sse(const Eigen::VectorXd& eta,
                           const TranslogDesign& design) {
  ProfiledSse prof(design);
  const auto resp = prof.bind(design.logc);
  auto ev = prof.evaluate(eta, resp);
  ProfiledValue out;
  out.objective = ev.sse;
  out.beta1 = ev.coef.segment(0, kNumRegressors);
  out.beta2 = ev.coef.segment(kNumRegressors, kNumQuad);
  out.beta1_star = ev.coef.segment(ProfiledSse::kBase, kNumRegressors);
  out.beta2_star = ev.coef.segment(ProfiledSse::kBase + kNumRegressors, kNumQuad);
  return out;
}

double estimate_q_tau(const Eigen::VectorXd& residuals,
                      const Eigen::VectorXd& scale_values, double tau) {
  if (!(tau > 0.0 && tau < 1.0))
    throw Error(ErrorKind::estimation, "tau must lie strictly inside (0,1)");
  if (residuals.size() != scale_values.size())
    throw Error(ErrorKind::estimation, "residual/scale length mismatch");
  std::vector<double> ratio, weight;
  ratio.reserve(static_cast<std::size_t>(residuals.size()));
  weight.reserve(static_cast<std::size_t>(residuals.size()));
  for (Eigen::Index i = 0; i < residuals.size(); ++i) {
    if (scale_values[i] > 0.0) {
      ratio.push_back(residuals[i] / scale_values[i]);
      weight.push_back(scale_values[i]);
    }
  }
  if (ratio.empty())
    throw Error(ErrorKind::estimation,
                "no observations with positive scale for the quantile stage");
  return stats::weighted_quantile(ratio, weight, tau);
}

QuantileCoeffs quantile_coefficients(const LocationFit& loc,
                                     const ScaleFit& scale, double q_tau,
                                     int t) {
  const double eta_t = loc.eta_at(t);
  const double theta_t = scale.theta_at(t);
  QuantileCoeffs c;
  c.alpha0 = loc.beta0 + scale.gamma0 * q_tau + eta_t + theta_t * q_tau;
  c.alpha1 = loc.beta1 + scale.gamma1 * q_tau + loc.beta1_star * eta_t +
             scale.gamma1_star * (theta_t * q_tau);
  c.alpha2 = loc.beta2 + scale.gamma2 * q_tau + loc.beta2_star * eta_t +
             scale.gamma2_star * (theta_t * q_tau);
  return c;
}

double predict_quantile(const QuantileCoeffs& coeffs,
                        const Eigen::Matrix<double, kNumRegressors, 1>& v,
                        double mu) {
  return coeffs.alpha0 + coeffs.alpha1.dot(v) +
         0.5 * coeffs.alpha2.dot(quad_expand(v)) + mu;
}

double location_value(const LocationFit& loc,
                      const Eigen::Matrix<double, kNumRegressors, 1>& v, int t,
                      double lambda_i) {
  const double e = loc.eta_at(t);
  return loc.beta0 + e + (loc.beta1 + loc.beta1_star * e).dot(v) +
         0.5 * (loc.beta2 + loc.beta2_star * e).dot(quad_expand(v)) + lambda_i;
}

double scale_value(const ScaleFit& scale,
                   const Eigen::Matrix<double, kNumRegressors, 1>& v, int t,
                   double sigma_i) {
  const double e = scale.theta_at(t);
  return scale.gamma0 + e + (scale.gamma1 + scale.gamma1_star * e).dot(v) +
         0.5 * (scale.gamma2 + scale.gamma2_star * e).dot(quad_expand(v)) +
         sigma_i;
}

int ModelFit::bank_index(const std::string& id) const {
  auto it = std::lower_bound(bank_ids.begin(), bank_ids.end(), id);
  if (it == bank_ids.end() || *it != id)
    throw Error(ErrorKind::data, "unknown bank id: " + id);
  return static_cast<int>(it - bank_ids.begin());
}

ModelFit fit_model(const TranslogDesign& design, const std::vector<double>& taus,
                   const EstimatorConfig& config) {
  MmqrEstimator est(design, config);
  ModelFit fit;
  fit.location = est.estimate_location();
  fit.scale = est.estimate_scale(fit.location.residuals, fit.location.eta);
  fit.taus = taus;
  fit.q_taus.reserve(taus.size());
  for (double tau : taus)
    fit.q_taus.push_back(
        estimate_q_tau(fit.location.residuals, fit.scale.scale_values, tau));
  fit.bank_ids = design.bank_ids;
  fit.year_min = design.year_min;
  fit.T = design.T;
  return fit;
}

}  // namespace qcost
