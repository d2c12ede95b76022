#include "qcost/bootstrap.hpp"

#include <algorithm>
#include <cmath>

#include "qcost/errors.hpp"
#include "qcost/parallel.hpp"
#include "qcost/rng.hpp"
#include "qcost/stats.hpp"

namespace qcost {

Eigen::VectorXd draw_weights(int n_banks, std::uint64_t seed,
                             std::uint64_t replica) {
  if (n_banks < 1)
    throw Error(ErrorKind::compute, "draw_weights: need at least one bank");
  const double sqrt5 = std::sqrt(5.0);
  const double w_plus = (1.0 + sqrt5) / 2.0;
  const double w_minus = (1.0 - sqrt5) / 2.0;
  const double p_plus = (sqrt5 - 1.0) / (2.0 * sqrt5);
  Rng rng(seed, 0xB007000000000000ULL ^ replica);
  Eigen::VectorXd w(n_banks);
  for (int i = 0; i < n_banks; ++i)
    w[i] = rng.uniform() < p_plus ? w_plus : w_minus;
  return w;
}

BootstrapRun bootstrap_pipeline(const MmqrEstimator& estimator,
                                const ModelFit& base,
                                const std::vector<double>& taus,
                                const BootstrapConfig& config) {
  const TranslogDesign& design = estimator.design();
  if (!base.location.convergence.converged ||
      !base.scale.convergence.converged)
    throw Error(ErrorKind::estimation,
                "bootstrap requires a converged base fit");
  if (config.replicas < 2)
    throw Error(ErrorKind::config, "bootstrap needs B >= 2");

  // c = location-fitted + lambda + u, so the step (iii) outcome is
  // c^b = (c - u) + w_g * u without re-evaluating the location function.
  const Eigen::VectorXd fitted = design.logc - base.location.residuals;

  // Warm starts only: replicas perturb around the base fit, and the profiled
  // objective is smooth, so the base optimum is the natural single start.
  EstimatorConfig replica_cfg = estimator.config();
  replica_cfg.default_starts = false;
  replica_cfg.throw_on_nonconvergence = true;

  BootstrapRun run;
  run.B = config.replicas;
  run.seed = config.seed;
  run.taus = taus;
  run.replicas.resize(static_cast<std::size_t>(config.replicas));

  parallel_for(
      static_cast<std::size_t>(config.replicas), config.threads,
      [&](std::size_t r) {
        ReplicaFit& rep = run.replicas[r];
        try {
          Eigen::VectorXd w =
              config.identity_weights
                  ? Eigen::VectorXd::Ones(design.n_banks)
                  : draw_weights(design.n_banks, config.seed,
                                 static_cast<std::uint64_t>(r));
          Eigen::VectorXd cb(design.rows());
          for (Eigen::Index i = 0; i < design.rows(); ++i)
            cb[i] = fitted[i] +
                    w[design.group[static_cast<std::size_t>(i)]] *
                        base.location.residuals[i];

          EstimatorConfig cfg = replica_cfg;
          cfg.extra_starts = {base.location.eta};
          rep.location = estimator.estimate_location(cb, &cfg);

          // Step (iv): residuals against the original outcome as printed
          // (u^b = c - fitted^b - lambda^b), or against c^b behind the flag.
          const Eigen::VectorXd& target =
              config.residuals_from_bootstrap_outcome ? cb : design.logc;
          Eigen::VectorXd ub(design.rows());
          for (Eigen::Index i = 0; i < design.rows(); ++i) {
            const int bank = design.group[static_cast<std::size_t>(i)];
            Eigen::Matrix<double, kNumRegressors, 1> v =
                design.v.row(i).transpose();
            ub[i] = target[i] -
                    location_value(rep.location, v,
                                   design.time[static_cast<std::size_t>(i)],
                                   rep.location.lambda[bank]);
          }

          if (config.recompute_scale_stage) {
            EstimatorConfig scfg = replica_cfg;
            scfg.extra_starts = {base.scale.theta};
            rep.scale = estimator.estimate_scale(ub, base.scale.theta, &scfg);

            rep.q_taus.reserve(taus.size());
            for (double tau : taus)
              rep.q_taus.push_back(
                  estimate_q_tau(ub, rep.scale.scale_values, tau));
          }
          rep.converged = true;
        } catch (const std::exception& e) {
          rep.converged = false;
          rep.failure = e.what();
        }
      });

  for (const auto& rep : run.replicas)
    if (!rep.converged) ++run.failures;
  const double failure_rate =
      static_cast<double>(run.failures) / static_cast<double>(run.B);
  if (failure_rate > config.max_failure_rate)
    throw Error(ErrorKind::estimation,
                "bootstrap failed: " + std::to_string(run.failures) + " of " +
                    std::to_string(run.B) + " replicas did not converge");
  return run;
}

BcInterval bc_interval(const std::vector<double>& replicas, double point,
                       double alpha) {
  if (replicas.size() < 2)
    throw Error(ErrorKind::compute, "bc_interval: need >= 2 replica values");
  std::vector<double> sorted(replicas);
  std::sort(sorted.begin(), sorted.end());
  const double B = static_cast<double>(sorted.size());

  BcInterval out;
  out.point = point;
  out.alpha = alpha;
  if (sorted.front() == sorted.back()) {
    out.degenerate = true;
    out.z0 = 0.0;
    out.lower_1s = out.upper_1s = out.lower_2s = out.upper_2s = sorted.front();
    return out;
  }

  // Median-bias count: strictly-less, with ties to the point counting half.
  double count = 0.0;
  for (double v : sorted) {
    if (v < point) count += 1.0;
    else if (v == point) count += 0.5;
  }
  if (count < 0.5) {
    count = 0.5;
    out.saturated = true;
  } else if (count > B - 0.5) {
    count = B - 0.5;
    out.saturated = true;
  }
  out.z0 = stats::norm_quantile(count / B);

  auto pct = [&](double z_alpha) {
    const double p = stats::norm_cdf(2.0 * out.z0 + z_alpha);
    return stats::nearest_rank(sorted, p);
  };
  out.lower_2s = pct(stats::norm_quantile(alpha / 2.0));
  out.upper_2s = pct(stats::norm_quantile(1.0 - alpha / 2.0));
  out.lower_1s = pct(stats::norm_quantile(alpha));
  out.upper_1s = pct(stats::norm_quantile(1.0 - alpha));
  return out;
}

Classification classify(double point, const BcInterval& bounds,
                        MeasureKind kind) {
  double reference = 0.0;
  const char* pos_yes = "";
  const char* pos_no = "";
  const char* inv_yes = "";
  const char* inv_no = "";
  switch (kind) {
    case MeasureKind::scope:
      reference = 0.0;
      pos_yes = "scope economies";
      pos_no = "scope non-economies";
      inv_yes = "scope invariance";
      inv_no = "scope non-invariance";
      break;
    case MeasureKind::scale:
      reference = 1.0;
      pos_yes = "IRS";
      pos_no = "non-IRS";
      inv_yes = "CRS";
      inv_no = "non-CRS";
      break;
    case MeasureKind::tech_change:
      reference = 0.0;
      pos_yes = "technical progress";
      pos_no = "technical non-progress";
      inv_yes = "technical stasis";
      inv_no = "technical non-stasis";
      break;
  }
  Classification c;
  c.positive = bounds.lower_1s > reference;
  c.invariant = bounds.lower_2s <= reference && reference <= bounds.upper_2s;
  c.positive_label = c.positive ? pos_yes : pos_no;
  c.invariant_label = c.invariant ? inv_yes : inv_no;
  (void)point;
  return c;
}

}  // namespace qcost
