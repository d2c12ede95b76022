#include "qcost/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "qcost/errors.hpp"
#include "qcost/rng.hpp"
#include "qcost/stats.hpp"

namespace qcost {

namespace {

constexpr double kSqrtE = 1.6487212707001281468;  // e^(1/2)

// E|e^Z - e^(1/2)| for Z ~ N(0,1): 2 e^(1/2) (2 Phi(1/2) - 1).
double lognormal_abs_norm() {
  return 2.0 * kSqrtE * (2.0 * stats::norm_cdf(0.5) - 1.0);
}

double draw_innovation(Rng& rng, DgpSpec::Innovation law) {
  switch (law) {
    case DgpSpec::Innovation::gaussian:
      // N(0,1)/sqrt(2/pi): E|eps| = 1.
      return rng.normal() * std::sqrt(M_PI / 2.0);
    case DgpSpec::Innovation::lognormal:
      return (std::exp(rng.normal()) - kSqrtE) / lognormal_abs_norm();
    case DgpSpec::Innovation::degenerate:
      rng.normal();  // keep the stream aligned across laws
      return 0.0;
  }
  return 0.0;
}

Eigen::VectorXd small_pattern(int size, double amplitude, int phase) {
  // Deterministic, sign-alternating magnitudes; keeps specs readable and the
  // implied scale comfortably positive.
  Eigen::VectorXd v(size);
  for (int i = 0; i < size; ++i) {
    const double s = ((i + phase) % 2 == 0) ? 1.0 : -1.0;
    v[i] = s * amplitude * (1.0 + 0.5 * std::cos(0.7 * (i + phase)));
  }
  return v;
}

}  // namespace

double DgpSpec::innovation_quantile(double tau) const {
  switch (innovation) {
    case Innovation::gaussian:
      return stats::norm_quantile(tau) * std::sqrt(M_PI / 2.0);
    case Innovation::lognormal:
      return (std::exp(stats::norm_quantile(tau)) - kSqrtE) /
             lognormal_abs_norm();
    case Innovation::degenerate:
      return 0.0;
  }
  return 0.0;
}

DgpSpec DgpSpec::baseline(int n, int T, std::uint64_t seed) {
  DgpSpec s;
  s.n = n;
  s.T = T;
  s.seed = seed;
  s.beta0 = 1.2;
  s.eta = Eigen::VectorXd::LinSpaced(T - 1, -0.05, 0.08);
  s.beta1 = small_pattern(kNumRegressors, 0.35, 0);
  s.beta1[0] = 0.45;  // keep output elasticities meaningfully positive
  s.beta1[1] = 0.25;
  s.beta1[2] = 0.12;
  s.beta1_star = small_pattern(kNumRegressors, 0.15, 1);
  s.beta2 = small_pattern(kNumQuad, 0.04, 2);
  s.beta2_star = small_pattern(kNumQuad, 0.02, 3);

  s.gamma0 = 1.0;
  s.theta = Eigen::VectorXd::LinSpaced(T - 1, 0.02, -0.04);
  s.gamma1 = small_pattern(kNumRegressors, 0.05, 1);
  s.gamma1_star = small_pattern(kNumRegressors, 0.03, 0);
  s.gamma2 = small_pattern(kNumQuad, 0.01, 1);
  s.gamma2_star = small_pattern(kNumQuad, 0.006, 2);

  s.regressor_mean = Eigen::VectorXd::Zero(kNumRegressors);
  return s;
}

DgpSpec DgpSpec::homoskedastic(int n, int T, std::uint64_t seed) {
  DgpSpec s = baseline(n, T, seed);
  s.theta = Eigen::VectorXd::Zero(T - 1);
  s.gamma1 = Eigen::VectorXd::Zero(kNumRegressors);
  s.gamma1_star = Eigen::VectorXd::Zero(kNumRegressors);
  s.gamma2 = Eigen::VectorXd::Zero(kNumQuad);
  s.gamma2_star = Eigen::VectorXd::Zero(kNumQuad);
  s.sigma_fe_sd = 0.0;
  return s;
}

SimulatedPanel simulate_panel(const DgpSpec& spec) {
  if (spec.n < 2 || spec.T < 2)
    throw Error(ErrorKind::data, "simulate_panel: need n >= 2 and T >= 2");
  auto require_dim = [](const Eigen::VectorXd& v, int d, const char* name) {
    if (v.size() != d)
      throw Error(ErrorKind::data,
                  std::string("simulate_panel: ") + name + " has wrong length");
  };
  require_dim(spec.eta, spec.T - 1, "eta");
  require_dim(spec.theta, spec.T - 1, "theta");
  require_dim(spec.beta1, kNumRegressors, "beta1");
  require_dim(spec.beta1_star, kNumRegressors, "beta1_star");
  require_dim(spec.beta2, kNumQuad, "beta2");
  require_dim(spec.beta2_star, kNumQuad, "beta2_star");
  require_dim(spec.gamma1, kNumRegressors, "gamma1");
  require_dim(spec.gamma1_star, kNumRegressors, "gamma1_star");
  require_dim(spec.gamma2, kNumQuad, "gamma2");
  require_dim(spec.gamma2_star, kNumQuad, "gamma2_star");

  Eigen::VectorXd rmean = spec.regressor_mean;
  if (rmean.size() == 0) rmean = Eigen::VectorXd::Zero(kNumRegressors);
  require_dim(rmean, kNumRegressors, "regressor_mean");

  // Truth carriers reuse the fit structs so tests can predict/evaluate with
  // the same code paths as estimates.
  LocationFit loc;
  loc.beta0 = spec.beta0;
  loc.eta = spec.eta;
  loc.beta1 = spec.beta1;
  loc.beta1_star = spec.beta1_star;
  loc.beta2 = spec.beta2;
  loc.beta2_star = spec.beta2_star;
  loc.convergence.converged = true;
  ScaleFit sc;
  sc.gamma0 = spec.gamma0;
  sc.theta = spec.theta;
  sc.gamma1 = spec.gamma1;
  sc.gamma1_star = spec.gamma1_star;
  sc.gamma2 = spec.gamma2;
  sc.gamma2_star = spec.gamma2_star;
  sc.convergence.converged = true;

  Rng fe_rng(spec.seed, 0xFE);
  Eigen::VectorXd lambda(spec.n), sigma_fe(spec.n);
  for (int i = 0; i < spec.n; ++i) lambda[i] = spec.lambda_sd * fe_rng.normal();
  for (int i = 0; i < spec.n; ++i)
    sigma_fe[i] = spec.sigma_fe_sd * fe_rng.normal();
  // Recenter so the sum-to-zero normalizations hold exactly in the DGP.
  lambda.array() -= lambda.mean();
  sigma_fe.array() -= sigma_fe.mean();
  loc.lambda = lambda;
  sc.sigma = sigma_fe;

  const int width = static_cast<int>(std::to_string(spec.n).size());
  const double fshare = std::sqrt(std::clamp(spec.regressor_corr, 0.0, 1.0));
  const double ishare = std::sqrt(1.0 - std::clamp(spec.regressor_corr, 0.0, 1.0));

  std::vector<PanelRow> rows;
  std::vector<double> true_u, true_scale;
  std::int64_t redraws = 0;
  std::int64_t total_draws = 0;

  for (int i = 0; i < spec.n; ++i) {
    Rng rng(spec.seed, 0x0B5E0000ULL + static_cast<std::uint64_t>(i));
    std::ostringstream id;
    id << "B" << std::setfill('0') << std::setw(width) << (i + 1);

    // Unbalanced option: middle years dropped at missing_rate, first and last
    // kept so every bank has >= 2 observations.
    std::vector<int> years;
    for (int t = 1; t <= spec.T; ++t) {
      if (t == 1 || t == spec.T || spec.missing_rate <= 0.0 ||
          rng.uniform() >= spec.missing_rate)
        years.push_back(t);
    }

    for (int t : years) {
      Eigen::Matrix<double, kNumRegressors, 1> v;
      double scale = -1.0;
      for (int attempt = 0; attempt < 200; ++attempt) {
        ++total_draws;
        const double f = rng.normal();
        for (int j = 0; j < kNumRegressors; ++j)
          v[j] = rmean[j] +
                 spec.regressor_sd * (fshare * f + ishare * rng.normal());
        scale = scale_value(sc, v, t, sigma_fe[i]);
        if (scale > 0.0) break;
        ++redraws;
        scale = -1.0;
      }
      if (!(scale > 0.0))
        throw Error(ErrorKind::data,
                    "simulate_panel: could not draw a positive scale; "
                    "check the scale coefficients");

      const double eps = draw_innovation(rng, spec.innovation);
      const double u = scale * eps;
      const double c = location_value(loc, v, t, lambda[i]) + u;

      PanelRow row;
      row.bank_id = id.str();
      row.year = spec.start_year + t - 1;
      for (int j = 0; j < kNumRegressors; ++j)
        row.values[static_cast<std::size_t>(j)] = std::exp(v[j]);
      row.values[9] = std::exp(c);
      rows.push_back(std::move(row));
      true_u.push_back(u);
      true_scale.push_back(scale);
    }
  }

  if (redraws * 2 > total_draws)
    throw Error(ErrorKind::data,
                "simulate_panel: more than half of regressor draws rejected "
                "by scale positivity; the spec is inconsistent with "
                "assumption (iii)");

  SimulatedPanel out;
  out.panel = validate_panel(std::move(rows));
  if (!out.panel.rejected.empty())
    throw Error(ErrorKind::data,
                "simulate_panel: generated levels overflowed the positivity "
                "screen; moderate the coefficient magnitudes");
  out.design = build_design(out.panel);
  out.spec = spec;
  out.scale_redraws = redraws;

  // Row order survives validate_panel (ids are zero-padded and years
  // ascending), so the truth vectors align with the design.
  loc.residuals =
      Eigen::Map<const Eigen::VectorXd>(true_u.data(),
                                        static_cast<Eigen::Index>(true_u.size()));
  sc.scale_values = Eigen::Map<const Eigen::VectorXd>(
      true_scale.data(), static_cast<Eigen::Index>(true_scale.size()));
  out.true_location = std::move(loc);
  out.true_scale = std::move(sc);
  return out;
}

double oracle_qreg_1d(const std::vector<double>& u, const std::vector<double>& z,
                      double tau) {
  if (u.empty() || u.size() != z.size())
    throw Error(ErrorKind::compute, "oracle_qreg_1d: bad input");
  std::vector<double> candidates;
  candidates.reserve(2 * u.size());
  std::vector<double> ratio(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!(z[i] > 0.0))
      throw Error(ErrorKind::compute, "oracle_qreg_1d: z must be positive");
    ratio[i] = u[i] / z[i];
  }
  std::sort(ratio.begin(), ratio.end());
  for (std::size_t i = 0; i < ratio.size(); ++i) {
    candidates.push_back(ratio[i]);
    if (i + 1 < ratio.size())
      candidates.push_back(0.5 * (ratio[i] + ratio[i + 1]));
  }

  auto objective = [&](double q) {
    double obj = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double xi = u[i] - z[i] * q;
      obj += xi * (tau - (xi < 0.0 ? 1.0 : 0.0));
    }
    return obj;
  };

  double best_q = candidates.front();
  double best = objective(best_q);
  for (double q : candidates) {
    const double obj = objective(q);
    // Strictly better, or equal within roundoff and smaller q.
    if (obj < best - 1e-12 * (1.0 + std::fabs(best)) ||
        (obj <= best + 1e-12 * (1.0 + std::fabs(best)) && q < best_q)) {
      best = std::min(best, obj);
      best_q = q;
    }
  }
  return best_q;
}

Eigen::Matrix<double, kNumRegressors, 1> oracle_fd_gradient(
    const QuantileCoeffs& coeffs,
    const Eigen::Matrix<double, kNumRegressors, 1>& v, double step) {
  Eigen::Matrix<double, kNumRegressors, 1> g;
  Eigen::Matrix<double, kNumRegressors, 1> vp = v;
  for (int j = 0; j < kNumRegressors; ++j) {
    const double h = step * std::max(1.0, std::fabs(v[j]));
    vp[j] = v[j] + h;
    const double fp = predict_quantile(coeffs, vp);
    vp[j] = v[j] - h;
    const double fm = predict_quantile(coeffs, vp);
    vp[j] = v[j];
    g[j] = (fp - fm) / (2.0 * h);
  }
  return g;
}

double oracle_quantile_by_simulation(
    const DgpSpec& spec, const Eigen::Matrix<double, kNumRegressors, 1>& v,
    int t, double tau, int draws, std::uint64_t seed) {
  if (draws < 10)
    throw Error(ErrorKind::compute, "oracle_quantile_by_simulation: draws too small");
  LocationFit loc;
  loc.beta0 = spec.beta0;
  loc.eta = spec.eta;
  loc.beta1 = spec.beta1;
  loc.beta1_star = spec.beta1_star;
  loc.beta2 = spec.beta2;
  loc.beta2_star = spec.beta2_star;
  ScaleFit sc;
  sc.gamma0 = spec.gamma0;
  sc.theta = spec.theta;
  sc.gamma1 = spec.gamma1;
  sc.gamma1_star = spec.gamma1_star;
  sc.gamma2 = spec.gamma2;
  sc.gamma2_star = spec.gamma2_star;

  const double base = location_value(loc, v, t, 0.0);
  const double scale = scale_value(sc, v, t, 0.0);
  Rng rng(seed, 0x51);
  std::vector<double> c(static_cast<std::size_t>(draws));
  for (auto& ci : c) ci = base + scale * draw_innovation(rng, spec.innovation);
  std::sort(c.begin(), c.end());
  return stats::nearest_rank(c, tau);
}

}  // namespace qcost
