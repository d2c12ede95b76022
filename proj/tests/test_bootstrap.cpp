#include <doctest.h>

#include <cmath>

#include "qcost/bootstrap.hpp"
#include "qcost/errors.hpp"
#include "qcost/stats.hpp"
#include "qcost/synthetic.hpp"
#include "testutil.hpp"

using namespace qcost;

TEST_CASE("wild weights have the two-point law moments") {
  const double sqrt5 = std::sqrt(5.0);
  const double w_plus = (1.0 + sqrt5) / 2.0;
  const double w_minus = (1.0 - sqrt5) / 2.0;
  const double p_plus = (sqrt5 - 1.0) / (2.0 * sqrt5);
  // Analytic: E[w] = 0, E[w^2] = 1.
  CHECK(w_plus * p_plus + w_minus * (1.0 - p_plus) ==
        doctest::Approx(0.0).epsilon(1e-15));
  CHECK(w_plus * w_plus * p_plus + w_minus * w_minus * (1.0 - p_plus) ==
        doctest::Approx(1.0).epsilon(1e-15));

  // Monte Carlo moments within 3 standard errors.
  const int draws = 1000000;
  double sum = 0.0, sumsq = 0.0;
  int got_plus = 0;
  for (int r = 0; r < draws / 1000; ++r) {
    const auto w = draw_weights(1000, 99, static_cast<std::uint64_t>(r));
    for (int i = 0; i < w.size(); ++i) {
      sum += w[i];
      sumsq += w[i] * w[i];
      if (w[i] == w_plus) ++got_plus;
    }
  }
  const double mean = sum / draws;
  const double var = sumsq / draws;
  CHECK(std::fabs(mean) < 3.0 / std::sqrt(static_cast<double>(draws)));
  // Var(w^2) = E[w^4] - 1; E[w^4] = 7 for this law, so se = sqrt(6/n).
  CHECK(std::fabs(var - 1.0) < 3.0 * std::sqrt(6.0 / draws));
  CHECK(got_plus > 0);
  CHECK(got_plus < draws);
}

TEST_CASE("weight streams are deterministic and replica-separated") {
  const auto a = draw_weights(50, 7, 3);
  const auto b = draw_weights(50, 7, 3);
  const auto c = draw_weights(50, 7, 4);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a - c).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("identity weights reproduce the base fit") {
  const auto sim = simulate_panel(DgpSpec::baseline(50, 4, 61));
  MmqrEstimator est(sim.design);
  auto fit = fit_model(sim.design, {0.25, 0.75});

  BootstrapConfig cfg;
  cfg.replicas = 2;
  cfg.seed = 5;
  cfg.identity_weights = true;
  const auto run = bootstrap_pipeline(est, fit, fit.taus, cfg);
  REQUIRE(run.failures == 0);
  for (const auto& rep : run.replicas) {
    CHECK((rep.location.eta - fit.location.eta).cwiseAbs().maxCoeff() < 1e-6);
    CHECK((rep.location.beta1 - fit.location.beta1).cwiseAbs().maxCoeff() <
          1e-6);
    CHECK((rep.scale.theta - fit.scale.theta).cwiseAbs().maxCoeff() < 1e-5);
    for (std::size_t k = 0; k < fit.taus.size(); ++k)
      CHECK(rep.q_taus[k] == doctest::Approx(fit.q_taus[k]).epsilon(1e-5));
  }
}

TEST_CASE("noise-free DGP makes every replica reproduce the base parameters") {
  auto spec = DgpSpec::baseline(50, 4, 67);
  spec.innovation = DgpSpec::Innovation::degenerate;
  const auto sim = simulate_panel(spec);
  MmqrEstimator est(sim.design);
  auto fit = fit_model(sim.design, {0.5});

  BootstrapConfig cfg;
  cfg.replicas = 3;
  cfg.seed = 11;
  const auto run = bootstrap_pipeline(est, fit, fit.taus, cfg);
  REQUIRE(run.failures == 0);
  for (const auto& rep : run.replicas) {
    // u = 0, so c^b = c regardless of the weights.
    CHECK((rep.location.eta - fit.location.eta).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((rep.location.beta1 - fit.location.beta1).cwiseAbs().maxCoeff() <
          1e-8);
  }
}

TEST_CASE("block structure: within-bank residual ratios are constant") {
  const auto sim = simulate_panel(DgpSpec::baseline(50, 4, 71));
  MmqrEstimator est(sim.design);
  auto fit = fit_model(sim.design, {0.5});

  // Rebuild one replica's outcome by hand and check u^b / u is constant
  // within each bank (where u != 0).
  const auto w = draw_weights(sim.design.n_banks, 21, 0);
  const Eigen::VectorXd fitted = sim.design.logc - fit.location.residuals;
  for (std::size_t b = 0; b < sim.design.bank_start.size(); ++b) {
    double ratio = 0.0;
    bool have = false;
    for (int j = 0; j < sim.design.bank_count[b]; ++j) {
      const Eigen::Index i = sim.design.bank_start[b] + j;
      const double u = fit.location.residuals[i];
      if (std::fabs(u) < 1e-12) continue;
      const double cb = fitted[i] + w[static_cast<int>(b)] * u;
      const double ub = cb - fitted[i];
      if (!have) {
        ratio = ub / u;
        have = true;
      } else {
        CHECK(ub / u == doctest::Approx(ratio).epsilon(1e-12));
      }
    }
    if (have) CHECK(ratio == doctest::Approx(w[static_cast<int>(b)]));
  }
}

TEST_CASE("bootstrap run is deterministic and threading-independent") {
  const auto sim = simulate_panel(DgpSpec::baseline(50, 4, 73));
  MmqrEstimator est(sim.design);
  auto fit = fit_model(sim.design, {0.25, 0.75});

  BootstrapConfig cfg;
  cfg.replicas = 6;
  cfg.seed = 17;
  cfg.threads = 1;
  const auto serial = bootstrap_pipeline(est, fit, fit.taus, cfg);
  cfg.threads = 4;
  const auto parallel = bootstrap_pipeline(est, fit, fit.taus, cfg);
  REQUIRE(serial.replicas.size() == parallel.replicas.size());
  for (std::size_t r = 0; r < serial.replicas.size(); ++r) {
    CHECK((serial.replicas[r].location.eta -
           parallel.replicas[r].location.eta)
              .cwiseAbs()
              .maxCoeff() == 0.0);
    CHECK(serial.replicas[r].q_taus[0] == parallel.replicas[r].q_taus[0]);
  }
}

TEST_CASE("bc interval: symmetric replicas reduce to plain percentiles") {
  std::vector<double> reps;
  for (int i = 1; i <= 100; ++i) reps.push_back(static_cast<double>(i));
  const auto bc = bc_interval(reps, 50.5, 0.05);
  CHECK(bc.z0 == doctest::Approx(0.0).epsilon(1e-12));
  // Nearest-rank percentiles of 1..100 at 2.5% / 97.5%.
  CHECK(bc.lower_2s == 3.0);
  CHECK(bc.upper_2s == 98.0);
  CHECK(bc.lower_1s == 5.0);
  CHECK(bc.upper_1s == 95.0);
}

TEST_CASE("bc interval saturation guard") {
  std::vector<double> reps;
  for (int i = 1; i <= 100; ++i) reps.push_back(static_cast<double>(i));
  const auto bc = bc_interval(reps, 1000.0, 0.05);  // all replicas below
  CHECK(bc.saturated);
  CHECK(std::isfinite(bc.z0));
  CHECK(bc.z0 == doctest::Approx(stats::norm_quantile(99.5 / 100.0)));
  CHECK(bc.upper_2s == 100.0);  // pushed into the upper tail
}

TEST_CASE("bc interval degenerate replicas") {
  const auto bc = bc_interval({2.0, 2.0, 2.0}, 2.0, 0.05);
  CHECK(bc.degenerate);
  CHECK(bc.lower_2s == 2.0);
  CHECK(bc.upper_2s == 2.0);
}

TEST_CASE("bc interval median bias shifts the percentile indices") {
  // 75 of 100 replicas below the point: z0 = Phi^-1(0.75) > 0 pushes both
  // endpoints upward relative to the plain percentile interval.
  std::vector<double> reps;
  for (int i = 1; i <= 100; ++i) reps.push_back(static_cast<double>(i));
  const auto bc = bc_interval(reps, 75.5, 0.05);
  CHECK(bc.z0 == doctest::Approx(stats::norm_quantile(0.75)));
  CHECK(bc.lower_2s > 3.0);
  CHECK(bc.upper_2s == 100.0);
}

TEST_CASE("classification labels per measure") {
  BcInterval b;
  b.lower_1s = 0.05;
  b.lower_2s = 0.01;
  b.upper_2s = 0.40;
  auto c = classify(0.2, b, MeasureKind::scope);
  CHECK(c.positive);
  CHECK(!c.invariant);
  CHECK(c.positive_label == "scope economies");
  CHECK(c.invariant_label == "scope non-invariance");

  BcInterval r;
  r.lower_1s = 0.99;
  r.lower_2s = 0.98;
  r.upper_2s = 1.04;
  c = classify(1.01, r, MeasureKind::scale);
  CHECK(!c.positive);
  CHECK(c.invariant);
  CHECK(c.positive_label == "non-IRS");
  CHECK(c.invariant_label == "CRS");

  BcInterval t;
  t.lower_1s = -0.002;
  t.lower_2s = -0.01;
  t.upper_2s = 0.03;
  c = classify(0.01, t, MeasureKind::tech_change);
  CHECK(!c.positive);
  CHECK(c.invariant);
  CHECK(c.invariant_label == "technical stasis");
}
