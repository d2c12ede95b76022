#include <doctest.h>

#include <cmath>
#include <limits>
#include <set>

#include <algorithm>

#include "qcost/errors.hpp"
#include "qcost/measures.hpp"
#include "qcost/stats.hpp"
#include "qcost/synthetic.hpp"
#include "testutil.hpp"

using namespace qcost;

namespace {

// Panel with controlled output levels; other variables fixed at benign values.
PanelDataset outputs_panel(const std::vector<std::array<double, 3>>& outputs) {
  std::vector<PanelRow> rows;
  int b = 0;
  for (const auto& y : outputs) {
    for (int t = 0; t < 2; ++t) {
      PanelRow r;
      r.bank_id = "B" + std::string(2 - std::to_string(b + 1).size(), '0') +
                  std::to_string(b + 1);
      r.year = 2001 + t;
      r.values = {y[0], y[1], y[2], 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
      rows.push_back(std::move(r));
    }
    ++b;
  }
  return validate_panel(std::move(rows));
}

SampleStats wide_stats(const PanelDataset& panel) {
  SampleStats s = compute_sample_stats(panel);
  for (int m = 0; m < 3; ++m)
    for (int k = 0; k < 3; ++k) {
      s.ratio_lo[static_cast<std::size_t>(m)][static_cast<std::size_t>(k)] = 0.0;
      s.ratio_hi[static_cast<std::size_t>(m)][static_cast<std::size_t>(k)] =
          std::numeric_limits<double>::infinity();
    }
  return s;
}

}  // namespace

TEST_CASE("sample stats cache minima and ratio ranges") {
  const auto panel = outputs_panel({{10, 20, 40}, {20, 10, 80}});
  const auto s = compute_sample_stats(panel);
  CHECK(s.ymin[0] == 10);
  CHECK(s.ymin[1] == 10);
  CHECK(s.ymin[2] == 40);
  CHECK(s.ratio_lo[0][1] == doctest::Approx(0.5));
  CHECK(s.ratio_hi[0][1] == doctest::Approx(2.0));
  CHECK(s.ratio_lo[2][0] == doctest::Approx(4.0));
}

TEST_CASE("grid step 0.5 reproduces the hand-enumerated per-output lattice") {
  const auto panel = outputs_panel({{100, 100, 100}, {10, 10, 10}});
  const auto stats = wide_stats(panel);
  // Per output there are C(4,2) = 6 distributions over the three banks;
  // unconstrained admissibility -> 6^3 triples.
  const auto triples =
      admissible_weights({100, 100, 100}, stats, 0.5);
  CHECK(triples.size() == 6 * 6 * 6);

  std::set<std::array<double, 3>> seen;
  for (const auto& t : triples) seen.insert(t.w[0]);
  CHECK(seen.size() == 6);
  CHECK(seen.count({0.0, 0.0, 1.0}) == 1);
  CHECK(seen.count({0.0, 0.5, 0.5}) == 1);
  CHECK(seen.count({0.5, 0.5, 0.0}) == 1);
  CHECK(seen.count({1.0, 0.0, 0.0}) == 1);
  for (const auto& t : triples)
    for (int m = 0; m < 3; ++m)
      CHECK(t.w[m][0] + t.w[m][1] + t.w[m][2] == doctest::Approx(1.0));
}

TEST_CASE("unbounded ratios give the full simplex grid at step 0.1") {
  const auto panel = outputs_panel({{100, 100, 100}, {10, 10, 10}});
  const auto stats = wide_stats(panel);
  const auto triples = admissible_weights({100, 100, 100}, stats, 0.1);
  // C(12,2) = 66 lattice points per output.
  CHECK(triples.size() == 66 * 66 * 66);
}

TEST_CASE("rebased output below zero marks the observation inadmissible") {
  // min Y1 = 10 across the sample; the observation Y1 = 20 < 3*10 has
  // Y1* < 0 and is flagged rather than clamped.
  const auto panel =
      outputs_panel({{10, 50, 50}, {20, 160, 160}, {90, 200, 210}});
  const auto stats = wide_stats(panel);
  ScopeGrid grid({20, 160, 160}, stats, 0.1);
  CHECK(!grid.observation_admissible());
  CHECK(admissible_weights({20, 160, 160}, stats, 0.1).empty());
  ScopeGrid ok_grid({90, 200, 210}, stats, 0.1);
  CHECK(ok_grid.observation_admissible());
}

TEST_CASE("additive cost surface has zero subadditivity everywhere") {
  const auto panel =
      outputs_panel({{100, 120, 140}, {40, 50, 60}, {400, 300, 200}});
  const auto stats = wide_stats(panel);
  const std::array<double, 3> obs = {400, 300, 200};
  ScopeGrid grid(obs, stats, 0.1);
  REQUIRE(grid.observation_admissible());
  const auto res = subadditivity(
      grid,
      [](const std::array<double, 3>& y) {
        return std::log(y[0] + y[1] + y[2]);
      },
      obs);
  REQUIRE(res.admissible);
  CHECK(std::fabs(res.s_star) <= 1e-10);
}

TEST_CASE("concave cost surface yields strictly positive subadditivity") {
  const auto panel =
      outputs_panel({{100, 120, 140}, {40, 50, 60}, {400, 300, 200}});
  const auto stats = wide_stats(panel);
  const std::array<double, 3> obs = {400, 300, 200};
  ScopeGrid grid(obs, stats, 0.1);
  REQUIRE(grid.observation_admissible());
  const auto res = subadditivity(
      grid,
      [](const std::array<double, 3>& y) {
        return 0.5 * std::log(y[0] + y[1] + y[2]);
      },
      obs);
  REQUIRE(res.admissible);
  CHECK(res.s_star > 0.0);

  // Brute-force oracle over the admissible triple list.
  const auto triples = admissible_weights(obs, stats, 0.1);
  double best = std::numeric_limits<double>::infinity();
  const double corig = std::sqrt(obs[0] + obs[1] + obs[2]);
  for (const auto& t : triples) {
    double sum = 0.0;
    for (int kap = 0; kap < 3; ++kap) {
      double tot = 0.0;
      for (int m = 0; m < 3; ++m)
        tot += t.w[m][kap] * (obs[m] - 3.0 * stats.ymin[m]) + stats.ymin[m];
      sum += std::sqrt(tot);
    }
    best = std::min(best, (sum - corig) / corig);
  }
  CHECK(res.s_star == doctest::Approx(best).epsilon(1e-12));
  CHECK(static_cast<std::size_t>(res.admissible_triples) == triples.size());
}

TEST_CASE("finer grids never increase the minimum") {
  const auto panel =
      outputs_panel({{100, 120, 140}, {40, 50, 60}, {400, 300, 200}});
  const auto stats = wide_stats(panel);
  const std::array<double, 3> obs = {400, 300, 200};
  auto surface = [](const std::array<double, 3>& y) {
    return 0.4 * std::log(y[0] + 2.0 * y[1] + 0.5 * y[2]) +
           0.1 * std::log(y[0] + 1.0);
  };
  ScopeGrid coarse(obs, stats, 0.1);
  ScopeGrid fine(obs, stats, 0.05);
  const auto rc = subadditivity(coarse, surface, obs);
  const auto rf = subadditivity(fine, surface, obs);
  REQUIRE(rc.admissible);
  REQUIRE(rf.admissible);
  CHECK(rf.s_star <= rc.s_star + 1e-12);
}

TEST_CASE("quadratic fast path agrees with the generic path") {
  const auto sim = simulate_panel(DgpSpec::baseline(65, 3, 77));
  auto fit = fit_model(sim.design, {0.5});
  const auto stats = compute_sample_stats(sim.panel);
  const auto coeffs =
      quantile_coefficients(fit.location, fit.scale, fit.q_taus[0], 2);

  int checked = 0;
  for (std::size_t i = 0; i < sim.panel.rows.size() && checked < 4; ++i) {
    if (sim.design.time[i] != 2) continue;
    const auto& row = sim.panel.rows[i];
    const std::array<double, 3> obs = {row.output(0), row.output(1),
                                       row.output(2)};
    ScopeGrid grid(obs, stats, 0.1);
    if (!grid.observation_admissible()) continue;
    const Eigen::Matrix<double, kNumRegressors, 1> v =
        sim.design.v.row(static_cast<Eigen::Index>(i)).transpose();
    const double mu = fit.mu(sim.design.group[i], 0);
    const auto surf = restrict_to_outputs(coeffs, v, mu);

    const auto fast = subadditivity(grid, surf, obs);
    const auto slow = subadditivity(
        grid,
        [&](const std::array<double, 3>& y) {
          Eigen::Matrix<double, kNumRegressors, 1> vv = v;
          vv[0] = std::log(y[0]);
          vv[1] = std::log(y[1]);
          vv[2] = std::log(y[2]);
          return predict_quantile(coeffs, vv, mu);
        },
        obs);
    CHECK(fast.admissible == slow.admissible);
    if (fast.admissible) {
      CHECK(fast.s_star == doctest::Approx(slow.s_star).epsilon(1e-10));
      ++checked;
    }
  }
  CHECK(checked > 0);
}

TEST_CASE("quantile gradient matches finite differences") {
  Rng rng(55);
  for (int trial = 0; trial < 300; ++trial) {
    const auto coeffs = testutil::random_coeffs(1000 + trial);
    Eigen::Matrix<double, kNumRegressors, 1> v;
    for (int j = 0; j < kNumRegressors; ++j) v[j] = rng.normal();
    const auto g = quantile_gradient(coeffs, v);
    const auto fd = oracle_fd_gradient(coeffs, v, 1e-5);
    for (int j = 0; j < kNumRegressors; ++j)
      CHECK(g[j] == doctest::Approx(fd[j]).epsilon(1e-6));
  }
}

TEST_CASE("gradient trivial cases") {
  auto coeffs = testutil::random_coeffs(4);
  coeffs.alpha2.setZero();
  Eigen::Matrix<double, kNumRegressors, 1> v;
  for (int j = 0; j < kNumRegressors; ++j) v[j] = 0.3 * j - 1.0;
  CHECK((quantile_gradient(coeffs, v) - coeffs.alpha1).cwiseAbs().maxCoeff() ==
        0.0);
  const auto coeffs2 = testutil::random_coeffs(5);
  const Eigen::Matrix<double, kNumRegressors, 1> zero =
      Eigen::Matrix<double, 9, 1>::Zero();
  CHECK((quantile_gradient(coeffs2, zero) - coeffs2.alpha1)
            .cwiseAbs()
            .maxCoeff() == 0.0);
}

TEST_CASE("returns to scale hand cases") {
  QuantileCoeffs c;
  c.alpha0 = 0.0;
  c.alpha1.setZero();
  c.alpha2.setZero();
  const Eigen::Matrix<double, kNumRegressors, 1> v =
      Eigen::Matrix<double, 9, 1>::Zero();

  // Output elasticities sum to 0.5, no equity effect -> R = 2.
  c.alpha1[0] = 0.2;
  c.alpha1[1] = 0.2;
  c.alpha1[2] = 0.1;
  auto r = returns_to_scale(c, v);
  REQUIRE(r.valid);
  CHECK(r.value == doctest::Approx(2.0));

  // Homogeneous of degree one in outputs -> R = 1.
  c.alpha1[0] = 0.5;
  c.alpha1[1] = 0.3;
  c.alpha1[2] = 0.2;
  r = returns_to_scale(c, v);
  CHECK(r.value == doctest::Approx(1.0));

  // Equity elasticity 0.2, output sum 0.4 -> R = (1 - 0.2) / 0.4 = 2.
  c.alpha1[0] = 0.4;
  c.alpha1[1] = 0.0;
  c.alpha1[2] = 0.0;
  c.alpha1[6] = 0.2;
  r = returns_to_scale(c, v);
  CHECK(r.value == doctest::Approx(2.0));

  // Nonpositive denominator flagged invalid.
  c.alpha1[0] = -0.4;
  CHECK(!returns_to_scale(c, v).valid);
}

TEST_CASE("fixed effects cancel in RTS and TC") {
  const auto sim = simulate_panel(DgpSpec::baseline(50, 4, 31));
  auto fit = fit_model(sim.design, {0.5});
  const double q = fit.q_taus[0];
  Eigen::Matrix<double, kNumRegressors, 1> v;
  for (int j = 0; j < kNumRegressors; ++j) v[j] = 0.1 * j - 0.4;

  const auto coeffs = quantile_coefficients(fit.location, fit.scale, q, 3);
  // mu enters neither the gradient nor the t-difference.
  const auto g1 = quantile_gradient(coeffs, v);
  const auto tc1 = tech_change(fit.location, fit.scale, q, 3, v);
  LocationFit shifted = fit.location;
  shifted.lambda.array() += 5.0;
  const auto tc2 = tech_change(shifted, fit.scale, q, 3, v);
  CHECK(tc1.total == doctest::Approx(tc2.total).epsilon(1e-14));
  (void)g1;
}

TEST_CASE("technical change identities") {
  const auto sim = simulate_panel(DgpSpec::baseline(40, 5, 37));
  auto fit = fit_model(sim.design, {0.25, 0.75});

  Eigen::Matrix<double, kNumRegressors, 1> v;
  for (int j = 0; j < kNumRegressors; ++j) v[j] = 0.2 - 0.05 * j;

  for (std::size_t k = 0; k < fit.taus.size(); ++k) {
    const double q = fit.q_taus[k];
    for (int t = 2; t <= sim.design.T; ++t) {
      const auto tc = tech_change(fit.location, fit.scale, q, t, v);
      const auto ct = quantile_coefficients(fit.location, fit.scale, q, t);
      const auto cp = quantile_coefficients(fit.location, fit.scale, q, t - 1);
      const double definitional =
          predict_quantile(cp, v) - predict_quantile(ct, v);
      CHECK(std::fabs(tc.total - definitional) <= 1e-12);
      CHECK(tc.total ==
            doctest::Approx(tc.neutral + tc.non_neutral).epsilon(1e-15));
    }
  }

  // No temporal shift: TC = 0 for every v.
  LocationFit flat_loc = fit.location;
  ScaleFit flat_sc = fit.scale;
  flat_loc.eta.setConstant(0.3);
  flat_sc.theta.setConstant(-0.1);
  const auto tc0 = tech_change(flat_loc, flat_sc, 0.9, 3, v);
  CHECK(std::fabs(tc0.total) <= 1e-15);

  // Neutral-only shift of -0.02 with no starred slopes: TC = +0.02.
  flat_loc.eta.setZero();
  flat_loc.eta[2] = -0.02;  // year t = 4
  flat_loc.beta1_star.setZero();
  flat_loc.beta2_star.setZero();
  flat_sc.theta.setZero();
  flat_sc.gamma1_star.setZero();
  flat_sc.gamma2_star.setZero();
  const auto tc4 = tech_change(flat_loc, flat_sc, 1.7, 4, v);
  CHECK(tc4.total == doctest::Approx(0.02).epsilon(1e-12));
  CHECK(tc4.non_neutral == doctest::Approx(0.0));
  CHECK_THROWS_AS(tech_change(flat_loc, flat_sc, 0.5, 1, v), Error);
}

TEST_CASE("monotone equivariance: level-quantile and exp(log-quantile) agree") {
  // Nearest-rank empirical quantiles commute exactly with monotone maps, so
  // S computed from exponentiated log-cost quantiles equals S computed from
  // level-cost quantiles on the same simulated draws.
  auto spec = DgpSpec::baseline(10, 3, 91);
  Rng rng(12);
  const int draws = 20000;

  auto level_and_log_quantile = [&](const Eigen::Matrix<double, kNumRegressors, 1>& v,
                                    double tau) {
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
    const double base = location_value(loc, v, 2, 0.0);
    const double scl = scale_value(sc, v, 2, 0.0);
    std::vector<double> logc(draws), levelc(draws);
    for (int d = 0; d < draws; ++d) {
      const double c = base + scl * rng.normal() * std::sqrt(M_PI / 2.0);
      logc[static_cast<std::size_t>(d)] = c;
      levelc[static_cast<std::size_t>(d)] = std::exp(c);
    }
    std::sort(logc.begin(), logc.end());
    std::sort(levelc.begin(), levelc.end());
    return std::make_pair(stats::nearest_rank(levelc, tau),
                          std::exp(stats::nearest_rank(logc, tau)));
  };

  Eigen::Matrix<double, kNumRegressors, 1> v0 =
      Eigen::Matrix<double, 9, 1>::Zero();
  Eigen::Matrix<double, kNumRegressors, 1> v1 = v0;
  v1[0] = 0.4;
  v1[2] = -0.3;
  for (double tau : {0.25, 0.5, 0.9}) {
    const auto [lvl_a, exp_a] = level_and_log_quantile(v0, tau);
    const auto [lvl_b, exp_b] = level_and_log_quantile(v1, tau);
    CHECK(lvl_a == doctest::Approx(exp_a).epsilon(1e-12));
    CHECK(lvl_b == doctest::Approx(exp_b).epsilon(1e-12));
    // The subadditivity ratio built from either route is then identical.
    const double s_level = (lvl_b - lvl_a) / lvl_a;
    const double s_exp = (exp_b - exp_a) / exp_a;
    CHECK(s_level == doctest::Approx(s_exp).epsilon(1e-12));
  }
}
