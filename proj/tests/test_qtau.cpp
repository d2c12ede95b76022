#include <doctest.h>

#include <cmath>
#include <vector>

#include "qcost/errors.hpp"
#include "qcost/estimator.hpp"
#include "qcost/rng.hpp"
#include "qcost/synthetic.hpp"

using namespace qcost;

namespace {

Eigen::VectorXd to_vec(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(),
                                           static_cast<Eigen::Index>(v.size()));
}

double objective(const std::vector<double>& u, const std::vector<double>& z,
                 double tau, double q) {
  double o = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double xi = u[i] - z[i] * q;
    o += xi * (tau - (xi < 0.0 ? 1.0 : 0.0));
  }
  return o;
}

}  // namespace

TEST_CASE("unit scale median of {-1,0,1} is 0") {
  CHECK(estimate_q_tau(to_vec({-1, 0, 1}), to_vec({1, 1, 1}), 0.5) == 0.0);
}

TEST_CASE("perfect proportionality returns the common ratio at any tau") {
  const Eigen::VectorXd z = to_vec({0.5, 1.0, 2.0, 3.0});
  const double c = -0.37;
  for (double tau : {0.1, 0.25, 0.5, 0.9})
    CHECK(estimate_q_tau(c * z, z, tau) == doctest::Approx(c).epsilon(1e-15));
}

TEST_CASE("five distinct ratios match the breakpoint-enumeration oracle") {
  const std::vector<double> u = {0.3, -1.2, 2.0, 0.7, -0.1};
  const std::vector<double> z = {1.0, 0.4, 2.5, 1.3, 0.8};
  for (double tau : {0.2, 0.5, 0.8}) {
    const double fast = estimate_q_tau(to_vec(u), to_vec(z), tau);
    const double slow = oracle_qreg_1d(u, z, tau);
    CHECK(fast == doctest::Approx(slow).epsilon(1e-14));
  }
}

TEST_CASE("oracle equivalence on random instances") {
  Rng rng(314);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(50));
    std::vector<double> u(static_cast<std::size_t>(n)),
        z(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      u[static_cast<std::size_t>(i)] = rng.normal();
      z[static_cast<std::size_t>(i)] = 0.05 + 2.0 * rng.uniform();
    }
    const double tau = 0.02 + 0.96 * rng.uniform();
    const double fast = estimate_q_tau(to_vec(u), to_vec(z), tau);
    const double slow = oracle_qreg_1d(u, z, tau);
    CHECK(std::fabs(objective(u, z, tau, fast) - objective(u, z, tau, slow)) <=
          1e-12 * (1.0 + std::fabs(objective(u, z, tau, slow))));
    CHECK(fast == doctest::Approx(slow).epsilon(1e-12));
  }
}

TEST_CASE("monotone in tau") {
  Rng rng(99);
  const int n = 40;
  std::vector<double> u(n), z(n);
  for (int i = 0; i < n; ++i) {
    u[static_cast<std::size_t>(i)] = rng.normal();
    z[static_cast<std::size_t>(i)] = 0.1 + rng.uniform();
  }
  double prev = -1e300;
  for (double tau : {0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95}) {
    const double q = estimate_q_tau(to_vec(u), to_vec(z), tau);
    CHECK(q >= prev);
    prev = q;
  }
}

TEST_CASE("nonpositive scale rows are excluded, all-excluded raises") {
  const Eigen::VectorXd u = to_vec({5.0, 1.0, 2.0});
  const Eigen::VectorXd z = to_vec({-1.0, 1.0, 1.0});
  // Excluding the first row leaves ratios {1, 2}; the exact tie at tau = 0.5
  // resolves toward the smaller breakpoint.
  CHECK(estimate_q_tau(u, z, 0.5) == 1.0);
  CHECK_THROWS_AS(estimate_q_tau(u, to_vec({-1.0, -2.0, 0.0}), 0.5), Error);
  CHECK_THROWS_AS(estimate_q_tau(u, z, 1.5), Error);
  CHECK_THROWS_AS(estimate_q_tau(u, z, 0.0), Error);
}

TEST_CASE("oracle single observation and extreme tau") {
  CHECK(oracle_qreg_1d({1.4}, {0.7}, 0.3) == doctest::Approx(2.0));
  const std::vector<double> u = {3.0, -1.0, 0.5};
  const std::vector<double> z = {1.0, 1.0, 1.0};
  CHECK(oracle_qreg_1d(u, z, 0.001) == doctest::Approx(-1.0));
  CHECK(oracle_qreg_1d(u, z, 0.999) == doctest::Approx(3.0));
}
