#include <doctest.h>

#include <cmath>

#include "qcost/design.hpp"
#include "qcost/errors.hpp"
#include "testutil.hpp"

using namespace qcost;

TEST_CASE("quad_index covers the packed upper triangle") {
  CHECK(quad_index(0, 0) == 0);
  CHECK(quad_index(0, 8) == 8);
  CHECK(quad_index(1, 1) == 9);
  CHECK(quad_index(8, 8) == 44);
}

TEST_CASE("all-ones row maps to zero logs and zero quadratic") {
  std::vector<PanelRow> rows = {testutil::unit_row("B1", 2001),
                                testutil::unit_row("B1", 2002)};
  const auto design = build_design(validate_panel(std::move(rows)));
  CHECK(design.v.row(0).cwiseAbs().maxCoeff() == 0.0);
  CHECK(design.vquad.row(0).cwiseAbs().maxCoeff() == 0.0);
  CHECK(design.logc[0] == 0.0);
}

TEST_CASE("single unit log lands on the diagonal") {
  auto r1 = testutil::unit_row("B1", 2001);
  r1.values[0] = std::exp(1.0);  // Y1 = e
  std::vector<PanelRow> rows = {r1, testutil::unit_row("B1", 2002)};
  const auto design = build_design(validate_panel(std::move(rows)));
  CHECK(design.v(0, 0) == doctest::Approx(1.0));
  CHECK(design.vquad(0, quad_index(0, 0)) == doctest::Approx(1.0));
  // Everything else zero.
  CHECK(design.vquad.row(0).sum() == doctest::Approx(1.0));
}

TEST_CASE("cross terms carry weight two so the half-quadratic form matches") {
  // v = (1, 1, 0, ...): diagonal entries 1,1 and the cross entry 2, so that
  // 0.5 * (b11, b22, 2 b12-weighted) reproduces 0.5(b11 + b22) + b12.
  Eigen::Matrix<double, kNumRegressors, 1> v = Eigen::Matrix<double, 9, 1>::Zero();
  v[0] = 1.0;
  v[1] = 1.0;
  const auto q = quad_expand(v);
  CHECK(q[quad_index(0, 0)] == 1.0);
  CHECK(q[quad_index(1, 1)] == 1.0);
  CHECK(q[quad_index(0, 1)] == 2.0);

  // Hand expansion of vec(vv') against the packed form for random coefs.
  Eigen::Matrix<double, kNumQuad, 1> coef = Eigen::Matrix<double, 45, 1>::Zero();
  coef[quad_index(0, 0)] = 0.7;   // b11
  coef[quad_index(1, 1)] = -0.4;  // b22
  coef[quad_index(0, 1)] = 0.3;   // b12
  const double packed = 0.5 * coef.dot(q);
  const double direct = 0.5 * (0.7 + (-0.4)) + 0.3;
  CHECK(packed == doctest::Approx(direct).epsilon(1e-15));
}

TEST_CASE("build_design is deterministic and ordered by bank then year") {
  const auto panel = testutil::random_panel(4, 3, 99);
  const auto d1 = build_design(panel);
  const auto d2 = build_design(panel);
  CHECK((d1.v - d2.v).cwiseAbs().maxCoeff() == 0.0);
  CHECK((d1.logc - d2.logc).cwiseAbs().maxCoeff() == 0.0);
  for (Eigen::Index i = 1; i < d1.rows(); ++i) {
    const auto a = d1.group[static_cast<std::size_t>(i - 1)];
    const auto b = d1.group[static_cast<std::size_t>(i)];
    CHECK(a <= b);
    if (a == b)
      CHECK(d1.time[static_cast<std::size_t>(i - 1)] <
            d1.time[static_cast<std::size_t>(i)]);
  }
}

TEST_CASE("within transform demeans per bank") {
  Eigen::VectorXd v(5);
  v << 1, 3, 10, 20, 30;
  const std::vector<int> group = {0, 0, 1, 1, 1};
  const auto out = within_transform(v, group);
  CHECK(out[0] == doctest::Approx(-1.0));
  CHECK(out[1] == doctest::Approx(1.0));
  CHECK(out[2] == doctest::Approx(-10.0));
  CHECK(out[3] == doctest::Approx(0.0));
  CHECK(out[4] == doctest::Approx(10.0));
}

TEST_CASE("two-bank hand case and constant absorption") {
  Eigen::VectorXd v(5);
  v << 1, 2, 3, 10, 20;
  const std::vector<int> group = {0, 0, 0, 1, 1};
  const auto out = within_transform(v, group);
  CHECK(out[0] == doctest::Approx(-1.0));
  CHECK(out[1] == doctest::Approx(0.0));
  CHECK(out[2] == doctest::Approx(1.0));
  CHECK(out[3] == doctest::Approx(-5.0));
  CHECK(out[4] == doctest::Approx(5.0));

  // Adding a constant within a bank leaves the transform unchanged.
  Eigen::VectorXd shifted = v;
  shifted.segment(0, 3).array() += 17.0;
  const auto out2 = within_transform(shifted, group);
  CHECK((out - out2).cwiseAbs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-12));

  // Constant series within a bank goes to exactly zero.
  Eigen::VectorXd constant(4);
  constant << 5, 5, 7, 7;
  const auto zeros = within_transform(constant, {0, 0, 1, 1});
  CHECK(zeros.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("singleton group raises") {
  Eigen::VectorXd v(3);
  v << 1, 2, 3;
  CHECK_THROWS_AS(within_transform(v, {0, 0, 1}), Error);
}

TEST_CASE("within-transformed series sums to zero within tolerance") {
  const auto panel = testutil::random_panel(6, 5, 5);
  const auto d = build_design(panel);
  const auto out = within_transform(d.logc, d.group);
  for (std::size_t b = 0; b < d.bank_start.size(); ++b) {
    const double sum =
        out.segment(d.bank_start[b], d.bank_count[b]).sum();
    const double mag =
        d.logc.segment(d.bank_start[b], d.bank_count[b]).cwiseAbs().sum();
    CHECK(std::fabs(sum) <= 1e-12 * std::max(1.0, mag));
  }
}
