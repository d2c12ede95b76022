#pragma once

#include <cstddef>
#include <vector>

namespace qcost::stats {

// Standard normal cdf.
double norm_cdf(double x);

// Standard normal quantile function (Wichura's AS241, double precision).
// Saturates to +/-inf at p = 1 / p = 0.
double norm_quantile(double p);

// Nearest-rank percentile on a pre-sorted vector: the ceil(p*n)-th smallest,
// clamped to [1, n]. Exact and deterministic at small n.
double nearest_rank(const std::vector<double>& sorted, double p);

// Tukey five-number summary (min, lower hinge, median, upper hinge, max).
struct FiveNumber {
  double min, q1, median, q3, max;
};
FiveNumber five_number(std::vector<double> values);

double mean(const std::vector<double>& values);
double stddev(const std::vector<double>& values);  // with n-1 denominator

// Exact minimizer of sum_i w_i * rho_tau(r_i - q) over scalar q for positive
// weights w_i: the weighted tau-quantile of {r_i}. Ties and exact-boundary
// cases resolve toward the smaller q.
double weighted_quantile(const std::vector<double>& r,
                         const std::vector<double>& w, double tau);

// Check-function objective sum_i w_i * rho_tau(r_i - q).
double check_objective(const std::vector<double>& r,
                       const std::vector<double>& w, double tau, double q);

// Least-absolute-deviation fit y = a + b x by coordinate descent on the two
// exact 1-D weighted-quantile subproblems. Descriptive tool only.
struct LadFit {
  double intercept;
  double slope;
  int iterations;
};
LadFit lad_fit(const std::vector<double>& x, const std::vector<double>& y,
               int max_iter = 50);

// Gaussian kernel density on an equispaced grid with Silverman's rule
// bandwidth h = 0.9 * min(sd, IQR/1.34) * n^(-1/5).
struct KernelDensity {
  double bandwidth;
  std::vector<double> grid;
  std::vector<double> density;
};
KernelDensity gaussian_kde(const std::vector<double>& values,
                           std::size_t grid_points = 256);

}  // namespace qcost::stats
