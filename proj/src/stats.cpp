#include "qcost/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "qcost/errors.hpp"

namespace qcost::stats {

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// AS241 (Wichura 1988), ~1e-15 relative accuracy.
double norm_quantile(double p) {
  if (p <= 0.0) return -std::numeric_limits<double>::infinity();
  if (p >= 1.0) return std::numeric_limits<double>::infinity();

  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                 6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
               1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
             1.3314166789178437745e+2) * r + 3.3871328727963666080e+0) /
           (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                 3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
               5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
             4.2313330701600911252e+1) * r + 1.0);
  }

  double r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
              3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
            4.63033784615654529590e+0) * r + 1.42343711074968357734e+0) /
          (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
              6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
            2.05319162663775882187e+0) * r + 1.0);
  } else {
    r -= 5.0;
    val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
              2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
            5.46378491116411436990e+0) * r + 6.65790464350110377720e+0) /
          (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
              1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
            5.99832206555887937690e-1) * r + 1.0);
  }
  return (q < 0.0) ? -val : val;
}

double nearest_rank(const std::vector<double>& sorted, double p) {
  if (sorted.empty())
    throw Error(ErrorKind::compute, "nearest_rank on empty sample");
  const auto n = sorted.size();
  // The 1e-9 slack keeps Phi(Phi^-1(p)) round-trips from bumping the rank.
  auto k = static_cast<std::ptrdiff_t>(
      std::ceil(p * static_cast<double>(n) - 1e-9));
  k = std::clamp<std::ptrdiff_t>(k, 1, static_cast<std::ptrdiff_t>(n));
  return sorted[static_cast<std::size_t>(k - 1)];
}

namespace {
// Median of a sorted range [lo, hi] inclusive.
double sorted_median(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
  const std::size_t len = hi - lo + 1;
  const std::size_t mid = lo + len / 2;
  return (len % 2 == 1) ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}
}  // namespace

FiveNumber five_number(std::vector<double> values) {
  if (values.empty())
    throw Error(ErrorKind::compute, "five_number on empty sample");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  FiveNumber f{};
  f.min = values.front();
  f.max = values.back();
  f.median = sorted_median(values, 0, n - 1);
  // Tukey hinges: halves include the median when n is odd.
  const std::size_t half_hi = (n % 2 == 1) ? n / 2 : n / 2 - 1;
  f.q1 = sorted_median(values, 0, half_hi);
  f.q3 = sorted_median(values, (n % 2 == 1) ? n / 2 : n / 2, n - 1);
  return f;
}

double mean(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) /
         static_cast<double>(values.size());
}

double stddev(const std::vector<double>& values) {
  const std::size_t n = values.size();
  if (n < 2) return 0.0;
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(n - 1));
}

double weighted_quantile(const std::vector<double>& r,
                         const std::vector<double>& w, double tau) {
  if (r.empty() || r.size() != w.size())
    throw Error(ErrorKind::compute, "weighted_quantile: empty or mismatched input");
  if (!(tau > 0.0 && tau < 1.0))
    throw Error(ErrorKind::compute, "weighted_quantile: tau outside (0,1)");

  std::vector<std::size_t> order(r.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return r[a] < r[b];
  });

  double total = 0.0;
  for (double wi : w) {
    if (!(wi > 0.0))
      throw Error(ErrorKind::compute, "weighted_quantile: nonpositive weight");
    total += wi;
  }

  // Smallest breakpoint whose cumulative weight reaches tau * total; a cum
  // weight exactly equal to the threshold still selects that breakpoint,
  // which is the tie rule "toward the smaller q".
  const double threshold = tau * total;
  double cum = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    cum += w[order[k]];
    if (cum >= threshold - 1e-14 * total) {
      // Equal ratios share the minimizer; return the common value.
      return r[order[k]];
    }
  }
  return r[order.back()];
}

double check_objective(const std::vector<double>& r,
                       const std::vector<double>& w, double tau, double q) {
  double obj = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double xi = r[i] - q;
    obj += w[i] * xi * (tau - (xi < 0.0 ? 1.0 : 0.0));
  }
  return obj;
}

LadFit lad_fit(const std::vector<double>& x, const std::vector<double>& y,
               int max_iter) {
  if (x.size() != y.size() || x.size() < 2)
    throw Error(ErrorKind::compute, "lad_fit: need >= 2 paired points");
  const std::size_t n = x.size();
  LadFit fit{0.0, 0.0, 0};

  std::vector<double> ones(n, 1.0);
  std::vector<double> resid(n), ratio, wt;
  ratio.reserve(n);
  wt.reserve(n);

  for (int it = 0; it < max_iter; ++it) {
    // a given b: median of (y - b x)
    for (std::size_t i = 0; i < n; ++i) resid[i] = y[i] - fit.slope * x[i];
    const double a = weighted_quantile(resid, ones, 0.5);

    // b given a: weighted median of (y - a) / x over x != 0
    ratio.clear();
    wt.clear();
    for (std::size_t i = 0; i < n; ++i) {
      const double ax = std::fabs(x[i]);
      if (ax > 1e-300) {
        ratio.push_back((y[i] - a) / x[i]);
        wt.push_back(ax);
      }
    }
    double b = fit.slope;
    if (!ratio.empty()) b = weighted_quantile(ratio, wt, 0.5);

    fit.iterations = it + 1;
    const bool settled =
        std::fabs(a - fit.intercept) <= 1e-12 * (1.0 + std::fabs(a)) &&
        std::fabs(b - fit.slope) <= 1e-12 * (1.0 + std::fabs(b));
    fit.intercept = a;
    fit.slope = b;
    if (settled) break;
  }
  return fit;
}

KernelDensity gaussian_kde(const std::vector<double>& values,
                           std::size_t grid_points) {
  if (values.size() < 2)
    throw Error(ErrorKind::compute, "gaussian_kde: need >= 2 points");
  const std::size_t n = values.size();

  std::vector<double> sorted(values);
  std::sort(sorted.begin(), sorted.end());
  const double sd = stddev(values);
  const double q1 = nearest_rank(sorted, 0.25);
  const double q3 = nearest_rank(sorted, 0.75);
  const double iqr = q3 - q1;
  double spread = sd;
  if (iqr > 0.0) spread = std::min(sd, iqr / 1.34);
  if (spread <= 0.0) spread = std::max(std::fabs(sorted.back()), 1.0) * 1e-3;
  const double h =
      0.9 * spread * std::pow(static_cast<double>(n), -0.2);

  KernelDensity kd;
  kd.bandwidth = h;
  const double lo = sorted.front() - 3.0 * h;
  const double hi = sorted.back() + 3.0 * h;
  const double step = (hi - lo) / static_cast<double>(grid_points - 1);
  kd.grid.resize(grid_points);
  kd.density.resize(grid_points);
  const double norm = 1.0 / (static_cast<double>(n) * h * std::sqrt(2.0 * M_PI));
  for (std::size_t g = 0; g < grid_points; ++g) {
    const double s = lo + step * static_cast<double>(g);
    kd.grid[g] = s;
    double acc = 0.0;
    for (double v : values) {
      const double z = (s - v) / h;
      acc += std::exp(-0.5 * z * z);
    }
    kd.density[g] = acc * norm;
  }
  return kd;
}

}  // namespace qcost::stats
