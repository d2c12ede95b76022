#include "qcost/dominance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "qcost/errors.hpp"
#include "qcost/parallel.hpp"
#include "qcost/rng.hpp"

namespace qcost {

void DominanceProblem::validate() const {
  if (comparisons.empty())
    throw Error(ErrorKind::data, "dominance: comparison set is empty");
  if (comparison_taus.size() != comparisons.size())
    throw Error(ErrorKind::data, "dominance: tau labels do not match columns");
  for (double t : comparison_taus)
    if (t == target_tau)
      throw Error(ErrorKind::data,
                  "dominance: comparison set must exclude the target tau");
  if (target.empty())
    throw Error(ErrorKind::data, "dominance: empty target sample");
  for (const auto& c : comparisons)
    if (c.size() != target.size())
      throw Error(ErrorKind::data,
                  "dominance: samples must be paired by observation");
}

namespace {

// sup over the pooled values of F_a(s) - F_b(s); inputs sorted ascending.
double sup_cdf_difference(const std::vector<double>& a,
                          const std::vector<double>& b) {
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double best = -1.0;
  while (i < a.size() || j < b.size()) {
    double v;
    if (i < a.size() && j < b.size()) v = std::min(a[i], b[j]);
    else if (i < a.size()) v = a[i];
    else v = b[j];
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    best = std::max(best, static_cast<double>(i) / na -
                              static_cast<double>(j) / nb);
  }
  return best;
}

using Direction = SdTestConfig::Direction;

// min over comparison columns of the directed sup statistic.
double minsup(const std::vector<double>& target_sorted,
              const std::vector<std::vector<double>>& comparisons_sorted,
              Direction dir) {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& comp : comparisons_sorted) {
    const double s = dir == Direction::target_dominated
                         ? sup_cdf_difference(comp, target_sorted)
                         : sup_cdf_difference(target_sorted, comp);
    d = std::min(d, s);
  }
  return d;
}

double statistic_on_rows(const DominanceProblem& p, std::size_t begin,
                         std::size_t count, Direction dir) {
  std::vector<double> t(p.target.begin() + static_cast<std::ptrdiff_t>(begin),
                        p.target.begin() + static_cast<std::ptrdiff_t>(begin + count));
  std::sort(t.begin(), t.end());
  std::vector<std::vector<double>> comps;
  comps.reserve(p.comparisons.size());
  for (const auto& c : p.comparisons) {
    std::vector<double> s(c.begin() + static_cast<std::ptrdiff_t>(begin),
                          c.begin() + static_cast<std::ptrdiff_t>(begin + count));
    std::sort(s.begin(), s.end());
    comps.push_back(std::move(s));
  }
  return minsup(t, comps, dir);
}

}  // namespace

double ks_statistic(const DominanceProblem& problem) {
  problem.validate();
  return statistic_on_rows(problem, 0, problem.sample_size(),
                           Direction::target_dominated);
}

double sd_test(const DominanceProblem& problem, const SdTestConfig& config) {
  problem.validate();
  const std::size_t N = problem.sample_size();
  if (N < 20)
    throw Error(ErrorKind::data, "sample too small for subsampling grid");
  const double loglogN = std::log(std::log(static_cast<double>(N)));
  // floor(log log N) < 2 for N < 1619: clamp the smallest size to 2 so the
  // grid stays usable at moderate N.
  const int b_min = std::max(2, static_cast<int>(std::floor(loglogN)));
  const int b_max = static_cast<int>(std::floor(static_cast<double>(N) / loglogN));
  if (b_max <= b_min)
    throw Error(ErrorKind::data, "sample too small for subsampling grid");

  const int K = config.sizes;
  if (K < 1) throw Error(ErrorKind::config, "sd_test: sizes must be >= 1");

  const double observed =
      std::sqrt(static_cast<double>(N)) *
      statistic_on_rows(problem, 0, N, config.direction);

  std::vector<double> pvals(static_cast<std::size_t>(K), 0.0);
  parallel_for(static_cast<std::size_t>(K), config.threads, [&](std::size_t k) {
    const double frac = K == 1 ? 0.0
                               : static_cast<double>(k) /
                                     static_cast<double>(K - 1);
    const auto b = static_cast<std::size_t>(std::lround(
        b_min + frac * static_cast<double>(b_max - b_min)));
    const std::size_t possible = N - b + 1;

    std::vector<std::size_t> starts;
    if (possible <= static_cast<std::size_t>(config.max_starts)) {
      starts.resize(possible);
      std::iota(starts.begin(), starts.end(), std::size_t{0});
    } else {
      // Seed-controlled distinct starts via partial Fisher-Yates.
      std::vector<std::size_t> all(possible);
      std::iota(all.begin(), all.end(), std::size_t{0});
      Rng rng(config.seed, 0xD0A11 + k);
      for (int s = 0; s < config.max_starts; ++s) {
        const std::size_t j =
            s + static_cast<std::size_t>(rng.below(possible - s));
        std::swap(all[static_cast<std::size_t>(s)], all[j]);
      }
      starts.assign(all.begin(), all.begin() + config.max_starts);
      std::sort(starts.begin(), starts.end());
    }

    const double scale = std::sqrt(static_cast<double>(b));
    std::size_t exceed = 0;
    for (std::size_t s : starts) {
      const double db = statistic_on_rows(problem, s, b, config.direction);
      if (scale * db >= observed) ++exceed;
    }
    pvals[k] = static_cast<double>(exceed) / static_cast<double>(starts.size());
  });

  return std::accumulate(pvals.begin(), pvals.end(), 0.0) /
         static_cast<double>(K);
}

}  // namespace qcost
