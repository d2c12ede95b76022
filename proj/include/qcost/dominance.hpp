#pragma once

#include <cstdint>
#include <vector>

namespace qcost {

// Paired samples of an estimated quantity (S* in the pipeline) across
// quantile levels: one column per tau, all sharing the observation index;
// the cross-tau dependence is preserved by resampling rows jointly.
struct DominanceProblem {
  double target_tau = 0.0;                     // tau-bar
  std::vector<double> comparison_taus;         // nonempty, excludes tau-bar
  std::vector<double> target;                  // length N
  std::vector<std::vector<double>> comparisons;  // each length N

  std::size_t sample_size() const { return target.size(); }
  void validate() const;
};

// min over the comparison set of sup over the pooled grid of
// [F_tau(s) - F_taubar(s)], exactly as displayed in the hypotheses.
// Unscaled; the subsampling test applies the sqrt(N) scaling.
double ks_statistic(const DominanceProblem& problem);

struct SdTestConfig {
  int sizes = 199;        // number of subsample sizes
  int max_starts = 1000;  // cap on contiguous starts per size
  std::uint64_t seed = 1;
  unsigned threads = 0;
  // Which role tau-bar plays in the min-sup statistic. `target_dominant`
  // tests H0 "the tau-bar distribution dominates (some of) the comparisons"
  // via min_tau sup_s [F_taubar - F_tau]; `target_dominated` uses the
  // displayed orientation min_tau sup_s [F_tau - F_taubar].
  enum class Direction { target_dominant, target_dominated };
  Direction direction = Direction::target_dominant;
};

// Subsampling p-value: sizes spaced evenly between max(2, floor(log log N))
// and floor(N / log log N); per size, the statistic is recomputed on
// contiguous row blocks (capped at max_starts random starts, seed-driven),
// the per-size p-value is the share of sqrt(b) d_b >= sqrt(N) d_N, and the
// reported p-value is the mean across sizes.
double sd_test(const DominanceProblem& problem, const SdTestConfig& config);

}  // namespace qcost
