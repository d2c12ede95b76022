#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "qcost/estimator.hpp"
#include "qcost/panel.hpp"

namespace qcost {

// Sample-wide output minima and pairwise output-ratio ranges, computed once
// per estimation sample and cached by callers.
struct SampleStats {
  std::array<double, 3> ymin{};
  // ratio_lo[m][k] = min over sample of Y_m / Y_k (m != k), ratio_hi likewise.
  std::array<std::array<double, 3>, 3> ratio_lo{};
  std::array<std::array<double, 3>, 3> ratio_hi{};
};
SampleStats compute_sample_stats(const PanelDataset& data);

// Distribution weights for the three counterfactual banks: w[m][kappa],
// each row (output) summing to 1 across kappa.
struct WeightTriple {
  std::array<std::array<double, 3>, 3> w{};
};

// Full enumeration of admissible weight triples on the grid. grid_step must
// divide 1. Column kappa is admissible when every counterfactual output pair
// ratio stays inside the sample range; a triple is admissible when all three
// of its columns are.
std::vector<WeightTriple> admissible_weights(const std::array<double, 3>& outputs,
                                             const SampleStats& stats,
                                             double grid_step);

// Log cost restricted to the three log outputs with everything else held
// fixed: c0 + b'o + 0.5 o'A o.
struct QuadraticOutputCost {
  double c0 = 0.0;
  Eigen::Vector3d b = Eigen::Vector3d::Zero();
  Eigen::Matrix3d A = Eigen::Matrix3d::Zero();

  double log_cost(const Eigen::Vector3d& log_outputs) const {
    return c0 + b.dot(log_outputs) +
           0.5 * log_outputs.dot(A * log_outputs);
  }
};

// Restriction of the fitted quantile surface at an observation: outputs vary,
// (W, K), the year and the bank effect mu stay at the observation's values.
QuadraticOutputCost restrict_to_outputs(
    const QuantileCoeffs& coeffs,
    const Eigen::Matrix<double, kNumRegressors, 1>& v_obs, double mu);

// Per-observation counterfactual grid: column admissibility and log outputs
// are tau- and coefficient-independent, so they are precomputed once and
// shared across quantiles and bootstrap replicas.
class ScopeGrid {
 public:
  ScopeGrid(const std::array<double, 3>& outputs, const SampleStats& stats,
            double grid_step);

  // False when any Y_m < 3 min{Y_m} (negative rebased output) -- the
  // observation has no valid counterfactual and is excluded, not clamped.
  bool observation_admissible() const { return obs_admissible_; }
  int steps() const { return steps_; }
  int columns() const { return static_cast<int>(col_log_outputs_.size()); }
  const std::vector<char>& column_admissible() const { return col_admissible_; }
  const std::vector<int>& admissible_ids() const { return admissible_ids_; }
  const std::vector<Eigen::Vector3d>& column_log_outputs() const {
    return col_log_outputs_;
  }
  int column_id(int a1, int a2, int a3) const {
    return (a1 * (steps_ + 1) + a2) * (steps_ + 1) + a3;
  }
  std::array<int, 3> column_units(int id) const;
  // Ordered (A,B,C) assignments whose columns are all admissible and whose
  // units sum to the grid; depends on the mask only, counted once.
  std::int64_t admissible_triples() const { return admissible_triples_; }

 private:
  int steps_;
  bool obs_admissible_;
  std::vector<char> col_admissible_;
  std::vector<int> admissible_ids_;
  std::vector<Eigen::Vector3d> col_log_outputs_;
  std::int64_t admissible_triples_ = 0;
};

// Exact minimum of cost(A)+cost(B)+cost(C) over admissible column triples
// whose units sum to the full grid per output. Costs are in levels; entries
// for inadmissible columns are never read. Enumeration walks columns in
// ascending cost with an exact completion bound, so the minimum is exhaustive
// while typical work is far below the full lattice.
struct TripleMin {
  bool found = false;
  double cost_sum = 0.0;
  int col_a = -1, col_b = -1, col_c = -1;
};
TripleMin min_cost_triple(const ScopeGrid& grid,
                          const std::vector<double>& column_cost);

struct SubadditivityOutcome {
  bool admissible = false;
  double s_star = 0.0;
  WeightTriple argmin;
  std::int64_t admissible_triples = 0;
};

// S_t(tau) minimized over the admissible grid; the surface argument gives the
// log cost at given output LEVELS (everything else fixed). The quadratic
// overload is the production path; the generic overload serves arbitrary
// injected surfaces.
SubadditivityOutcome subadditivity(const ScopeGrid& grid,
                                   const QuadraticOutputCost& surface,
                                   const std::array<double, 3>& outputs);
SubadditivityOutcome subadditivity(
    const ScopeGrid& grid,
    const std::function<double(const std::array<double, 3>&)>& log_cost_levels,
    const std::array<double, 3>& outputs);

// Gradient of the quantile surface in the log regressors: alpha1 + A v with
// A rebuilt from the packed quadratic coefficients.
Eigen::Matrix<double, kNumRegressors, 1> quantile_gradient(
    const QuantileCoeffs& coeffs,
    const Eigen::Matrix<double, kNumRegressors, 1>& v);

// Returns to scale with quasi-fixed equity: (1 - dQ/dk1) / sum_m dQ/dy_m.
struct RtsOutcome {
  double value = 0.0;
  bool valid = false;  // false when the elasticity denominator is <= 0
};
RtsOutcome returns_to_scale(const QuantileCoeffs& coeffs,
                            const Eigen::Matrix<double, kNumRegressors, 1>& v);

// Discrete dual technical change TC_t(tau) = Q(t-1) - Q(t) at fixed v and
// bank effect, split into its neutral and non-neutral parts.
struct TechChange {
  double total = 0.0;
  double neutral = 0.0;
  double non_neutral = 0.0;
};
TechChange tech_change(const LocationFit& loc, const ScaleFit& scale,
                       double q_tau, int t,
                       const Eigen::Matrix<double, kNumRegressors, 1>& v);

}  // namespace qcost
