#include "qcost/measures.hpp"

#include <cmath>
#include <limits>

#include "qcost/errors.hpp"

namespace qcost {

SampleStats compute_sample_stats(const PanelDataset& data) {
  if (data.rows.empty())
    throw Error(ErrorKind::data, "compute_sample_stats: empty panel");
  SampleStats s;
  for (int m = 0; m < 3; ++m) {
    s.ymin[static_cast<std::size_t>(m)] = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 3; ++k) {
      s.ratio_lo[static_cast<std::size_t>(m)][static_cast<std::size_t>(k)] =
          std::numeric_limits<double>::infinity();
      s.ratio_hi[static_cast<std::size_t>(m)][static_cast<std::size_t>(k)] =
          -std::numeric_limits<double>::infinity();
    }
  }
  for (const auto& row : data.rows) {
    for (int m = 0; m < 3; ++m) {
      const double ym = row.output(m);
      auto mi = static_cast<std::size_t>(m);
      s.ymin[mi] = std::min(s.ymin[mi], ym);
      for (int k = 0; k < 3; ++k) {
        if (k == m) continue;
        const double ratio = ym / row.output(k);
        auto ki = static_cast<std::size_t>(k);
        s.ratio_lo[mi][ki] = std::min(s.ratio_lo[mi][ki], ratio);
        s.ratio_hi[mi][ki] = std::max(s.ratio_hi[mi][ki], ratio);
      }
    }
  }
  return s;
}

namespace {

int grid_steps(double grid_step) {
  if (!(grid_step > 0.0 && grid_step <= 1.0))
    throw Error(ErrorKind::config, "grid_step must lie in (0, 1]");
  const double inv = 1.0 / grid_step;
  const int steps = static_cast<int>(std::lround(inv));
  if (std::fabs(inv - static_cast<double>(steps)) > 1e-9)
    throw Error(ErrorKind::config, "grid_step must divide 1");
  return steps;
}

}  // namespace

ScopeGrid::ScopeGrid(const std::array<double, 3>& outputs,
                     const SampleStats& stats, double grid_step)
    : steps_(grid_steps(grid_step)) {
  std::array<double, 3> ystar{};
  obs_admissible_ = true;
  for (int m = 0; m < 3; ++m) {
    ystar[static_cast<std::size_t>(m)] =
        outputs[static_cast<std::size_t>(m)] -
        3.0 * stats.ymin[static_cast<std::size_t>(m)];
    if (ystar[static_cast<std::size_t>(m)] < 0.0) obs_admissible_ = false;
  }

  const int S = steps_;
  const int cols = (S + 1) * (S + 1) * (S + 1);
  col_admissible_.assign(static_cast<std::size_t>(cols), 0);
  col_log_outputs_.assign(static_cast<std::size_t>(cols),
                          Eigen::Vector3d::Zero());
  if (!obs_admissible_) return;

  for (int a1 = 0; a1 <= S; ++a1) {
    for (int a2 = 0; a2 <= S; ++a2) {
      for (int a3 = 0; a3 <= S; ++a3) {
        const int id = column_id(a1, a2, a3);
        const std::array<double, 3> w = {static_cast<double>(a1) / S,
                                         static_cast<double>(a2) / S,
                                         static_cast<double>(a3) / S};
        std::array<double, 3> out{};
        for (int m = 0; m < 3; ++m) {
          auto mi = static_cast<std::size_t>(m);
          out[mi] = w[mi] * ystar[mi] + stats.ymin[mi];
        }
        bool ok = true;
        for (int m = 0; m < 3 && ok; ++m) {
          for (int k = 0; k < 3 && ok; ++k) {
            if (k == m) continue;
            auto mi = static_cast<std::size_t>(m);
            auto ki = static_cast<std::size_t>(k);
            const double ratio = out[mi] / out[ki];
            if (ratio < stats.ratio_lo[mi][ki] ||
                ratio > stats.ratio_hi[mi][ki])
              ok = false;
          }
        }
        if (ok) {
          col_admissible_[static_cast<std::size_t>(id)] = 1;
          admissible_ids_.push_back(id);
          col_log_outputs_[static_cast<std::size_t>(id)] =
              Eigen::Vector3d(std::log(out[0]), std::log(out[1]),
                              std::log(out[2]));
        }
      }
    }
  }

  // Exact ordered count over canonical multisets with multiplicities.
  for (int a1 = 0; a1 <= S; ++a1)
  for (int a2 = 0; a2 <= S; ++a2)
  for (int a3 = 0; a3 <= S; ++a3) {
    const int ida = column_id(a1, a2, a3);
    if (!col_admissible_[static_cast<std::size_t>(ida)]) continue;
    const int r1 = S - a1, r2 = S - a2, r3 = S - a3;
    for (int b1 = a1; b1 <= r1; ++b1) {
      const int b2lo = (b1 == a1) ? a2 : 0;
      for (int b2 = b2lo; b2 <= r2; ++b2) {
        const int b3lo = (b1 == a1 && b2 == a2) ? a3 : 0;
        for (int b3 = b3lo; b3 <= r3; ++b3) {
          const int idb = column_id(b1, b2, b3);
          if (!col_admissible_[static_cast<std::size_t>(idb)]) continue;
          const int idc = column_id(r1 - b1, r2 - b2, r3 - b3);
          if (idc < idb) continue;
          if (!col_admissible_[static_cast<std::size_t>(idc)]) continue;
          admissible_triples_ += (ida == idb && idb == idc) ? 1
                                 : (ida == idb || idb == idc) ? 3
                                                              : 6;
        }
      }
    }
  }
}

std::array<int, 3> ScopeGrid::column_units(int id) const {
  const int base = steps_ + 1;
  return {id / (base * base), (id / base) % base, id % base};
}

std::vector<WeightTriple> admissible_weights(const std::array<double, 3>& outputs,
                                             const SampleStats& stats,
                                             double grid_step) {
  ScopeGrid grid(outputs, stats, grid_step);
  std::vector<WeightTriple> result;
  if (!grid.observation_admissible()) return result;
  const int S = grid.steps();
  const auto& adm = grid.column_admissible();

  // Ordered triples (A, B, C): per-output units sum to S exactly.
  for (int a1 = 0; a1 <= S; ++a1)
  for (int a2 = 0; a2 <= S; ++a2)
  for (int a3 = 0; a3 <= S; ++a3) {
    const int ida = grid.column_id(a1, a2, a3);
    if (!adm[static_cast<std::size_t>(ida)]) continue;
    for (int b1 = 0; b1 + a1 <= S; ++b1)
    for (int b2 = 0; b2 + a2 <= S; ++b2)
    for (int b3 = 0; b3 + a3 <= S; ++b3) {
      const int idb = grid.column_id(b1, b2, b3);
      if (!adm[static_cast<std::size_t>(idb)]) continue;
      const int c1 = S - a1 - b1, c2 = S - a2 - b2, c3 = S - a3 - b3;
      const int idc = grid.column_id(c1, c2, c3);
      if (!adm[static_cast<std::size_t>(idc)]) continue;
      WeightTriple t;
      const double inv = 1.0 / static_cast<double>(S);
      t.w[0] = {a1 * inv, b1 * inv, c1 * inv};
      t.w[1] = {a2 * inv, b2 * inv, c2 * inv};
      t.w[2] = {a3 * inv, b3 * inv, c3 * inv};
      result.push_back(t);
    }
  }
  return result;
}

QuadraticOutputCost restrict_to_outputs(
    const QuantileCoeffs& coeffs,
    const Eigen::Matrix<double, kNumRegressors, 1>& v_obs, double mu) {
  // Rebuild the symmetric 9x9 coefficient matrix from the packed form.
  Eigen::Matrix<double, kNumRegressors, kNumRegressors> B;
  for (int j = 0; j < kNumRegressors; ++j)
    for (int k = j; k < kNumRegressors; ++k) {
      const double val = coeffs.alpha2[quad_index(j, k)];
      B(j, k) = val;
      B(k, j) = val;
    }
  const Eigen::Matrix<double, 6, 1> f = v_obs.tail(6);
  QuadraticOutputCost q;
  q.c0 = coeffs.alpha0 + mu + coeffs.alpha1.tail(6).dot(f) +
         0.5 * f.dot(B.bottomRightCorner(6, 6) * f);
  q.b = coeffs.alpha1.head(3) + B.topRightCorner(3, 6) * f;
  q.A = B.topLeftCorner(3, 3);
  return q;
}

TripleMin min_cost_triple(const ScopeGrid& grid,
                          const std::vector<double>& column_cost) {
  TripleMin best;
  if (!grid.observation_admissible()) return best;
  const int S = grid.steps();
  const int base = S + 1;
  const auto& adm = grid.column_admissible();
  const double* cost = column_cost.data();

  const auto& ids = grid.admissible_ids();
  if (ids.empty()) return best;

  // Ascending cost, ids as tie-break: the completion bound then allows a
  // clean break instead of a scan.
  std::vector<int> order(ids);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (cost[a] != cost[b]) return cost[a] < cost[b];
    return a < b;
  });
  const double cmin = cost[order.front()];

  double best_sum = std::numeric_limits<double>::infinity();
  int bA = -1, bB = -1, bC = -1;

  for (int ia : order) {
    const double ca = cost[ia];
    if (ca + 2.0 * cmin >= best_sum) break;
    const int a1 = ia / (base * base), a2 = (ia / base) % base, a3 = ia % base;
    const int r1 = S - a1, r2 = S - a2, r3 = S - a3;
    for (int ib : order) {
      const double cb = cost[ib];
      if (ca + cb + cmin >= best_sum) break;
      const int b1 = ib / (base * base), b2 = (ib / base) % base,
                b3 = ib % base;
      if (b1 > r1 || b2 > r2 || b3 > r3) continue;
      const int ic = ((r1 - b1) * base + (r2 - b2)) * base + (r3 - b3);
      if (!adm[static_cast<std::size_t>(ic)]) continue;
      const double sum = ca + cb + cost[ic];
      if (sum < best_sum) {
        best_sum = sum;
        bA = ia;
        bB = ib;
        bC = ic;
      }
    }
  }

  if (bA >= 0) {
    best.found = true;
    best.cost_sum = best_sum;
    best.col_a = bA;
    best.col_b = bB;
    best.col_c = bC;
  }
  return best;
}

namespace {

SubadditivityOutcome finish_subadditivity(const ScopeGrid& grid,
                                          const TripleMin& tm,
                                          double cost_orig) {
  SubadditivityOutcome out;
  out.admissible_triples = grid.admissible_triples();
  if (!tm.found) return out;
  out.admissible = true;
  out.s_star = (tm.cost_sum - cost_orig) / cost_orig;
  auto fill = [&](int id, int kappa) {
    const auto units = grid.column_units(id);
    for (int m = 0; m < 3; ++m)
      out.argmin.w[static_cast<std::size_t>(m)][static_cast<std::size_t>(kappa)] =
          static_cast<double>(units[static_cast<std::size_t>(m)]) /
          static_cast<double>(grid.steps());
  };
  fill(tm.col_a, 0);
  fill(tm.col_b, 1);
  fill(tm.col_c, 2);
  return out;
}

}  // namespace

SubadditivityOutcome subadditivity(const ScopeGrid& grid,
                                   const QuadraticOutputCost& surface,
                                   const std::array<double, 3>& outputs) {
  if (!grid.observation_admissible()) return {};
  const auto& logs = grid.column_log_outputs();
  std::vector<double> cost(grid.column_admissible().size(), 0.0);
  for (int id : grid.admissible_ids())
    cost[static_cast<std::size_t>(id)] =
        std::exp(surface.log_cost(logs[static_cast<std::size_t>(id)]));
  const Eigen::Vector3d o(std::log(outputs[0]), std::log(outputs[1]),
                          std::log(outputs[2]));
  const double cost_orig = std::exp(surface.log_cost(o));
  return finish_subadditivity(grid, min_cost_triple(grid, cost), cost_orig);
}

SubadditivityOutcome subadditivity(
    const ScopeGrid& grid,
    const std::function<double(const std::array<double, 3>&)>& log_cost_levels,
    const std::array<double, 3>& outputs) {
  if (!grid.observation_admissible()) return {};
  const auto& logs = grid.column_log_outputs();
  std::vector<double> cost(grid.column_admissible().size(), 0.0);
  for (int id : grid.admissible_ids()) {
    const auto& lo = logs[static_cast<std::size_t>(id)];
    const std::array<double, 3> lv = {std::exp(lo[0]), std::exp(lo[1]),
                                      std::exp(lo[2])};
    cost[static_cast<std::size_t>(id)] = std::exp(log_cost_levels(lv));
  }
  const double cost_orig = std::exp(log_cost_levels(outputs));
  return finish_subadditivity(grid, min_cost_triple(grid, cost), cost_orig);
}

Eigen::Matrix<double, kNumRegressors, 1> quantile_gradient(
    const QuantileCoeffs& coeffs,
    const Eigen::Matrix<double, kNumRegressors, 1>& v) {
  Eigen::Matrix<double, kNumRegressors, 1> g = coeffs.alpha1;
  for (int j = 0; j < kNumRegressors; ++j) {
    double acc = 0.0;
    for (int k = 0; k < kNumRegressors; ++k) {
      const int idx = (j <= k) ? quad_index(j, k) : quad_index(k, j);
      acc += coeffs.alpha2[idx] * v[k];
    }
    g[j] += acc;
  }
  return g;
}

RtsOutcome returns_to_scale(const QuantileCoeffs& coeffs,
                            const Eigen::Matrix<double, kNumRegressors, 1>& v) {
  const auto g = quantile_gradient(coeffs, v);
  const double denom = g[0] + g[1] + g[2];
  RtsOutcome out;
  if (!(denom > 0.0)) return out;  // ill-signed output elasticities
  out.valid = true;
  out.value = (1.0 - g[6]) / denom;  // index 6 = ln_K1
  return out;
}

TechChange tech_change(const LocationFit& loc, const ScaleFit& scale,
                       double q_tau, int t,
                       const Eigen::Matrix<double, kNumRegressors, 1>& v) {
  if (t < 2)
    throw Error(ErrorKind::compute, "tech_change needs t >= 2 (no prior period)");
  const double d_eta = loc.eta_at(t) - loc.eta_at(t - 1);
  const double d_theta = scale.theta_at(t) - scale.theta_at(t - 1);

  TechChange tc;
  tc.neutral = -(d_eta + d_theta * q_tau);
  const Eigen::Matrix<double, kNumRegressors, 1> lin =
      loc.beta1_star * d_eta + scale.gamma1_star * (d_theta * q_tau);
  const Eigen::Matrix<double, kNumQuad, 1> quad =
      loc.beta2_star * d_eta + scale.gamma2_star * (d_theta * q_tau);
  tc.non_neutral = -(lin.dot(v) + 0.5 * quad.dot(quad_expand(v)));
  tc.total = tc.neutral + tc.non_neutral;
  return tc;
}

}  // namespace qcost
