#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

#include "qcost/panel.hpp"

namespace qcost {

inline constexpr int kNumRegressors = 9;   // logs of Y1..Y3, W1..W3, K1..K3
inline constexpr int kNumQuad = 45;        // upper triangle of 9x9

// Index of the (j,k) pair, j <= k, in the packed quadratic vector.
constexpr int quad_index(int j, int k) {
  // row-major upper triangle: (j,j),(j,j+1),...,(j,8)
  return j * kNumRegressors - j * (j - 1) / 2 + (k - j);
}

// Packed quadratic expansion of v: diagonal terms v_j^2, cross terms
// 2*v_j*v_k, so that 0.5 * coef' * vquad reproduces 0.5 * v'Bv with B the
// symmetric coefficient matrix.
Eigen::Matrix<double, kNumQuad, 1> quad_expand(
    const Eigen::Matrix<double, kNumRegressors, 1>& v);

// Human-readable labels for the 9 + 45 regressor columns.
const std::array<std::string, kNumRegressors>& regressor_labels();
std::string quad_label(int packed_index);

// Per-observation translog design, ordered by (bank_id, year).
struct TranslogDesign {
  Eigen::MatrixXd v;        // N x 9 logs
  Eigen::MatrixXd vquad;    // N x 45 packed quadratic
  Eigen::VectorXd logc;     // N
  std::vector<int> time;    // t in 1..T per observation
  std::vector<int> group;   // bank index 0..n-1, contiguous blocks
  int n_banks = 0;
  int T = 0;
  int year_min = 0;
  std::vector<std::string> bank_ids;   // bank index -> id
  std::vector<int> bank_start;         // first row of each bank block
  std::vector<int> bank_count;         // block length (>= 2)

  Eigen::Index rows() const { return logc.size(); }
  int year_of(Eigen::Index obs) const {
    return year_min + time[static_cast<std::size_t>(obs)] - 1;
  }
};

// Pure transform: logs, quadratic expansion, time index, bank grouping.
TranslogDesign build_design(const PanelDataset& data);

// Demeans values within each group; groups must have >= 2 members.
// Output has exactly zero mean within each group up to roundoff.
Eigen::VectorXd within_transform(const Eigen::VectorXd& values,
                                 const std::vector<int>& group);

}  // namespace qcost
