#include "qcost/design.hpp"

#include <cmath>
#include <map>

#include "qcost/errors.hpp"

namespace qcost {

Eigen::Matrix<double, kNumQuad, 1> quad_expand(
    const Eigen::Matrix<double, kNumRegressors, 1>& v) {
  Eigen::Matrix<double, kNumQuad, 1> q;
  int idx = 0;
  for (int j = 0; j < kNumRegressors; ++j) {
    q[idx++] = v[j] * v[j];
    for (int k = j + 1; k < kNumRegressors; ++k)
      q[idx++] = 2.0 * v[j] * v[k];
  }
  return q;
}

const std::array<std::string, kNumRegressors>& regressor_labels() {
  static const std::array<std::string, kNumRegressors> labels = {
      "ln_Y1", "ln_Y2", "ln_Y3", "ln_W1", "ln_W2",
      "ln_W3", "ln_K1", "ln_K2", "ln_K3"};
  return labels;
}

std::string quad_label(int packed_index) {
  for (int j = 0; j < kNumRegressors; ++j) {
    for (int k = j; k < kNumRegressors; ++k) {
      if (quad_index(j, k) == packed_index) {
        if (j == k) return regressor_labels()[j] + "^2";
        return regressor_labels()[j] + "*" + regressor_labels()[k];
      }
    }
  }
  return "quad[" + std::to_string(packed_index) + "]";
}

TranslogDesign build_design(const PanelDataset& data) {
  const auto N = static_cast<Eigen::Index>(data.rows.size());
  TranslogDesign d;
  d.v.resize(N, kNumRegressors);
  d.vquad.resize(N, kNumQuad);
  d.logc.resize(N);
  d.time.resize(static_cast<std::size_t>(N));
  d.group.resize(static_cast<std::size_t>(N));
  d.T = data.T();
  d.year_min = data.year_min;

  int bank = -1;
  std::string current;
  for (Eigen::Index i = 0; i < N; ++i) {
    const auto& row = data.rows[static_cast<std::size_t>(i)];
    if (bank < 0 || row.bank_id != current) {
      ++bank;
      current = row.bank_id;
      d.bank_ids.push_back(current);
      d.bank_start.push_back(static_cast<int>(i));
      d.bank_count.push_back(0);
    }
    ++d.bank_count.back();
    d.group[static_cast<std::size_t>(i)] = bank;
    d.time[static_cast<std::size_t>(i)] = data.time_index(row.year);

    Eigen::Matrix<double, kNumRegressors, 1> v;
    for (int j = 0; j < kNumRegressors; ++j)
      v[j] = std::log(row.values[static_cast<std::size_t>(j)]);
    d.v.row(i) = v.transpose();
    d.vquad.row(i) = quad_expand(v).transpose();
    d.logc[i] = std::log(row.cost());
  }
  d.n_banks = bank + 1;
  return d;
}

Eigen::VectorXd within_transform(const Eigen::VectorXd& values,
                                 const std::vector<int>& group) {
  if (values.size() != static_cast<Eigen::Index>(group.size()))
    throw Error(ErrorKind::data, "within_transform: size mismatch");
  std::map<int, std::pair<double, int>> acc;  // group -> (sum, count)
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    auto& a = acc[group[static_cast<std::size_t>(i)]];
    a.first += values[i];
    a.second += 1;
  }
  for (const auto& [g, a] : acc) {
    if (a.second < 2)
      throw Error(ErrorKind::data,
                  "within_transform: group " + std::to_string(g) +
                      " has a single observation");
  }
  Eigen::VectorXd out(values.size());
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    const auto& a = acc[group[static_cast<std::size_t>(i)]];
    out[i] = values[i] - a.first / a.second;
  }
  return out;
}

}  // namespace qcost
