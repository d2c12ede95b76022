#pragma once

#include <array>
#include <vector>

#include "qcost/panel.hpp"
#include "qcost/stats.hpp"

namespace qcost {

// Scatter data: point estimates sorted by their one-sided lower bound.
struct ScatterPoint {
  double estimate;
  double lower_1s;
};
std::vector<ScatterPoint> scatter_data(const std::vector<double>& estimates,
                                       const std::vector<double>& lower_1s);

struct YearFiveNumber {
  int year;
  stats::FiveNumber summary;
};
std::vector<YearFiveNumber> by_year_five_number(
    const std::vector<int>& years, const std::vector<double>& values);

// Off-balance-sheet output share Y3/(Y1+Y2+Y3): per-year mean and selected
// upper quantiles (0.50, 0.75, 0.90, 0.99, 0.995).
inline constexpr std::array<double, 5> kShareQuantiles = {0.50, 0.75, 0.90,
                                                          0.99, 0.995};
struct ShareRow {
  int year;
  double mean;
  std::array<double, 5> quantiles;
};
std::vector<ShareRow> obs_share_series(const PanelDataset& data);

}  // namespace qcost
