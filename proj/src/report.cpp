#include "qcost/report.hpp"

#include <algorithm>
#include <map>

#include "qcost/errors.hpp"

namespace qcost {

std::vector<ScatterPoint> scatter_data(const std::vector<double>& estimates,
                                       const std::vector<double>& lower_1s) {
  if (estimates.size() != lower_1s.size())
    throw Error(ErrorKind::compute, "scatter_data: size mismatch");
  std::vector<ScatterPoint> pts(estimates.size());
  for (std::size_t i = 0; i < estimates.size(); ++i)
    pts[i] = {estimates[i], lower_1s[i]};
  std::sort(pts.begin(), pts.end(), [](const ScatterPoint& a,
                                       const ScatterPoint& b) {
    if (a.lower_1s != b.lower_1s) return a.lower_1s < b.lower_1s;
    return a.estimate < b.estimate;
  });
  return pts;
}

std::vector<YearFiveNumber> by_year_five_number(
    const std::vector<int>& years, const std::vector<double>& values) {
  if (years.size() != values.size())
    throw Error(ErrorKind::compute, "by_year_five_number: size mismatch");
  std::map<int, std::vector<double>> buckets;
  for (std::size_t i = 0; i < years.size(); ++i)
    buckets[years[i]].push_back(values[i]);
  std::vector<YearFiveNumber> out;
  out.reserve(buckets.size());
  for (auto& [year, vals] : buckets)
    out.push_back({year, stats::five_number(std::move(vals))});
  return out;
}

std::vector<ShareRow> obs_share_series(const PanelDataset& data) {
  std::map<int, std::vector<double>> shares;
  for (const auto& row : data.rows) {
    const double total = row.output(0) + row.output(1) + row.output(2);
    shares[row.year].push_back(row.output(2) / total);
  }
  std::vector<ShareRow> out;
  out.reserve(shares.size());
  for (auto& [year, vals] : shares) {
    ShareRow r;
    r.year = year;
    r.mean = stats::mean(vals);
    std::sort(vals.begin(), vals.end());
    for (std::size_t qi = 0; qi < kShareQuantiles.size(); ++qi)
      r.quantiles[qi] = stats::nearest_rank(vals, kShareQuantiles[qi]);
    out.push_back(r);
  }
  return out;
}

}  // namespace qcost
