#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace qcost {

// Canonical variable order used everywhere downstream. The first nine are the
// log-regressor order of the design vector v.
inline constexpr std::array<const char*, 10> kPanelVariables = {
    "Y1", "Y2", "Y3", "W1", "W2", "W3", "K1", "K2", "K3", "C"};

struct PanelRow {
  std::string bank_id;
  int year = 0;
  // values[0..8] = Y1,Y2,Y3,W1,W2,W3,K1,K2,K3; values[9] = C.
  std::array<double, 10> values{};

  double output(int m) const { return values[static_cast<std::size_t>(m)]; }
  double cost() const { return values[9]; }
};

struct RejectedRow {
  std::size_t line;  // 1-based line number in the source file
  std::string reason;
};

// Validated bank-year panel: strictly positive numerics, unique (bank, year),
// every bank observed at least twice, contiguous global year range.
struct PanelDataset {
  std::vector<PanelRow> rows;  // sorted by (bank_id, year)
  std::vector<RejectedRow> rejected;
  int year_min = 0;
  int year_max = 0;

  int T() const { return year_max - year_min + 1; }
  // t = 1..T
  int time_index(int year) const { return year - year_min + 1; }

  std::vector<std::string> bank_ids() const;
};

// Column-name mapping: canonical name -> CSV column. Names absent from the
// mapping default to the canonical name itself. Extra keys are rejected.
struct SchemaMapping {
  std::map<std::string, std::string> columns;

  static SchemaMapping identity();
  static SchemaMapping load(const std::filesystem::path& path);
  std::string column_for(const std::string& canonical) const;
};

struct LoadOptions {
  // Divide C, W1, W2 by W3 before logging (price-homogeneity normalization).
  bool normalize_prices = false;
};

// Loads and validates the panel. Rows violating positivity are rejected with
// a per-row diagnostic; structural violations (missing column, duplicate
// (bank, year), single-observation bank, year gap) raise.
PanelDataset load_panel(const std::filesystem::path& path,
                        const SchemaMapping& schema,
                        const LoadOptions& options = {});

// Same validation applied to in-memory rows (used by the simulator and tests).
PanelDataset validate_panel(std::vector<PanelRow> rows,
                            const LoadOptions& options = {});

void write_rejection_report(const std::filesystem::path& path,
                            const std::vector<RejectedRow>& rejected);

void write_panel_csv(const std::filesystem::path& path,
                     const PanelDataset& data);

}  // namespace qcost
