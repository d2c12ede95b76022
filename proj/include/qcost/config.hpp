#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace qcost {

// Run configuration shared by the pipeline commands. Defaults follow the
// study conventions: tau grid {0.10, 0.25, 0.50, 0.75, 0.90}, B = 500,
// alpha = 0.05, grid step 0.1. Precedence: CLI flags > config file > defaults.
struct RunConfig {
  std::filesystem::path input;
  std::filesystem::path schema;  // optional column-name mapping file
  std::filesystem::path outdir = "qcost_out";
  std::vector<double> taus = {0.10, 0.25, 0.50, 0.75, 0.90};
  int bootstrap_B = 500;
  double alpha = 0.05;
  double grid_step = 0.1;
  std::uint64_t seed = 20210;
  unsigned threads = 0;  // 0 = hardware concurrency
  bool normalize_prices = false;
  bool bootstrap_residuals_from_cb = false;  // step (iv) variant
  double bootstrap_failure_tolerance = 0.05;
  bool replica_dump = false;
  std::string dominance_direction = "target-dominant";

  void validate() const;
};

// key = value lines, '#' comments. Unknown keys are rejected.
RunConfig load_run_config(const std::filesystem::path& path);

// Parses a comma-separated tau list ("0.1,0.25,0.5").
std::vector<double> parse_tau_list(const std::string& text);

}  // namespace qcost
