#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "qcost/config.hpp"

namespace qcost {

struct SimulateArgs {
  std::filesystem::path outdir = "qcost_out";
  int n = 100;
  int T = 5;
  std::uint64_t seed = 1;
  std::string dgp = "baseline";  // baseline | homoskedastic
  double missing_rate = 0.0;
};

// Each command throws qcost::Error on failure; the CLI maps kinds to exit
// codes and prints a single machine-parsable line.
void cmd_simulate(const SimulateArgs& args);
void cmd_estimate(const RunConfig& config);
void cmd_scope(const RunConfig& config);
void cmd_scale(const RunConfig& config);
void cmd_tc(const RunConfig& config);
void cmd_dominance(const RunConfig& config);
void cmd_report(const RunConfig& config);

}  // namespace qcost
