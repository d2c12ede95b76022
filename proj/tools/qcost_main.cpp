#include <CLI11.hpp>
#include <iostream>
#include <string>

#include "qcost/commands.hpp"
#include "qcost/config.hpp"
#include "qcost/errors.hpp"

namespace {

// Flags override the config file, which overrides the defaults.
void attach_run_options(CLI::App* cmd, qcost::RunConfig& cfg,
                        std::string& config_path, std::string& tau_text) {
  cmd->add_option("--config", config_path, "key = value config file");
  cmd->add_option("--input", cfg.input, "panel CSV path");
  cmd->add_option("--schema", cfg.schema, "column-name mapping file");
  cmd->add_option("--outdir", cfg.outdir, "output directory");
  cmd->add_option("--taus", tau_text, "comma-separated quantile levels");
  cmd->add_option("--B", cfg.bootstrap_B, "bootstrap replicates");
  cmd->add_option("--alpha", cfg.alpha, "confidence level complement");
  cmd->add_option("--grid-step", cfg.grid_step, "weight grid step");
  cmd->add_option("--seed", cfg.seed, "master seed");
  cmd->add_option("--threads", cfg.threads, "worker threads (0 = auto)");
  cmd->add_flag("--normalize-prices", cfg.normalize_prices,
                "divide C, W1, W2 by W3 before logging");
  cmd->add_flag("--bootstrap-residuals-from-cb",
                cfg.bootstrap_residuals_from_cb,
                "bootstrap step (iv) residuals against the bootstrap outcome");
  cmd->add_flag("--replica-dump", cfg.replica_dump,
                "write replica-level measure values (large)");
  cmd->add_option("--dominance-direction", cfg.dominance_direction,
                  "target-dominant | target-dominated");
}

qcost::RunConfig resolve_config(const CLI::App* cmd, qcost::RunConfig flags,
                                const std::string& config_path,
                                const std::string& tau_text) {
  qcost::RunConfig cfg;
  if (!config_path.empty()) cfg = qcost::load_run_config(config_path);
  // Options the user actually set on the command line win.
  auto taken = [&](const std::string& name) {
    return cmd->count(name) > 0;
  };
  if (taken("--input")) cfg.input = flags.input;
  if (taken("--schema")) cfg.schema = flags.schema;
  if (taken("--outdir")) cfg.outdir = flags.outdir;
  if (taken("--taus")) cfg.taus = qcost::parse_tau_list(tau_text);
  if (taken("--B")) cfg.bootstrap_B = flags.bootstrap_B;
  if (taken("--alpha")) cfg.alpha = flags.alpha;
  if (taken("--grid-step")) cfg.grid_step = flags.grid_step;
  if (taken("--seed")) cfg.seed = flags.seed;
  if (taken("--threads")) cfg.threads = flags.threads;
  if (taken("--normalize-prices")) cfg.normalize_prices = flags.normalize_prices;
  if (taken("--bootstrap-residuals-from-cb"))
    cfg.bootstrap_residuals_from_cb = flags.bootstrap_residuals_from_cb;
  if (taken("--replica-dump")) cfg.replica_dump = flags.replica_dump;
  if (taken("--dominance-direction"))
    cfg.dominance_direction = flags.dominance_direction;
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Panel quantile cost toolkit: time-varying location-scale "
               "estimation, scope/scale/technical-change measures, wild block "
               "bootstrap inference, stochastic dominance testing"};
  app.require_subcommand(1);

  qcost::SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "generate a synthetic panel");
  c_sim->add_option("--out", sim.outdir, "output directory");
  c_sim->add_option("--n", sim.n, "number of banks");
  c_sim->add_option("--T", sim.T, "number of years");
  c_sim->add_option("--seed", sim.seed, "seed");
  c_sim->add_option("--dgp", sim.dgp, "baseline | homoskedastic");
  c_sim->add_option("--missing-rate", sim.missing_rate,
                    "probability of dropping interior bank-years");

  struct SubSpec {
    CLI::App* cmd;
    qcost::RunConfig flags;
    std::string config_path;
    std::string tau_text;
    void (*fn)(const qcost::RunConfig&);
  };
  std::vector<SubSpec> subs;
  subs.reserve(8);  // CLI11 keeps pointers into the elements
  auto add_run_cmd = [&](const char* name, const char* help,
                         void (*fn)(const qcost::RunConfig&)) {
    SubSpec spec;
    spec.cmd = app.add_subcommand(name, help);
    spec.fn = fn;
    subs.push_back(std::move(spec));
    auto& s = subs.back();
    attach_run_options(s.cmd, s.flags, s.config_path, s.tau_text);
  };
  add_run_cmd("estimate", "fit the three-step quantile cost model",
              qcost::cmd_estimate);
  add_run_cmd("scope", "cost subadditivity with bootstrap inference",
              qcost::cmd_scope);
  add_run_cmd("scale", "returns to scale with bootstrap inference",
              qcost::cmd_scale);
  add_run_cmd("tc", "technical change with bootstrap inference",
              qcost::cmd_tc);
  add_run_cmd("dominance", "stochastic dominance p-value matrix",
              qcost::cmd_dominance);
  add_run_cmd("report", "plot-ready data files from scope results",
              qcost::cmd_report);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "error[usage]: " << e.what() << "\n";
    return 2;
  }

  try {
    if (c_sim->parsed()) {
      qcost::cmd_simulate(sim);
      return 0;
    }
    for (auto& s : subs) {
      if (s.cmd->parsed()) {
        s.fn(resolve_config(s.cmd, s.flags, s.config_path, s.tau_text));
        return 0;
      }
    }
    std::cerr << "error[usage]: no subcommand\n";
    return 2;
  } catch (const qcost::Error& e) {
    std::cerr << "error[" << e.kind_name() << "]: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error[internal]: " << e.what() << "\n";
    return 1;
  }
}
