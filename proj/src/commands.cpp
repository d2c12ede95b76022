#include "qcost/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <limits>
#include <map>
#include <optional>
#include <set>

#include "qcost/bootstrap.hpp"
#include "qcost/csv.hpp"
#include "qcost/design.hpp"
#include "qcost/dominance.hpp"
#include "qcost/errors.hpp"
#include "qcost/estimator.hpp"
#include "qcost/fit_io.hpp"
#include "qcost/measures.hpp"
#include "qcost/panel.hpp"
#include "qcost/parallel.hpp"
#include "qcost/report.hpp"
#include "qcost/stats.hpp"
#include "qcost/synthetic.hpp"

namespace qcost {

namespace {

namespace fs = std::filesystem;
using csv::format_double;
using csv::format_int;

void ensure_outdir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    throw Error(ErrorKind::io,
                "cannot create output directory: " + dir.string());
}

PanelDataset load_input(const RunConfig& cfg) {
  if (cfg.input.empty())
    throw Error(ErrorKind::usage, "no input panel given (set 'input')");
  SchemaMapping schema = cfg.schema.empty() ? SchemaMapping::identity()
                                            : SchemaMapping::load(cfg.schema);
  LoadOptions opts;
  opts.normalize_prices = cfg.normalize_prices;
  return load_panel(cfg.input, schema, opts);
}

std::string tau_tag(double tau) { return format_double(tau); }

// ---------------------------------------------------------------------------
// measures

struct MeasureRow {
  int obs = 0;
  double tau = 0.0;
  double estimate = 0.0;
  bool valid = false;
  std::string exclude_reason;
  BcInterval bounds;
  Classification cls;
  WeightTriple weights;
  bool has_weights = false;
  std::vector<double> replica_values;  // kept only under replica_dump
};

struct MeasureTables {
  // [fit][tau][t-1] composite coefficients; fit 0 = base, then replicas.
  std::vector<std::vector<std::vector<QuantileCoeffs>>> coeffs;
  // [fit][tau][bank] quantile fixed effect mu.
  std::vector<std::vector<std::vector<double>>> mu;
  std::vector<const LocationFit*> locs;
  std::vector<const ScaleFit*> scales;
  std::vector<std::vector<double>> q_taus;  // [fit][tau]
};

MeasureTables build_tables(const ModelFit& base, const BootstrapRun& boot,
                           const TranslogDesign& design) {
  MeasureTables tb;
  tb.locs.push_back(&base.location);
  tb.scales.push_back(&base.scale);
  tb.q_taus.push_back(base.q_taus);
  for (const auto& rep : boot.replicas) {
    if (!rep.converged) continue;
    tb.locs.push_back(&rep.location);
    tb.scales.push_back(&rep.scale);
    tb.q_taus.push_back(rep.q_taus);
  }
  const std::size_t F = tb.locs.size();
  const std::size_t K = base.taus.size();
  tb.coeffs.resize(F);
  tb.mu.resize(F);
  for (std::size_t f = 0; f < F; ++f) {
    tb.coeffs[f].resize(K);
    tb.mu[f].resize(K);
    for (std::size_t k = 0; k < K; ++k) {
      const double q = tb.q_taus[f][k];
      tb.coeffs[f][k].resize(static_cast<std::size_t>(design.T));
      for (int t = 1; t <= design.T; ++t)
        tb.coeffs[f][k][static_cast<std::size_t>(t - 1)] =
            quantile_coefficients(*tb.locs[f], *tb.scales[f], q, t);
      tb.mu[f][k].resize(static_cast<std::size_t>(design.n_banks));
      for (int b = 0; b < design.n_banks; ++b)
        tb.mu[f][k][static_cast<std::size_t>(b)] =
            tb.locs[f]->lambda[b] + tb.scales[f]->sigma[b] * q;
    }
  }
  return tb;
}

enum class WhichMeasure { scope, scale, tc };

const char* measure_name(WhichMeasure m) {
  switch (m) {
    case WhichMeasure::scope: return "scope";
    case WhichMeasure::scale: return "scale";
    case WhichMeasure::tc: return "tc";
  }
  return "?";
}

MeasureKind to_kind(WhichMeasure m) {
  switch (m) {
    case WhichMeasure::scope: return MeasureKind::scope;
    case WhichMeasure::scale: return MeasureKind::scale;
    case WhichMeasure::tc: return MeasureKind::tech_change;
  }
  return MeasureKind::scope;
}

void run_measure_command(const RunConfig& cfg, WhichMeasure which) {
  cfg.validate();
  ensure_outdir(cfg.outdir);
  PanelDataset panel = load_input(cfg);
  TranslogDesign design = build_design(panel);
  ModelFit fit = read_model_fit(cfg.outdir / "fit.json", design);
  if (fit.taus != cfg.taus)
    throw Error(ErrorKind::config,
                "fit.json was estimated for a different tau set; re-run "
                "`estimate` with the current configuration");

  EstimatorConfig est_cfg;
  MmqrEstimator estimator(design, est_cfg);
  BootstrapConfig boot_cfg;
  boot_cfg.replicas = cfg.bootstrap_B;
  boot_cfg.seed = cfg.seed;
  boot_cfg.residuals_from_bootstrap_outcome = cfg.bootstrap_residuals_from_cb;
  boot_cfg.max_failure_rate = cfg.bootstrap_failure_tolerance;
  boot_cfg.threads = cfg.threads;
  BootstrapRun boot = bootstrap_pipeline(estimator, fit, cfg.taus, boot_cfg);

  MeasureTables tables = build_tables(fit, boot, design);
  const std::size_t F = tables.locs.size();  // 1 + converged replicas
  const std::size_t K = cfg.taus.size();
  const Eigen::Index N = design.rows();

  std::optional<SampleStats> stats;
  if (which == WhichMeasure::scope) stats = compute_sample_stats(panel);

  std::vector<MeasureRow> rows(static_cast<std::size_t>(N) * K);
  const bool keep_replicas = cfg.replica_dump;

  parallel_for(static_cast<std::size_t>(N), cfg.threads, [&](std::size_t i) {
    const auto obs = static_cast<Eigen::Index>(i);
    const int t = design.time[i];
    const int bank = design.group[i];
    const Eigen::Matrix<double, kNumRegressors, 1> v =
        design.v.row(obs).transpose();
    const PanelRow& prow = panel.rows[i];
    const std::array<double, 3> outputs = {prow.output(0), prow.output(1),
                                           prow.output(2)};

    std::optional<ScopeGrid> grid;
    if (which == WhichMeasure::scope)
      grid.emplace(outputs, *stats, cfg.grid_step);

    for (std::size_t k = 0; k < K; ++k) {
      MeasureRow& row = rows[i * K + k];
      row.obs = static_cast<int>(i);
      row.tau = cfg.taus[k];

      if (which == WhichMeasure::tc && t < 2) {
        row.exclude_reason = "no prior period";
        continue;
      }
      if (which == WhichMeasure::scope && !grid->observation_admissible()) {
        row.exclude_reason = "no admissible counterfactual";
        continue;
      }

      std::vector<double> values;  // per fit, index 0 = base
      values.reserve(F);
      WeightTriple argmin;
      bool argmin_set = false;
      int invalid_fits = 0;
      for (std::size_t f = 0; f < F; ++f) {
        const QuantileCoeffs& qc = tables.coeffs[f][k][static_cast<std::size_t>(t - 1)];
        const double mu = tables.mu[f][k][static_cast<std::size_t>(bank)];
        switch (which) {
          case WhichMeasure::scope: {
            const auto surf = restrict_to_outputs(qc, v, mu);
            const auto res = subadditivity(*grid, surf, outputs);
            if (!res.admissible) {
              ++invalid_fits;
              values.push_back(std::numeric_limits<double>::quiet_NaN());
            } else {
              values.push_back(res.s_star);
              if (f == 0) {
                argmin = res.argmin;
                argmin_set = true;
              }
            }
            break;
          }
          case WhichMeasure::scale: {
            const auto r = returns_to_scale(qc, v);
            if (!r.valid) {
              ++invalid_fits;
              values.push_back(std::numeric_limits<double>::quiet_NaN());
            } else {
              values.push_back(r.value);
            }
            break;
          }
          case WhichMeasure::tc: {
            values.push_back(
                tech_change(*tables.locs[f], *tables.scales[f],
                            tables.q_taus[f][k], t, v)
                    .total);
            break;
          }
        }
      }

      if (std::isnan(values[0])) {
        row.exclude_reason = which == WhichMeasure::scale
                                 ? "ill-signed output elasticities"
                                 : "no admissible counterfactual";
        continue;
      }
      std::vector<double> replica_values;
      replica_values.reserve(F - 1);
      for (std::size_t f = 1; f < F; ++f)
        if (!std::isnan(values[f])) replica_values.push_back(values[f]);
      if (replica_values.size() < 2) {
        row.exclude_reason = "insufficient replica values";
        continue;
      }

      row.estimate = values[0];
      row.valid = true;
      row.bounds = bc_interval(replica_values, row.estimate, cfg.alpha);
      row.cls = classify(row.estimate, row.bounds, to_kind(which));
      row.weights = argmin;
      row.has_weights = argmin_set;
      if (keep_replicas) row.replica_values = std::move(replica_values);
      (void)invalid_fits;
    }
  });

  // ---- per-observation results CSV
  const std::string name = measure_name(which);
  csv::Table out;
  out.header = {"bank_id", "year",     "tau",      "measure",
                "estimate", "lower_1s", "lower_2s", "upper_2s",
                "category", "w_Y1_A",   "w_Y1_B",   "w_Y1_C",
                "w_Y2_A",   "w_Y2_B",   "w_Y2_C",   "w_Y3_A",
                "w_Y3_B",   "w_Y3_C",   "admissible", "exclude_reason"};
  for (std::size_t i = 0; i < static_cast<std::size_t>(N); ++i) {
    const int t = design.time[i];
    if (which == WhichMeasure::tc && t < 2) continue;
    for (std::size_t k = 0; k < K; ++k) {
      const MeasureRow& row = rows[i * K + k];
      std::vector<std::string> rec;
      rec.push_back(design.bank_ids[static_cast<std::size_t>(design.group[i])]);
      rec.push_back(format_int(design.year_of(static_cast<Eigen::Index>(i))));
      rec.push_back(format_double(row.tau));
      rec.push_back(name);
      if (row.valid) {
        rec.push_back(format_double(row.estimate));
        rec.push_back(format_double(row.bounds.lower_1s));
        rec.push_back(format_double(row.bounds.lower_2s));
        rec.push_back(format_double(row.bounds.upper_2s));
        rec.push_back(row.cls.positive_label + "|" + row.cls.invariant_label);
      } else {
        rec.insert(rec.end(), 4, "");
        rec.push_back("");
      }
      if (row.has_weights) {
        for (int m = 0; m < 3; ++m)
          for (int kap = 0; kap < 3; ++kap)
            rec.push_back(format_double(
                row.weights.w[static_cast<std::size_t>(m)]
                             [static_cast<std::size_t>(kap)]));
      } else {
        rec.insert(rec.end(), 9, "");
      }
      rec.push_back(row.valid ? "1" : "0");
      rec.push_back(row.exclude_reason);
      out.rows.push_back(std::move(rec));
    }
  }
  csv::write_file(cfg.outdir / (name + "_results.csv"), out);

  // ---- per-tau summary CSV (layout mirrors the point-estimate tables:
  // moments of the estimates plus category shares within binary pairs)
  csv::Table summary;
  summary.header = {"tau",          "mean",          "q1",
                    "median",       "q3",            "pct_positive",
                    "pct_non_positive", "pct_invariant", "pct_non_invariant",
                    "n_valid",      "n_excluded"};
  const bool scope_assoc = which == WhichMeasure::scope;
  if (scope_assoc) summary.header.push_back("lad_share_assoc");
  for (std::size_t k = 0; k < K; ++k) {
    std::vector<double> est;
    std::vector<double> shares;
    int n_pos = 0, n_inv = 0, n_valid = 0, n_excluded = 0;
    for (std::size_t i = 0; i < static_cast<std::size_t>(N); ++i) {
      if (which == WhichMeasure::tc && design.time[i] < 2) continue;
      const MeasureRow& row = rows[i * K + k];
      if (!row.valid) {
        ++n_excluded;
        continue;
      }
      ++n_valid;
      est.push_back(row.estimate);
      if (row.cls.positive) ++n_pos;
      if (row.cls.invariant) ++n_inv;
      if (scope_assoc) {
        const PanelRow& prow = panel.rows[i];
        const double total = prow.output(0) + prow.output(1) + prow.output(2);
        shares.push_back(prow.output(2) / total);
      }
    }
    std::vector<std::string> rec;
    rec.push_back(format_double(cfg.taus[k]));
    if (est.empty()) {
      rec.insert(rec.end(), 8, "");
    } else {
      const auto fn = stats::five_number(est);
      rec.push_back(format_double(stats::mean(est)));
      rec.push_back(format_double(fn.q1));
      rec.push_back(format_double(fn.median));
      rec.push_back(format_double(fn.q3));
      const double denom = std::max(1, n_valid);
      rec.push_back(format_double(100.0 * n_pos / denom));
      rec.push_back(format_double(100.0 * (n_valid - n_pos) / denom));
      rec.push_back(format_double(100.0 * n_inv / denom));
      rec.push_back(format_double(100.0 * (n_valid - n_inv) / denom));
    }
    rec.push_back(format_int(n_valid));
    rec.push_back(format_int(n_excluded));
    if (scope_assoc) {
      if (est.size() >= 2)
        rec.push_back(format_double(stats::lad_fit(shares, est).slope));
      else
        rec.push_back("");
    }
    summary.rows.push_back(std::move(rec));
  }
  csv::write_file(cfg.outdir / (name + "_summary.csv"), summary);

  // ---- optional replica-level dump (large)
  if (cfg.replica_dump) {
    csv::Table dump;
    dump.header = {"bank_id", "year", "tau", "replica", "value"};
    for (std::size_t i = 0; i < static_cast<std::size_t>(N); ++i) {
      if (which == WhichMeasure::tc && design.time[i] < 2) continue;
      for (std::size_t k = 0; k < K; ++k) {
        const MeasureRow& row = rows[i * K + k];
        if (!row.valid) continue;
        for (std::size_t r = 0; r < row.replica_values.size(); ++r) {
          dump.rows.push_back(
              {design.bank_ids[static_cast<std::size_t>(design.group[i])],
               format_int(design.year_of(static_cast<Eigen::Index>(i))),
               format_double(row.tau), format_int(static_cast<std::int64_t>(r)),
               format_double(row.replica_values[r])});
        }
      }
    }
    csv::write_file(cfg.outdir / (name + "_replicas.csv"), dump);
  }

  std::cout << name << ": " << out.rows.size() << " rows, B=" << boot.B
            << " (" << boot.failures << " failed replicas)\n";
}

// ---------------------------------------------------------------------------
// scope results reload (dominance, report)

struct ScopeResults {
  std::vector<double> taus;
  // paired by observation: rows sorted by (bank, year), only observations
  // valid at every tau
  std::vector<std::pair<std::string, int>> keys;
  std::vector<std::vector<double>> estimates;  // [tau][obs]
  std::vector<std::vector<double>> lower_1s;   // [tau][obs]
  std::vector<std::vector<int>> years;         // [tau][obs] (same per tau)
};

ScopeResults load_scope_results(const fs::path& outdir) {
  const fs::path path = outdir / "scope_results.csv";
  if (!fs::exists(path))
    throw Error(ErrorKind::io,
                "missing " + path.string() + " (run `scope` first)");
  auto table = csv::read_file(path);
  auto col = [&](const std::string& name) {
    for (std::size_t i = 0; i < table.header.size(); ++i)
      if (table.header[i] == name) return i;
    throw Error(ErrorKind::data, "scope_results.csv: missing column " + name);
  };
  const auto c_bank = col("bank_id"), c_year = col("year"), c_tau = col("tau");
  const auto c_est = col("estimate"), c_low1 = col("lower_1s");
  const auto c_adm = col("admissible");

  std::set<double> tau_set;
  struct Cell { double est; double low1; bool ok; };
  std::map<std::pair<std::string, int>, std::map<double, Cell>> pivot;
  for (const auto& r : table.rows) {
    const double tau = std::stod(r[c_tau]);
    tau_set.insert(tau);
    const bool ok = r[c_adm] == "1";
    Cell cell{0.0, 0.0, ok};
    if (ok) {
      cell.est = std::stod(r[c_est]);
      cell.low1 = std::stod(r[c_low1]);
    }
    pivot[{r[c_bank], std::stoi(r[c_year])}][tau] = cell;
  }

  ScopeResults out;
  out.taus.assign(tau_set.begin(), tau_set.end());
  const std::size_t K = out.taus.size();
  out.estimates.resize(K);
  out.lower_1s.resize(K);
  out.years.resize(K);
  for (const auto& [key, cells] : pivot) {
    bool all_ok = cells.size() == K;
    for (const auto& [tau, cell] : cells) all_ok = all_ok && cell.ok;
    if (!all_ok) continue;
    out.keys.push_back(key);
    std::size_t k = 0;
    for (const auto& [tau, cell] : cells) {
      out.estimates[k].push_back(cell.est);
      out.lower_1s[k].push_back(cell.low1);
      out.years[k].push_back(key.second);
      ++k;
    }
  }
  if (out.keys.empty())
    throw Error(ErrorKind::data,
                "scope_results.csv has no observation valid at every tau");
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

void cmd_simulate(const SimulateArgs& args) {
  ensure_outdir(args.outdir);
  DgpSpec spec;
  if (args.dgp == "baseline")
    spec = DgpSpec::baseline(args.n, args.T, args.seed);
  else if (args.dgp == "homoskedastic")
    spec = DgpSpec::homoskedastic(args.n, args.T, args.seed);
  else
    throw Error(ErrorKind::usage,
                "unknown dgp '" + args.dgp + "' (baseline|homoskedastic)");
  spec.missing_rate = args.missing_rate;

  SimulatedPanel sim = simulate_panel(spec);
  write_panel_csv(args.outdir / "panel.csv", sim.panel);

  nlohmann::json truth;
  truth["format"] = "qcost-truth-v1";
  truth["dgp"] = args.dgp;
  truth["n"] = spec.n;
  truth["T"] = spec.T;
  truth["seed"] = spec.seed;
  truth["scale_redraws"] = sim.scale_redraws;
  auto vec = [](const Eigen::VectorXd& v) {
    std::vector<double> out(static_cast<std::size_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i)
      out[static_cast<std::size_t>(i)] = v[i];
    return out;
  };
  truth["location"] = {{"beta0", spec.beta0},
                       {"eta", vec(spec.eta)},
                       {"beta1", vec(spec.beta1)},
                       {"beta1_star", vec(spec.beta1_star)},
                       {"beta2", vec(spec.beta2)},
                       {"beta2_star", vec(spec.beta2_star)},
                       {"lambda", vec(sim.true_location.lambda)}};
  truth["scale"] = {{"gamma0", spec.gamma0},
                    {"theta", vec(spec.theta)},
                    {"gamma1", vec(spec.gamma1)},
                    {"gamma1_star", vec(spec.gamma1_star)},
                    {"gamma2", vec(spec.gamma2)},
                    {"gamma2_star", vec(spec.gamma2_star)},
                    {"sigma", vec(sim.true_scale.sigma)}};
  std::map<std::string, double> qmap;
  for (double tau : {0.10, 0.25, 0.50, 0.75, 0.90})
    qmap[format_double(tau)] = spec.innovation_quantile(tau);
  truth["q_tau"] = qmap;

  std::ofstream out(args.outdir / "truth.json", std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write truth.json");
  out << truth.dump(1) << '\n';
  std::cout << "simulate: " << sim.panel.rows.size() << " rows, n=" << spec.n
            << ", T=" << spec.T << "\n";
}

void cmd_estimate(const RunConfig& cfg) {
  cfg.validate();
  ensure_outdir(cfg.outdir);
  PanelDataset panel = load_input(cfg);
  if (!panel.rejected.empty())
    write_rejection_report(cfg.outdir / "rejected_rows.csv", panel.rejected);
  TranslogDesign design = build_design(panel);

  ModelFit fit = fit_model(design, cfg.taus);
  write_model_fit(cfg.outdir / "fit.json", fit, design);

  std::cout << "estimate: " << design.rows() << " observations, "
            << design.n_banks << " banks, T=" << design.T << "\n";
  std::cout << "  rejected rows: " << panel.rejected.size() << "\n";
  std::cout << "  location: converged=" << fit.location.convergence.converged
            << " iters=" << fit.location.convergence.iterations
            << " objective=" << fit.location.convergence.objective << "\n";
  std::cout << "  scale:    converged=" << fit.scale.convergence.converged
            << " iters=" << fit.scale.convergence.iterations
            << " objective=" << fit.scale.convergence.objective << "\n";
  std::cout << "  scale positivity violations: "
            << fit.scale.positivity_violations.size();
  if (fit.scale.positivity_warning)
    std::cout << "  WARNING: exceeds 0.1% of observations";
  std::cout << "\n";
  for (std::size_t k = 0; k < fit.taus.size(); ++k)
    std::cout << "  q(" << fit.taus[k] << ") = " << fit.q_taus[k] << "\n";

  // Recovery diagnostics when the panel came from `simulate`.
  const fs::path truth_path = cfg.outdir / "truth.json";
  if (fs::exists(truth_path)) {
    try {
      nlohmann::json truth;
      std::ifstream(truth_path) >> truth;
      auto maxerr = [&](const char* section, const char* key,
                        const Eigen::VectorXd& got) {
        const auto arr = truth.at(section).at(key).get<std::vector<double>>();
        double m = 0.0;
        for (std::size_t i = 0;
             i < arr.size() && i < static_cast<std::size_t>(got.size()); ++i)
          m = std::max(m, std::fabs(got[static_cast<Eigen::Index>(i)] - arr[i]));
        return m;
      };
      std::cout << "  recovery vs truth.json (max abs error):"
                << " eta " << maxerr("location", "eta", fit.location.eta)
                << ", beta1 " << maxerr("location", "beta1", fit.location.beta1)
                << ", gamma1 " << maxerr("scale", "gamma1", fit.scale.gamma1)
                << ", lambda " << maxerr("location", "lambda", fit.location.lambda)
                << "\n";
    } catch (const std::exception&) {
      // diagnostics only; a foreign truth.json is not an error
    }
  }
}

void cmd_scope(const RunConfig& cfg) { run_measure_command(cfg, WhichMeasure::scope); }
void cmd_scale(const RunConfig& cfg) { run_measure_command(cfg, WhichMeasure::scale); }
void cmd_tc(const RunConfig& cfg) { run_measure_command(cfg, WhichMeasure::tc); }

void cmd_dominance(const RunConfig& cfg) {
  cfg.validate();
  ScopeResults res = load_scope_results(cfg.outdir);
  const std::size_t K = res.taus.size();
  if (K < 2)
    throw Error(ErrorKind::data,
                "dominance needs scope results for at least two tau values");

  SdTestConfig sd_cfg;
  sd_cfg.seed = cfg.seed;
  sd_cfg.threads = cfg.threads;
  sd_cfg.direction = cfg.dominance_direction == "target-dominated"
                         ? SdTestConfig::Direction::target_dominated
                         : SdTestConfig::Direction::target_dominant;

  // Rows: target tau from highest down to the second-lowest. Columns:
  // cumulative comparison sets {tau_j, ..., tau_1} shrinking from the left.
  csv::Table out;
  out.header = {"target_tau"};
  for (std::size_t j = K - 1; j >= 1; --j)
    out.header.push_back("le_" + tau_tag(res.taus[j - 1]));

  for (std::size_t r = K; r >= 2; --r) {
    const double target = res.taus[r - 1];
    std::vector<std::string> rec{tau_tag(target)};
    for (std::size_t j = K - 1; j >= 1; --j) {
      // comparison set {tau_1 .. tau_{j-1+1}} = indices 0..j-1
      if (res.taus[j - 1] >= target) {
        rec.push_back("");
        continue;
      }
      DominanceProblem problem;
      problem.target_tau = target;
      problem.target = res.estimates[r - 1];
      for (std::size_t c = 0; c < j; ++c) {
        problem.comparison_taus.push_back(res.taus[c]);
        problem.comparisons.push_back(res.estimates[c]);
      }
      rec.push_back(format_double(sd_test(problem, sd_cfg)));
    }
    out.rows.push_back(std::move(rec));
  }
  csv::write_file(cfg.outdir / "dominance_pvalues.csv", out);
  std::cout << "dominance: " << res.keys.size()
            << " paired observations, matrix written\n";
}

void cmd_report(const RunConfig& cfg) {
  cfg.validate();
  ensure_outdir(cfg.outdir);
  PanelDataset panel = load_input(cfg);
  ScopeResults res = load_scope_results(cfg.outdir);

  nlohmann::json meta;
  meta["density"] = {{"kernel", "gaussian"},
                     {"bandwidth_rule", "silverman 0.9 min(sd, iqr/1.34) n^(-1/5)"}};

  for (std::size_t k = 0; k < res.taus.size(); ++k) {
    const std::string tag = tau_tag(res.taus[k]);

    auto pts = scatter_data(res.estimates[k], res.lower_1s[k]);
    csv::Table scat;
    scat.header = {"rank", "estimate", "lower_1s"};
    for (std::size_t i = 0; i < pts.size(); ++i)
      scat.rows.push_back({format_int(static_cast<std::int64_t>(i + 1)),
                           format_double(pts[i].estimate),
                           format_double(pts[i].lower_1s)});
    csv::write_file(cfg.outdir / ("report_scatter_tau_" + tag + ".csv"), scat);

    const auto kd = stats::gaussian_kde(res.estimates[k]);
    csv::Table dens;
    dens.header = {"s", "density"};
    for (std::size_t i = 0; i < kd.grid.size(); ++i)
      dens.rows.push_back(
          {format_double(kd.grid[i]), format_double(kd.density[i])});
    csv::write_file(cfg.outdir / ("report_density_tau_" + tag + ".csv"), dens);
    meta["density"]["bandwidth"][tag] = kd.bandwidth;
  }

  csv::Table byyear;
  byyear.header = {"year", "tau", "min", "q1", "median", "q3", "max"};
  for (std::size_t k = 0; k < res.taus.size(); ++k) {
    for (const auto& row : by_year_five_number(res.years[k], res.estimates[k])) {
      byyear.rows.push_back({format_int(row.year), format_double(res.taus[k]),
                             format_double(row.summary.min),
                             format_double(row.summary.q1),
                             format_double(row.summary.median),
                             format_double(row.summary.q3),
                             format_double(row.summary.max)});
    }
  }
  csv::write_file(cfg.outdir / "report_by_year.csv", byyear);

  csv::Table share;
  share.header = {"year", "mean", "q50", "q75", "q90", "q99", "q995"};
  for (const auto& row : obs_share_series(panel)) {
    std::vector<std::string> rec{format_int(row.year), format_double(row.mean)};
    for (double q : row.quantiles) rec.push_back(format_double(q));
    share.rows.push_back(std::move(rec));
  }
  csv::write_file(cfg.outdir / "report_obs_share.csv", share);

  std::ofstream mout(cfg.outdir / "report_meta.json", std::ios::binary);
  if (!mout) throw Error(ErrorKind::io, "cannot write report_meta.json");
  mout << meta.dump(1) << '\n';
  std::cout << "report: plot data written for " << res.taus.size()
            << " tau values\n";
}

}  // namespace qcost
