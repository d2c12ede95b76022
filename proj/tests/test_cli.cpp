#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

const char* cli_path() { return QCOST_CLI_PATH; }

int run_cli(const std::string& args) {
  const std::string cmd = std::string(cli_path()) + " " + args +
                          " >/dev/null 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

int run_cli_capture(const std::string& args, const fs::path& errfile) {
  const std::string cmd = std::string(cli_path()) + " " + args +
                          " >/dev/null 2>" + errfile.string();
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Small but complete pipeline settings shared by the CLI tests.
const char* kPipelineFlags =
    " --taus 0.25,0.75 --B 8 --seed 31 --grid-step 0.2 --threads 2";

void run_pipeline(const fs::path& dir) {
  REQUIRE(run_cli("simulate --out " + dir.string() +
                  " --n 70 --T 3 --seed 7") == 0);
  const std::string common = " --input " + (dir / "panel.csv").string() +
                             " --outdir " + dir.string() + kPipelineFlags;
  REQUIRE(run_cli("estimate" + common) == 0);
  REQUIRE(run_cli("scope" + common) == 0);
  REQUIRE(run_cli("dominance" + common) == 0);
  REQUIRE(run_cli("report" + common) == 0);
}

}  // namespace

TEST_CASE("full pipeline runs and produces the documented artifacts") {
  const auto dir = fresh_dir("qcost_cli_pipeline");
  run_pipeline(dir);
  for (const char* f :
       {"panel.csv", "truth.json", "fit.json", "scope_results.csv",
        "scope_summary.csv", "dominance_pvalues.csv", "report_by_year.csv",
        "report_obs_share.csv", "report_meta.json"}) {
    CHECK(fs::exists(dir / f));
  }
  CHECK(fs::exists(dir / "report_scatter_tau_0.25.csv"));
  CHECK(fs::exists(dir / "report_density_tau_0.75.csv"));
}

TEST_CASE("scale and tc commands emit results") {
  const auto dir = fresh_dir("qcost_cli_meas");
  REQUIRE(run_cli("simulate --out " + dir.string() +
                  " --n 70 --T 3 --seed 9") == 0);
  const std::string common = " --input " + (dir / "panel.csv").string() +
                             " --outdir " + dir.string() + kPipelineFlags;
  REQUIRE(run_cli("estimate" + common) == 0);
  REQUIRE(run_cli("scale" + common) == 0);
  REQUIRE(run_cli("tc" + common) == 0);
  CHECK(fs::exists(dir / "scale_results.csv"));
  CHECK(fs::exists(dir / "tc_results.csv"));
  CHECK(fs::exists(dir / "tc_summary.csv"));
}

TEST_CASE("same seed gives byte-identical pipeline outputs") {
  const auto dir1 = fresh_dir("qcost_cli_det1");
  const auto dir2 = fresh_dir("qcost_cli_det2");
  run_pipeline(dir1);
  run_pipeline(dir2);
  for (const char* f :
       {"panel.csv", "fit.json", "scope_results.csv", "scope_summary.csv",
        "dominance_pvalues.csv", "report_by_year.csv",
        "report_obs_share.csv"}) {
    CHECK(slurp(dir1 / f) == slurp(dir2 / f));
  }
}

TEST_CASE("missing input exits 2 and names the path") {
  const auto dir = fresh_dir("qcost_cli_missing");
  const fs::path err = dir / "err.txt";
  const int code = run_cli_capture(
      "estimate --input " + (dir / "nope.csv").string() + " --outdir " +
          dir.string(),
      err);
  CHECK(code == 2);
  const auto msg = slurp(err);
  CHECK(msg.find("error[") != std::string::npos);
  CHECK(msg.find("nope.csv") != std::string::npos);
}

TEST_CASE("invalid tau fails config validation before any computation") {
  const auto dir = fresh_dir("qcost_cli_badtau");
  const fs::path err = dir / "err.txt";
  const int code = run_cli_capture(
      "estimate --input whatever.csv --outdir " + dir.string() +
          " --taus 0.5,1.5",
      err);
  CHECK(code == 2);
  CHECK(slurp(err).find("tau") != std::string::npos);
}

TEST_CASE("dominance without scope results gives an instructive error") {
  const auto dir = fresh_dir("qcost_cli_nodom");
  const fs::path err = dir / "err.txt";
  const int code =
      run_cli_capture("dominance --outdir " + dir.string(), err);
  CHECK(code == 2);
  CHECK(slurp(err).find("scope") != std::string::npos);
}

TEST_CASE("config file is honored and flags take precedence") {
  const auto dir = fresh_dir("qcost_cli_cfg");
  REQUIRE(run_cli("simulate --out " + dir.string() +
                  " --n 70 --T 3 --seed 11") == 0);
  const fs::path cfg = dir / "run.cfg";
  {
    std::ofstream out(cfg);
    out << "input = " << (dir / "panel.csv").string() << "\n"
        << "outdir = " << dir.string() << "\n"
        << "taus = 0.25, 0.75\n"
        << "B = 8\n"
        << "seed = 5\n"
        << "threads = 2\n";
  }
  REQUIRE(run_cli("estimate --config " + cfg.string()) == 0);
  CHECK(fs::exists(dir / "fit.json"));
  // Override the tau grid on the command line: fit.json reflects it.
  REQUIRE(run_cli("estimate --config " + cfg.string() + " --taus 0.5") == 0);
  CHECK(slurp(dir / "fit.json").find("\"taus\": [\n  0.5\n ]") !=
        std::string::npos);

  // Unknown config key is a config error.
  {
    std::ofstream out(cfg, std::ios::app);
    out << "frobnicate = yes\n";
  }
  const fs::path err = dir / "err.txt";
  CHECK(run_cli_capture("estimate --config " + cfg.string(), err) == 2);
  CHECK(slurp(err).find("frobnicate") != std::string::npos);
}

TEST_CASE("summary category shares sum to 100 within each binary pair") {
  const auto dir = fresh_dir("qcost_cli_shares");
  run_pipeline(dir);
  std::ifstream in(dir / "scope_summary.csv");
  std::string header;
  REQUIRE(std::getline(in, header));
  auto col_of = [&](const std::string& name) {
    std::stringstream hs(header);
    std::string field;
    int idx = 0;
    while (std::getline(hs, field, ',')) {
      if (field == name) return idx;
      ++idx;
    }
    return -1;
  };
  const int c_pos = col_of("pct_positive");
  const int c_npos = col_of("pct_non_positive");
  const int c_inv = col_of("pct_invariant");
  const int c_ninv = col_of("pct_non_invariant");
  const int c_valid = col_of("n_valid");
  REQUIRE(c_pos >= 0);
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string field;
    while (std::getline(ls, field, ',')) f.push_back(field);
    if (std::stoi(f[static_cast<std::size_t>(c_valid)]) == 0) continue;
    ++rows;
    const double pos = std::stod(f[static_cast<std::size_t>(c_pos)]) +
                       std::stod(f[static_cast<std::size_t>(c_npos)]);
    const double inv = std::stod(f[static_cast<std::size_t>(c_inv)]) +
                       std::stod(f[static_cast<std::size_t>(c_ninv)]);
    CHECK(pos == doctest::Approx(100.0).epsilon(1e-9));
    CHECK(inv == doctest::Approx(100.0).epsilon(1e-9));
  }
  CHECK(rows > 0);
}
