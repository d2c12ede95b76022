#include "qcost/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include "qcost/errors.hpp"

namespace qcost {

void RunConfig::validate() const {
  if (taus.empty())
    throw Error(ErrorKind::config, "tau set must be nonempty");
  for (double t : taus)
    if (!(t > 0.0 && t < 1.0))
      throw Error(ErrorKind::config,
                  "tau values must lie strictly inside (0,1)");
  if (!std::is_sorted(taus.begin(), taus.end()))
    throw Error(ErrorKind::config, "tau values must be sorted ascending");
  if (std::adjacent_find(taus.begin(), taus.end()) != taus.end())
    throw Error(ErrorKind::config, "tau values must be distinct");
  if (bootstrap_B < 2)
    throw Error(ErrorKind::config, "B must be at least 2");
  if (!(alpha > 0.0 && alpha < 0.5))
    throw Error(ErrorKind::config, "alpha must lie in (0, 0.5)");
  if (!(grid_step > 0.0 && grid_step <= 1.0))
    throw Error(ErrorKind::config, "grid_step must lie in (0, 1]");
  const double inv = 1.0 / grid_step;
  if (std::fabs(inv - std::lround(inv)) > 1e-9)
    throw Error(ErrorKind::config, "grid_step must divide 1");
  if (!(bootstrap_failure_tolerance >= 0.0 && bootstrap_failure_tolerance < 1.0))
    throw Error(ErrorKind::config,
                "bootstrap_failure_tolerance must lie in [0, 1)");
  if (dominance_direction != "target-dominant" &&
      dominance_direction != "target-dominated")
    throw Error(ErrorKind::config,
                "dominance_direction must be 'target-dominant' or "
                "'target-dominated'");
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double_or_throw(const std::string& v, const std::string& key) {
  double out{};
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw Error(ErrorKind::config, "config: bad numeric value for " + key);
  return out;
}

bool parse_bool_or_throw(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw Error(ErrorKind::config, "config: bad boolean value for " + key);
}

}  // namespace

std::vector<double> parse_tau_list(const std::string& text) {
  std::vector<double> taus;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto comma = text.find(',', pos);
    if (comma == std::string::npos) comma = text.size();
    const std::string item = trim(text.substr(pos, comma - pos));
    if (!item.empty()) taus.push_back(parse_double_or_throw(item, "taus"));
    pos = comma + 1;
  }
  return taus;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorKind::io, "cannot open config file: " + path.string());
  RunConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::config,
                  "config line " + std::to_string(lineno) +
                      ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key == "input") cfg.input = val;
    else if (key == "schema") cfg.schema = val;
    else if (key == "outdir") cfg.outdir = val;
    else if (key == "taus") cfg.taus = parse_tau_list(val);
    else if (key == "B") cfg.bootstrap_B =
        static_cast<int>(parse_double_or_throw(val, key));
    else if (key == "alpha") cfg.alpha = parse_double_or_throw(val, key);
    else if (key == "grid_step") cfg.grid_step = parse_double_or_throw(val, key);
    else if (key == "seed") cfg.seed =
        static_cast<std::uint64_t>(parse_double_or_throw(val, key));
    else if (key == "threads") cfg.threads =
        static_cast<unsigned>(parse_double_or_throw(val, key));
    else if (key == "normalize_prices")
      cfg.normalize_prices = parse_bool_or_throw(val, key);
    else if (key == "bootstrap_residuals_from_cb")
      cfg.bootstrap_residuals_from_cb = parse_bool_or_throw(val, key);
    else if (key == "bootstrap_failure_tolerance")
      cfg.bootstrap_failure_tolerance = parse_double_or_throw(val, key);
    else if (key == "replica_dump")
      cfg.replica_dump = parse_bool_or_throw(val, key);
    else if (key == "dominance_direction") cfg.dominance_direction = val;
    else
      throw Error(ErrorKind::config, "config: unknown key '" + key + "'");
  }
  return cfg;
}

}  // namespace qcost
