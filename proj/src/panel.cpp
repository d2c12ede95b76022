#include "qcost/panel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "qcost/csv.hpp"
#include "qcost/errors.hpp"

namespace qcost {

std::vector<std::string> PanelDataset::bank_ids() const {
  std::vector<std::string> ids;
  for (const auto& r : rows) {
    if (ids.empty() || ids.back() != r.bank_id) ids.push_back(r.bank_id);
  }
  return ids;
}

SchemaMapping SchemaMapping::identity() { return SchemaMapping{}; }

SchemaMapping SchemaMapping::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorKind::io, "cannot open schema file: " + path.string());
  SchemaMapping m;
  std::set<std::string> canonical(kPanelVariables.begin(), kPanelVariables.end());
  canonical.insert("bank_id");
  canonical.insert("year");
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t\r") != std::string::npos)
        throw Error(ErrorKind::config,
                    "schema file line " + std::to_string(lineno) +
                        ": expected 'canonical = column'");
      continue;
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      const auto e = s.find_last_not_of(" \t\r");
      return s.substr(b, e - b + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (!canonical.count(key))
      throw Error(ErrorKind::config, "schema file: unknown canonical name '" +
                                         key + "'");
    if (val.empty())
      throw Error(ErrorKind::config,
                  "schema file: empty column for '" + key + "'");
    m.columns[key] = val;
  }
  return m;
}

std::string SchemaMapping::column_for(const std::string& canonical) const {
  auto it = columns.find(canonical);
  return it == columns.end() ? canonical : it->second;
}

namespace {

bool parse_number(const std::string& s, double& out) {
  const char* b = s.data();
  const char* e = s.data() + s.size();
  while (b < e && (*b == ' ' || *b == '\t')) ++b;
  while (e > b && (*(e - 1) == ' ' || *(e - 1) == '\t')) --e;
  auto res = std::from_chars(b, e, out);
  return res.ec == std::errc() && res.ptr == e && std::isfinite(out);
}

bool parse_year(const std::string& s, int& out) {
  double v;
  if (!parse_number(s, v)) return false;
  if (v != std::floor(v) || v < -100000 || v > 100000) return false;
  out = static_cast<int>(v);
  return true;
}

}  // namespace

PanelDataset validate_panel(std::vector<PanelRow> rows,
                            const LoadOptions& options) {
  PanelDataset data;

  // Positivity screen first, mirroring the drop-don't-impute rule.
  std::size_t idx = 0;
  for (auto& row : rows) {
    ++idx;
    std::string bad;
    for (std::size_t k = 0; k < row.values.size(); ++k) {
      if (!(row.values[k] > 0.0) || !std::isfinite(row.values[k])) {
        bad = kPanelVariables[k];
        break;
      }
    }
    if (!bad.empty()) {
      data.rejected.push_back(
          {idx, "non-positive " + bad + " for bank " + row.bank_id +
                    " year " + std::to_string(row.year)});
      continue;
    }
    if (options.normalize_prices) {
      const double w3 = row.values[5];
      row.values[9] /= w3;  // C
      row.values[3] /= w3;  // W1
      row.values[4] /= w3;  // W2
    }
    data.rows.push_back(std::move(row));
  }

  if (data.rows.empty())
    throw Error(ErrorKind::data, "panel has no valid rows after screening");

  std::stable_sort(data.rows.begin(), data.rows.end(),
                   [](const PanelRow& a, const PanelRow& b) {
                     if (a.bank_id != b.bank_id) return a.bank_id < b.bank_id;
                     return a.year < b.year;
                   });

  for (std::size_t i = 1; i < data.rows.size(); ++i) {
    const auto& p = data.rows[i - 1];
    const auto& c = data.rows[i];
    if (p.bank_id == c.bank_id && p.year == c.year)
      throw Error(ErrorKind::data, "duplicate (bank, year) pair: (" +
                                       c.bank_id + ", " +
                                       std::to_string(c.year) + ")");
  }

  // Every bank needs within-bank variation for the within transform.
  {
    std::vector<std::string> singletons;
    std::size_t i = 0;
    while (i < data.rows.size()) {
      std::size_t j = i;
      while (j < data.rows.size() &&
             data.rows[j].bank_id == data.rows[i].bank_id)
        ++j;
      if (j - i < 2) singletons.push_back(data.rows[i].bank_id);
      i = j;
    }
    if (!singletons.empty()) {
      std::ostringstream msg;
      msg << "banks with a single observation (need >= 2): ";
      for (std::size_t k = 0; k < singletons.size(); ++k) {
        if (k) msg << ", ";
        msg << singletons[k];
      }
      throw Error(ErrorKind::data, msg.str());
    }
  }

  data.year_min = data.rows.front().year;
  data.year_max = data.rows.front().year;
  for (const auto& r : data.rows) {
    data.year_min = std::min(data.year_min, r.year);
    data.year_max = std::max(data.year_max, r.year);
  }
  std::set<int> seen;
  for (const auto& r : data.rows) seen.insert(r.year);
  for (int y = data.year_min; y <= data.year_max; ++y) {
    if (!seen.count(y))
      throw Error(ErrorKind::data,
                  "year range not contiguous: no observations in " +
                      std::to_string(y));
  }
  return data;
}

PanelDataset load_panel(const std::filesystem::path& path,
                        const SchemaMapping& schema,
                        const LoadOptions& options) {
  auto table = csv::read_file(path);

  auto col_index = [&](const std::string& canonical) {
    const std::string name = schema.column_for(canonical);
    for (std::size_t i = 0; i < table.header.size(); ++i)
      if (table.header[i] == name) return static_cast<std::ptrdiff_t>(i);
    throw Error(ErrorKind::data, "missing column '" + name + "' (canonical " +
                                     canonical + ") in " + path.string());
  };

  const auto id_col = col_index("bank_id");
  const auto year_col = col_index("year");
  std::array<std::ptrdiff_t, 10> value_cols{};
  for (std::size_t k = 0; k < kPanelVariables.size(); ++k)
    value_cols[k] = col_index(kPanelVariables[k]);

  std::vector<PanelRow> rows;
  std::vector<RejectedRow> parse_rejects;
  rows.reserve(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& raw = table.rows[i];
    const std::size_t lineno = i + 2;  // after header
    auto field = [&](std::ptrdiff_t c) -> const std::string& {
      static const std::string empty;
      return c < static_cast<std::ptrdiff_t>(raw.size())
                 ? raw[static_cast<std::size_t>(c)]
                 : empty;
    };
    PanelRow row;
    row.bank_id = field(id_col);
    if (row.bank_id.empty()) {
      parse_rejects.push_back({lineno, "empty bank_id"});
      continue;
    }
    if (!parse_year(field(year_col), row.year)) {
      parse_rejects.push_back({lineno, "unparseable year '" +
                                           field(year_col) + "'"});
      continue;
    }
    bool ok = true;
    for (std::size_t k = 0; k < value_cols.size(); ++k) {
      if (!parse_number(field(value_cols[k]), row.values[k])) {
        parse_rejects.push_back({lineno, std::string("unparseable ") +
                                             kPanelVariables[k] + " '" +
                                             field(value_cols[k]) + "'"});
        ok = false;
        break;
      }
    }
    if (ok) rows.push_back(std::move(row));
  }

  // validate_panel indexes rejects by position among parsed rows; translate
  // to source line numbers for the report.
  std::vector<std::size_t> lineno_of_row;
  lineno_of_row.reserve(rows.size());
  {
    std::size_t parsed = 0;
    std::set<std::size_t> rejected_lines;
    for (const auto& r : parse_rejects) rejected_lines.insert(r.line);
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      const std::size_t lineno = i + 2;
      if (rejected_lines.count(lineno)) continue;
      if (parsed < rows.size()) lineno_of_row.push_back(lineno);
      ++parsed;
    }
  }

  PanelDataset data = validate_panel(std::move(rows), options);
  for (auto& rej : data.rejected) {
    if (rej.line >= 1 && rej.line <= lineno_of_row.size())
      rej.line = lineno_of_row[rej.line - 1];
  }
  data.rejected.insert(data.rejected.end(), parse_rejects.begin(),
                       parse_rejects.end());
  std::sort(data.rejected.begin(), data.rejected.end(),
            [](const RejectedRow& a, const RejectedRow& b) {
              return a.line < b.line;
            });
  return data;
}

void write_rejection_report(const std::filesystem::path& path,
                            const std::vector<RejectedRow>& rejected) {
  csv::Table t;
  t.header = {"row", "reason"};
  for (const auto& r : rejected)
    t.rows.push_back({csv::format_int(static_cast<std::int64_t>(r.line)),
                      r.reason});
  csv::write_file(path, t);
}

void write_panel_csv(const std::filesystem::path& path,
                     const PanelDataset& data) {
  csv::Table t;
  t.header = {"bank_id", "year"};
  for (const char* v : kPanelVariables) t.header.push_back(v);
  for (const auto& r : data.rows) {
    std::vector<std::string> row{r.bank_id, csv::format_int(r.year)};
    for (double v : r.values) row.push_back(csv::format_double(v));
    t.rows.push_back(std::move(row));
  }
  csv::write_file(path, t);
}

}  // namespace qcost
