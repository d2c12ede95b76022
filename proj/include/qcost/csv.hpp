#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace qcost::csv {

// Shortest round-trip decimal form, locale-independent; identical doubles
// always print the same bytes, which is what output determinism rests on.
std::string format_double(double v);

std::string format_int(std::int64_t v);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// RFC-4180-ish reader: UTF-8, header row required, quoted fields with ""
// escapes, tolerates \r\n.
Table read_file(const std::filesystem::path& path);

void write_file(const std::filesystem::path& path, const Table& table);

// Writer helper which quotes only when needed.
std::string encode_field(const std::string& field);

}  // namespace qcost::csv
