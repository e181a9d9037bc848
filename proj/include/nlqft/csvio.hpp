#pragma once
// Deterministic CSV output: scientific notation, 17 significant digits,
// comma delimiter, '#'-prefixed header comment lines.
#include <string>
#include <vector>

namespace nlqft {

std::string format_sci(double v);

struct CsvTable {
  std::vector<std::string> comments;  // written as "# ..." lines
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

void write_csv(const std::string& path, const CsvTable& table);

// FNV-1a 64-bit, for stable content hashes in run manifests.
std::uint64_t fnv1a(const std::string& text);

}  // namespace nlqft
