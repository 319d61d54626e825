#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace formeclust {

// Minimal CSV for the flat tables this project emits: no quoting, comma
// separated, first row is a header.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable parse_csv(std::string_view text);
CsvTable read_csv(const std::filesystem::path& path);
std::string format_csv(const CsvTable& table);

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double v);
double parse_double(std::string_view s);
int parse_int(std::string_view s);

std::string read_text_file(const std::filesystem::path& path);

/// Writes to a sibling temp file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace formeclust
