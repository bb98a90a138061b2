#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace fkn::io {

/// 17 significant digits, enough to read back the same double.
std::string format_double(double x);

std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over the target.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::vector<std::string> split(std::string_view s, char sep);

/// Parses a finite double; throws ParseError(line) otherwise.
double parse_double(std::string_view s, std::size_t line);

/// Minimal header + numeric rows reader for the CSV files this toolkit emits.
/// Lines starting with '#' are kept in `comments` and skipped.
struct CsvTable {
  std::vector<std::string> comments;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  int column(std::string_view name) const;  // -1 when absent
};
CsvTable read_csv_table(const std::filesystem::path& path);

}  // namespace fkn::io
