#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace tailq::io {

/// Plain comma-separated table: a header row plus data rows. No quoting.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  /// 1-based file line of each row, for error messages.
  std::vector<std::size_t> line_numbers;

  /// Index of a header column, or -1.
  int column(std::string_view name) const;
};

/// Throws MissingArtifactError if the file cannot be opened, DataError if it
/// has no header or a row has the wrong number of cells.
CsvTable read_csv(const std::filesystem::path& path);

/// Parses a full cell as a double. Throws DataError naming the row and column.
double parse_double(std::string_view cell, std::size_t line, std::string_view column);
long long parse_integer(std::string_view cell, std::size_t line, std::string_view column);

/// Shortest representation that round-trips exactly.
std::string format_double(double value);

/// Writes text atomically enough for our purposes; throws Error naming the path.
void write_text_file(const std::filesystem::path& path, const std::string& contents);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace tailq::io
