#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace demandcast::csv {

struct Row {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

struct Table {
  std::vector<std::string> header;
  std::vector<Row> rows;

  /// Column position of `name`, or -1.
  [[nodiscard]] int column(std::string_view name) const;
};

/// Reads a comma-separated file with a header line. Fields are trimmed; quoting is not supported.
/// Blank lines are skipped. Throws DataError on open failure or ragged rows.
Table read(const std::filesystem::path& path);

std::vector<std::string> split(std::string_view line, char sep = ',');
std::string_view trim(std::string_view s);

// Strict field parsers; throw DataError mentioning `where` on failure.
long long parse_int(std::string_view s, const std::string& where);
double parse_double(std::string_view s, const std::string& where);
bool parse_bool(std::string_view s, const std::string& where);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

/// Opens `path` for writing or throws DataError.
void open_for_write(std::ofstream& out, const std::filesystem::path& path);

}  // namespace demandcast::csv
