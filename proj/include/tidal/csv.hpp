#pragma once

#include <cstddef>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace tidal::csv {

/// 17 significant digits: lossless for IEEE doubles.
std::string format_double(double v);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

/// A parsed CSV file: header plus string cells.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> lines;  // source line of each row

  /// Throws ParseError when the column is missing.
  std::size_t column(const std::string& name) const;
};

/// Rows must match the header width; violations throw ParseError("line N").
Table read_table(std::istream& in);
Table read_table(const std::filesystem::path& path);

double parse_double(const std::string& cell, std::size_t line);
long long parse_int(const std::string& cell, std::size_t line);

}  // namespace tidal::csv
