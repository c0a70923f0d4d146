#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

namespace ngtrend::cli {

struct CsvTable {
  std::vector<std::string> header;  // empty when the file had none
  std::vector<std::vector<std::string>> rows;
};

/// Splits on commas; blank lines are skipped. The first line is treated as a
/// header when any of its fields fails to parse as a number.
CsvTable read_csv(std::istream& in);

/// Picks a numeric column by header name or zero-based index. With an empty
/// selector: the "y" column if present, otherwise the last column.
/// Throws std::invalid_argument on an unknown column or a non-numeric cell.
std::vector<double> numeric_column(const CsvTable& table, const std::string& selector);

/// Shortest-round-trip style formatting at 9 significant digits.
std::string format_sig9(double v);
/// Exact round trip (17 significant digits).
std::string format_exact(double v);

void write_series_csv(std::ostream& out, const std::vector<double>& y,
                      const std::vector<double>& truth);

void write_bands_csv(std::ostream& out, const std::vector<std::array<double, 7>>& bands);

}  // namespace ngtrend::cli
