#include "csv_io.hpp"

#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace ngtrend::cli {

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\"");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\"");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto fields = split(line);
    if (first) {
      first = false;
      double dummy = 0.0;
      for (const auto& f : fields) {
        if (!parse_double(f, dummy)) {
          table.header = std::move(fields);
          break;
        }
      }
      if (!table.header.empty()) continue;
    }
    table.rows.push_back(std::move(fields));
  }
  return table;
}

std::vector<double> numeric_column(const CsvTable& table, const std::string& selector) {
  std::size_t width = table.header.size();
  if (width == 0 && !table.rows.empty()) width = table.rows.front().size();
  if (width == 0) throw std::invalid_argument("input has no columns");

  std::size_t column = width - 1;
  if (selector.empty()) {
    for (std::size_t i = 0; i < table.header.size(); ++i)
      if (table.header[i] == "y") column = i;
  } else {
    bool found = false;
    for (std::size_t i = 0; i < table.header.size(); ++i) {
      if (table.header[i] == selector) {
        column = i;
        found = true;
      }
    }
    if (!found) {
      std::size_t index = 0;
      const auto [ptr, ec] =
          std::from_chars(selector.data(), selector.data() + selector.size(), index);
      if (ec != std::errc{} || ptr != selector.data() + selector.size() || index >= width)
        throw std::invalid_argument("no column '" + selector + "'");
      column = index;
    }
  }

  std::vector<double> values;
  values.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    double v = 0.0;
    if (column >= table.rows[r].size() || !parse_double(table.rows[r][column], v))
      throw std::invalid_argument("non-numeric value in row " + std::to_string(r + 1));
    values.push_back(v);
  }
  return values;
}

std::string format_sig9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string format_exact(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_series_csv(std::ostream& out, const std::vector<double>& y,
                      const std::vector<double>& truth) {
  out << "n,y,truth\n";
  for (std::size_t i = 0; i < y.size(); ++i)
    out << i + 1 << ',' << format_exact(y[i]) << ',' << format_exact(truth[i]) << '\n';
}

void write_bands_csv(std::ostream& out, const std::vector<std::array<double, 7>>& bands) {
  out << "n,p0.13,p2.27,p15.87,p50,p84.13,p97.73,p99.87\n";
  for (std::size_t i = 0; i < bands.size(); ++i) {
    out << i + 1;
    for (double v : bands[i]) out << ',' << format_sig9(v);
    out << '\n';
  }
}

}  // namespace ngtrend::cli
