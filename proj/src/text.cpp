#include "vgroove/text.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "vgroove/error.hpp"

namespace vgroove {

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    out.push_back(trim(field));
  }
  if (!line.empty() && line.back() == ',') {
    out.emplace_back();
  }
  return out;
}

}  // namespace

std::string format_fixed(double value, int decimals) {
  if (std::abs(value) < 0.5 * std::pow(10.0, -decimals)) {
    value = 0.0;  // no "-0.00"
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  return buf;
}

std::vector<std::vector<double>> read_csv(std::istream& in,
                                          const std::vector<std::string>& columns) {
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) {
      continue;
    }
    const auto fields = split(line);
    if (!have_header) {
      if (fields != columns) {
        std::string expected;
        for (const auto& c : columns) {
          expected += (expected.empty() ? "" : ",") + c;
        }
        throw ConfigError("csv line " + std::to_string(line_no) + ": expected header '" +
                          expected + "'");
      }
      have_header = true;
      continue;
    }
    if (fields.size() != columns.size()) {
      throw ConfigError("csv line " + std::to_string(line_no) + ": expected " +
                        std::to_string(columns.size()) + " fields");
    }
    std::vector<double> row;
    for (const auto& f : fields) {
      double v = 0.0;
      const auto* end = f.data() + f.size();
      const auto [ptr, ec] = std::from_chars(f.data(), end, v);
      if (ec != std::errc{} || ptr != end || !std::isfinite(v)) {
        throw ConfigError("csv line " + std::to_string(line_no) + ": '" + f +
                          "' is not a number");
      }
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  if (!have_header) {
    throw ConfigError("csv input is empty");
  }
  return rows;
}

}  // namespace vgroove
