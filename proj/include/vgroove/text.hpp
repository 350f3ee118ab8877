#pragma once

#include <istream>
#include <string>
#include <vector>

namespace vgroove {

// Fixed-point rendering independent of the global locale.
std::string format_fixed(double value, int decimals);

// Reads a numeric CSV whose header must equal `columns` exactly. Blank lines
// are skipped. Throws ConfigError naming the offending line.
std::vector<std::vector<double>> read_csv(std::istream& in,
                                          const std::vector<std::string>& columns);

}  // namespace vgroove
