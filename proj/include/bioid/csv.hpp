#pragma once

#include <string>
#include <vector>

namespace bioid::csv {

// Round-trip formatting (17 significant digits); used by every data file
// so that save/load is lossless and outputs are byte-reproducible.
std::string fmt(double v);

// Display formatting with a chosen precision.
std::string fmt(double v, int precision);

std::vector<std::string> split_line(const std::string& line, char sep = ',');

}  // namespace bioid::csv
