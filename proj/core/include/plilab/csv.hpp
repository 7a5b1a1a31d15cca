#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace plilab::csv {

// RFC-4180 output: header row, LF line endings, doubles at 17 significant
// digits so every float64 round-trips.

std::string format_double(double v);

void write_header(std::ostream& out, const std::vector<std::string>& cols);

void write_row(std::ostream& out, const std::vector<double>& values);

}  // namespace plilab::csv
