#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace geonav::csv {

/// Shortest decimal string that round-trips the exact double value.
/// Locale-independent; used wherever recomputation from file must match
/// in-memory values.
std::string format_double(double v);

/// Fixed-point with the given number of decimals (for pinned file formats).
std::string format_fixed(double v, int decimals);

double parse_double(std::string_view tok);

std::vector<std::string_view> split_line(std::string_view line, char sep = ',');

}  // namespace geonav::csv
