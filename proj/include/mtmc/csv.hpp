#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mtmc::csv {

/// Splits on commas; surrounding whitespace of each field is trimmed.
std::vector<std::string_view> split(std::string_view line);

std::string_view trim(std::string_view s);

std::optional<double> parse_double(std::string_view field);
std::optional<long long> parse_int(std::string_view field);

/// Shortest decimal text that parses back to exactly the same double.
std::string format_double(double value);

/// True when the line is blank or holds only whitespace.
bool is_blank(std::string_view line);

}  // namespace mtmc::csv
