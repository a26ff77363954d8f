#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ppbt {

inline constexpr std::string_view kVersion = "0.1.0";

/// Shortest representation that parses back to the same double; NaN is "NA".
std::string format_double(double v);

/// Strict parsers: the whole string must be consumed. Throw ConfigError.
double parse_double(std::string_view text);
int parse_int(std::string_view text);
unsigned long long parse_u64(std::string_view text);

std::vector<double> parse_double_list(std::string_view text);
std::string format_double_list(const std::vector<double>& values);

std::string_view trim(std::string_view s);

}  // namespace ppbt
