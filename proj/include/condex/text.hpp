#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace condex {

/// Shortest decimal text that parses back to the same double.
[[nodiscard]] std::string format_number(double v);

/// Splits one CSV line on commas (no quoting) and trims spaces and CR.
[[nodiscard]] std::vector<std::string_view> split_csv(std::string_view line);

/// Strict parsers; throw std::invalid_argument on trailing garbage.
[[nodiscard]] double parse_double(std::string_view text);
[[nodiscard]] long long parse_integer(std::string_view text);

}  // namespace condex
