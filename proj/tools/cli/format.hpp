// format.hpp: deterministic number formatting and strict parsing

#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace heom::cli {

// Shortest representation that parses back to the same double.
std::string format_double(double x);

// Whole-string parses; nullopt on trailing garbage or overflow.
std::optional<double> parse_double(std::string_view text);
std::optional<long long> parse_integer(std::string_view text);

}  // namespace heom::cli
