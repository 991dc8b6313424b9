#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace duet::text {

/// Shortest decimal form that parses back to the identical double.
std::string format_double(double v);

/// Strict parse of the whole field; throws InputError with the given context.
double parse_double(std::string_view field, std::string_view context);
long long parse_int(std::string_view field, std::string_view context);

/// Splits on ',' without quote handling; trailing '\r' is stripped.
std::vector<std::string_view> split_csv(std::string_view line);

std::string_view trim(std::string_view s);

}  // namespace duet::text
