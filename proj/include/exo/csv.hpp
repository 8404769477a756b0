#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

// Small CSV helpers shared by the session, trace, and telemetry formats.
// All files use '\n' line endings, '.' decimal separators, and no quoting
// (fields are numbers or fixed lowercase words).
namespace exo::csv {

/// Shortest decimal form that parses back to exactly the same double.
std::string format_double(double v);

/// Strict parse of a full field; throws std::invalid_argument on anything
/// other than a complete floating-point number.
double parse_double(std::string_view s);

/// Strict parse of a full field as a signed integer.
std::int64_t parse_int(std::string_view s);

/// Splits one line at commas; empty fields are preserved.
std::vector<std::string_view> split_fields(std::string_view line);

}  // namespace exo::csv
