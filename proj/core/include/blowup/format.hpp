#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace blowup {

/// Shortest decimal text that parses back to exactly `x`; "inf"/"-inf"/"nan"
/// for non-finite values.
std::string format_double(double x);

/// Parses a full token as a double (accepts "inf" and "-inf").
std::optional<double> parse_double(std::string_view text);

std::string_view trim(std::string_view text);

}  // namespace blowup
