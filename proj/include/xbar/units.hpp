#pragma once

#include <string>
#include <string_view>

namespace xbar {

/// Parses a quantity such as "10mV", "0.22 uA", "0.22µA", "1MΩ", "1Mohm" or a
/// bare number into base SI. `unit` is the expected unit symbol ("V", "A",
/// "ohm", "s", "J", "W" or "" for dimensionless); a missing symbol is accepted.
/// Throws std::invalid_argument on malformed text or a wrong unit.
double parse_quantity(std::string_view text, std::string_view unit);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_number(double v);

}  // namespace xbar
