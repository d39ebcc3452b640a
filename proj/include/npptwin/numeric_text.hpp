#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace npptwin {

// Shortest decimal text that parses back to exactly `value`.
std::string format_number(double value);

// Strict decimal literal: optional sign, digits with optional fraction (or a
// leading-dot fraction), optional exponent. No whitespace, no inf/nan.
bool is_decimal_literal(std::string_view text);
std::optional<double> parse_decimal(std::string_view text);

// Non-negative integer without leading zeros (a lone "0" is allowed).
std::optional<std::int64_t> parse_count(std::string_view text);

}  // namespace npptwin
