#pragma once

#include <cstdint>
#include <string>
#include <string_view>

// Locale-independent number formatting/parsing for the flat-file formats.
// Doubles round-trip exactly (shortest representation via to_chars).

namespace pooltest::text {

std::string format_double(double v);

// Throw ParseError with `context` in the message on malformed input.
double parse_double(std::string_view s, std::string_view context);
std::uint64_t parse_u64(std::string_view s, std::string_view context);

std::string_view trim(std::string_view s);

}  // namespace pooltest::text
