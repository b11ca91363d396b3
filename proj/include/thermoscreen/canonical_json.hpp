#pragma once

#include <string>
#include <string_view>

#include "json.hpp"

namespace thermoscreen {

// Shortest decimal that round-trips to the same double.
std::string format_double(double value);

// Sorted keys, 2-space indent, scalar-only arrays kept on one line,
// floats in shortest round-trip form, trailing newline.
std::string to_canonical_json(const nlohmann::json& doc);

// Parses text with nlohmann::json; syntax errors become ParseError carrying
// "line L, column C" context.
nlohmann::json parse_json_document(std::string_view text, std::string_view what);

} // namespace thermoscreen
