#include "thermoscreen/canonical_json.hpp"

#include <array>
#include <charconv>
#include <cmath>

#include "thermoscreen/error.hpp"

namespace thermoscreen {

std::string format_double(double value) {
    if (!std::isfinite(value)) throw ValidationError("number", "non-finite value cannot be serialized");
    if (value == 0.0) return "0";  // also folds -0
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), end);
}

namespace {

void write_string(std::string& out, const std::string& s) {
    // nlohmann's dump() produces a correctly escaped string literal.
    out += nlohmann::json(s).dump();
}

bool is_scalar_array(const nlohmann::json& arr) {
    for (const auto& el : arr)
        if (el.is_array() || el.is_object()) return false;
    return true;
}

void write_value(std::string& out, const nlohmann::json& v, int depth);

void indent(std::string& out, int depth) { out.append(static_cast<std::size_t>(depth) * 2, ' '); }

void write_value(std::string& out, const nlohmann::json& v, int depth) {
    switch (v.type()) {
    case nlohmann::json::value_t::null: out += "null"; break;
    case nlohmann::json::value_t::boolean: out += v.get<bool>() ? "true" : "false"; break;
    case nlohmann::json::value_t::number_integer: out += std::to_string(v.get<long long>()); break;
    case nlohmann::json::value_t::number_unsigned: out += std::to_string(v.get<unsigned long long>()); break;
    case nlohmann::json::value_t::number_float: out += format_double(v.get<double>()); break;
    case nlohmann::json::value_t::string: write_string(out, v.get<std::string>()); break;
    case nlohmann::json::value_t::array:
        if (v.empty()) {
            out += "[]";
        } else if (is_scalar_array(v)) {
            out += '[';
            bool first = true;
            for (const auto& el : v) {
                if (!first) out += ", ";
                first = false;
                write_value(out, el, depth + 1);
            }
            out += ']';
        } else {
            out += "[\n";
            bool first = true;
            for (const auto& el : v) {
                if (!first) out += ",\n";
                first = false;
                indent(out, depth + 1);
                write_value(out, el, depth + 1);
            }
            out += '\n';
            indent(out, depth);
            out += ']';
        }
        break;
    case nlohmann::json::value_t::object:
        if (v.empty()) {
            out += "{}";
            break;
        }
        out += "{\n";
        {
            bool first = true;
            // nlohmann::json objects are std::map-backed, so iteration is key-sorted.
            for (const auto& [key, el] : v.items()) {
                if (!first) out += ",\n";
                first = false;
                indent(out, depth + 1);
                write_string(out, key);
                out += ": ";
                write_value(out, el, depth + 1);
            }
        }
        out += '\n';
        indent(out, depth);
        out += '}';
        break;
    default: throw ValidationError("json", "unsupported value type");
    }
}

} // namespace

std::string to_canonical_json(const nlohmann::json& doc) {
    std::string out;
    write_value(out, doc, 0);
    out += '\n';
    return out;
}

nlohmann::json parse_json_document(std::string_view text, std::string_view what) {
    try {
        return nlohmann::json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::parse_error& e) {
        std::size_t line = 1, col = 1;
        const std::size_t upto = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        for (std::size_t i = 0; i < upto; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ParseError(std::string(what) + " line " + std::to_string(line) + ", column " + std::to_string(col),
                         "malformed JSON");
    }
}

} // namespace thermoscreen
