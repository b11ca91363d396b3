#pragma once

// Typed field access for input documents; failures become ParseError with a
// JSON-path context such as "series[2].samples[5]".

#include <string>

#include "json.hpp"
#include "thermoscreen/error.hpp"

namespace thermoscreen::detail {

inline std::string join_path(const std::string& base, const std::string& key) {
    return base.empty() ? key : base + "." + key;
}

inline std::string index_path(const std::string& base, std::size_t i) {
    return base + "[" + std::to_string(i) + "]";
}

inline const nlohmann::json& require(const nlohmann::json& obj, const char* key, const std::string& ctx) {
    if (!obj.is_object()) throw ParseError(ctx, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(join_path(ctx, key), "missing required field");
    return *it;
}

inline double as_number(const nlohmann::json& v, const std::string& path) {
    if (!v.is_number()) throw ParseError(path, "expected a number");
    return v.get<double>();
}

inline long long as_integer(const nlohmann::json& v, const std::string& path) {
    if (!v.is_number_integer()) throw ParseError(path, "expected an integer");
    return v.get<long long>();
}

inline std::string as_string(const nlohmann::json& v, const std::string& path) {
    if (!v.is_string()) throw ParseError(path, "expected a string");
    return v.get<std::string>();
}

inline bool as_bool(const nlohmann::json& v, const std::string& path) {
    if (!v.is_boolean()) throw ParseError(path, "expected a boolean");
    return v.get<bool>();
}

inline const nlohmann::json& as_array(const nlohmann::json& v, const std::string& path) {
    if (!v.is_array()) throw ParseError(path, "expected an array");
    return v;
}

inline double number_field(const nlohmann::json& obj, const char* key, const std::string& ctx) {
    return as_number(require(obj, key, ctx), join_path(ctx, key));
}

inline std::string string_field(const nlohmann::json& obj, const char* key, const std::string& ctx) {
    return as_string(require(obj, key, ctx), join_path(ctx, key));
}

} // namespace thermoscreen::detail
