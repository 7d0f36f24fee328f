#pragma once

// Typed accessors for JSON objects that report the offending key path.

#include "gridtune/error.hpp"
#include "json.hpp"

#include <cstdint>
#include <string>

namespace gridtune::io {

inline void require_object(const nlohmann::json& j, const std::string& path)
{
    if (!j.is_object())
        throw Error(ErrorCode::config, path + ": expected an object");
}

inline const nlohmann::json& require_array(const nlohmann::json& j, const char* key, const std::string& path)
{
    if (!j.contains(key) || !j.at(key).is_array())
        throw Error(ErrorCode::config, path + "." + key + ": expected an array");
    return j.at(key);
}

inline double req_number(const nlohmann::json& j, const char* key, const std::string& path)
{
    if (!j.contains(key))
        throw Error(ErrorCode::config, path + "." + key + ": missing");
    const auto& v = j.at(key);
    if (!v.is_number())
        throw Error(ErrorCode::config, path + "." + key + ": expected a number");
    return v.get<double>();
}

inline double opt_number(const nlohmann::json& j, const char* key, const std::string& path, double fallback)
{
    return j.contains(key) ? req_number(j, key, path) : fallback;
}

inline std::int64_t req_integer(const nlohmann::json& j, const char* key, const std::string& path)
{
    if (!j.contains(key))
        throw Error(ErrorCode::config, path + "." + key + ": missing");
    const auto& v = j.at(key);
    if (!v.is_number_integer())
        throw Error(ErrorCode::config, path + "." + key + ": expected an integer");
    return v.get<std::int64_t>();
}

inline std::int64_t opt_integer(const nlohmann::json& j, const char* key, const std::string& path,
                                std::int64_t fallback)
{
    return j.contains(key) ? req_integer(j, key, path) : fallback;
}

inline std::string req_string(const nlohmann::json& j, const char* key, const std::string& path)
{
    if (!j.contains(key) || !j.at(key).is_string())
        throw Error(ErrorCode::config, path + "." + key + ": expected a string");
    return j.at(key).get<std::string>();
}

inline std::string opt_string(const nlohmann::json& j, const char* key, const std::string& path,
                              const std::string& fallback)
{
    return j.contains(key) ? req_string(j, key, path) : fallback;
}

inline bool opt_bool(const nlohmann::json& j, const char* key, const std::string& path, bool fallback)
{
    if (!j.contains(key))
        return fallback;
    if (!j.at(key).is_boolean())
        throw Error(ErrorCode::config, path + "." + key + ": expected true or false");
    return j.at(key).get<bool>();
}

} // namespace gridtune::io
