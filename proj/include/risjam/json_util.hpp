#pragma once

#include <initializer_list>
#include <string>
#include <string_view>
#include <type_traits>

#include <json.hpp>

#include "risjam/types.hpp"

// Schema helpers: typed field access that reports the dotted field path of
// the first violation.
namespace risjam::json_util {

using nlohmann::json;

inline std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

inline std::string index_path(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

inline void expect_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ValidationError("expected an object", path);
}

inline void expect_array(const json& j, const std::string& path) {
  if (!j.is_array()) throw ValidationError("expected an array", path);
}

inline void reject_unknown_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                                const std::string& path) {
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) throw ValidationError("unknown field", join(path, key));
  }
}

template <class T>
T as(const json& j, const std::string& path) {
  if constexpr (std::is_same_v<T, bool>) {
    if (!j.is_boolean()) throw ValidationError("expected a boolean", path);
    return j.get<bool>();
  } else if constexpr (std::is_integral_v<T>) {
    if (!j.is_number_integer()) throw ValidationError("expected an integer", path);
    if constexpr (std::is_unsigned_v<T>) {
      if (j.is_number_unsigned()) return j.get<T>();
      if (j.get<long long>() < 0) throw ValidationError("expected a non-negative integer", path);
    }
    return j.get<T>();
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!j.is_number()) throw ValidationError("expected a number", path);
    const T v = j.get<T>();
    if (!std::isfinite(v)) throw ValidationError("expected a finite number", path);
    return v;
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!j.is_string()) throw ValidationError("expected a string", path);
    return j.get<std::string>();
  } else {
    static_assert(!sizeof(T), "unsupported field type");
  }
}

template <class T>
T require(const json& obj, std::string_view key, const std::string& path) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw ValidationError("missing required field", join(path, key));
  return as<T>(*it, join(path, key));
}

template <class T>
T get_or(const json& obj, std::string_view key, T fallback, const std::string& path) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return fallback;
  return as<T>(*it, join(path, key));
}

/// [x, y] or [x, y, z] in meters.
inline Position position(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() < 2 || j.size() > 3)
    throw ValidationError("expected a position [x, y] or [x, y, z]", path);
  Position p{as<double>(j[0], index_path(path, 0)), as<double>(j[1], index_path(path, 1)),
             j.size() == 3 ? as<double>(j[2], index_path(path, 2)) : 0.0};
  return p;
}

inline json to_json(const Position& p) { return json::array({p.x, p.y, p.z}); }

}  // namespace risjam::json_util
