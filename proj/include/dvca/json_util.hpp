#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "dvca/errors.hpp"
#include "dvca/geometry.hpp"

namespace dvca::json_util {

inline nlohmann::ordered_json vec(Vec2 v) { return nlohmann::ordered_json::array({v.x, v.y}); }

inline Vec2 vec(const nlohmann::json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ValidationError(path, "expected [x, y]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

inline const nlohmann::json& field(const nlohmann::json& j, const char* key, const std::string& path) {
  auto it = j.find(key);
  if (it == j.end()) throw ValidationError(path + "/" + key, "missing");
  return *it;
}

template <typename T>
T number(const nlohmann::json& j, const char* key, const std::string& path) {
  const auto& v = field(j, key, path);
  if (!v.is_number()) throw ValidationError(path + "/" + key, "expected a number");
  return v.get<T>();
}

}  // namespace dvca::json_util
