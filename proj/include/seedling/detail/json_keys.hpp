#pragma once

#include <algorithm>
#include <initializer_list>
#include <string>
#include <string_view>

#include "json.hpp"
#include "seedling/error.hpp"

namespace seedling::detail {

// Throws ConfigError unless j is an object whose keys all appear in allowed.
inline void check_keys(const nlohmann::json& j, std::string_view section, std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) throw ConfigError(std::string(section) + " config must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError(std::string(section) + " config: unknown key '" + key + "'");
    }
  }
}

// Copies j[key] into out when present, mapping type errors to ConfigError.
template <typename T>
void read_key(const nlohmann::json& j, std::string_view section, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    j.at(key).get_to(out);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string(section) + " config: key '" + key + "': " + e.what());
  }
}

}  // namespace seedling::detail
