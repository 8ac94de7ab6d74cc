#ifndef ALRANK_JSON_UTIL_HPP_
#define ALRANK_JSON_UTIL_HPP_

#include <initializer_list>
#include <string>

#include "alrank/error.hpp"
#include "json.hpp"

namespace alrank::json_util {

// Throws ConfigError if `obj` is not an object or holds a key outside
// `allowed`.
inline void CheckKeys(const nlohmann::json& obj,
                      std::initializer_list<const char*> allowed,
                      const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* key : allowed) {
      if (it.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) throw ConfigError(where + ": unknown key '" + it.key() + "'");
  }
}

// Reads obj[key] into *out when present; leaves *out untouched otherwise.
template <typename T>
void GetOptional(const nlohmann::json& obj, const char* key, T* out,
                 const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    *out = it->template get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(where + ": bad value for '" + key + "'");
  }
}

template <typename T>
T GetRequired(const nlohmann::json& obj, const char* key,
              const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw DataError(where + ": missing '" + std::string(key) + "'");
  }
  try {
    return it->template get<T>();
  } catch (const nlohmann::json::exception&) {
    throw DataError(where + ": bad value for '" + std::string(key) + "'");
  }
}

}  // namespace alrank::json_util

#endif  // ALRANK_JSON_UTIL_HPP_
