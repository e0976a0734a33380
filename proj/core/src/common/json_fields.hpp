/*
 * Copyright 2026 The PCSA Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

// Strict JSON field readers shared by the config and manifest parsers.
// Every reader reports the full dotted key on failure.

#include <cstdint>
#include <set>
#include <string>

#include "json.hpp"
#include "pcsa/tensor/errors.hpp"

namespace pcsa::detail {

using Json = nlohmann::json;

inline std::string join_key(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

/// Rejects keys of `obj` that are not in `allowed`.
inline void require_known_keys(const Json& obj, const std::string& prefix,
                               std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw ConfigError(prefix, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || a == key;
    if (!ok) throw ConfigError(join_key(prefix, key), "unknown key");
  }
}

template <typename T>
void read_field(const Json& obj, const std::string& prefix, const char* key, T& out) {
  const auto it = obj.find(key);
  if (it == obj.end()) return;
  const std::string full = join_key(prefix, key);
  try {
    if constexpr (std::is_same_v<T, bool>) {
      if (!it->is_boolean()) throw ConfigError(full, "expected true or false");
      out = it->template get<bool>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!it->is_number_integer()) throw ConfigError(full, "expected an integer");
      if (std::is_unsigned_v<T> && it->is_number_integer() && !it->is_number_unsigned() &&
          it->template get<std::int64_t>() < 0) {
        throw ConfigError(full, "expected a non-negative integer");
      }
      out = it->template get<T>();
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!it->is_number()) throw ConfigError(full, "expected a number");
      out = it->template get<T>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!it->is_string()) throw ConfigError(full, "expected a string");
      out = it->template get<std::string>();
    } else {
      out = it->template get<T>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(full, e.what());
  }
}

}  // namespace pcsa::detail
