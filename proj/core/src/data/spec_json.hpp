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

#include "common/json_fields.hpp"
#include "pcsa/data/synth.hpp"

namespace pcsa::detail {

inline Json spec_to_json(const data::SyntheticSpec& s) {
  return Json{{"seed", s.seed},
              {"edge", s.edge},
              {"blob_count_range", {s.blob_count_range.first, s.blob_count_range.second}},
              {"blob_sigma_range", {s.blob_sigma_range.first, s.blob_sigma_range.second}},
              {"cavity_count", s.cavity_count}};
}

inline data::SyntheticSpec spec_from_json(const Json& j, const std::string& prefix) {
  require_known_keys(j, prefix, {"seed", "edge", "blob_count_range", "blob_sigma_range", "cavity_count"});
  data::SyntheticSpec s;
  read_field(j, prefix, "seed", s.seed);
  read_field(j, prefix, "edge", s.edge);
  read_field(j, prefix, "cavity_count", s.cavity_count);
  const auto read_range = [&](const char* key, auto& range) {
    const auto it = j.find(key);
    if (it == j.end()) return;
    const std::string full = join_key(prefix, key);
    if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number() || !(*it)[1].is_number()) {
      throw ConfigError(full, "expected a [min, max] pair of numbers");
    }
    using V = std::decay_t<decltype(range.first)>;
    if constexpr (std::is_integral_v<V>) {
      if (!(*it)[0].is_number_unsigned() || !(*it)[1].is_number_unsigned()) {
        throw ConfigError(full, "expected non-negative integers");
      }
    }
    range = {(*it)[0].template get<V>(), (*it)[1].template get<V>()};
  };
  read_range("blob_count_range", s.blob_count_range);
  read_range("blob_sigma_range", s.blob_sigma_range);
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(prefix, e.what());
  }
  return s;
}

}  // namespace pcsa::detail
