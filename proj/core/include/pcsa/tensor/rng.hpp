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

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace pcsa {

/// Counter-based generator: every draw is a pure function of (key, counter).
///
///   mix(z)        = splitmix64 finalizer
///   bits(counter) = mix(key + (counter + 1) * 0x9E3779B97F4A7C15)
///   uniform       = (bits >> 11) * 2^-53              in [0, 1)
///   normal(i)     = Box-Muller on uniforms at counters 2i, 2i+1
///
/// Sub-streams derive a new key from (key, stream id) with the same mix, so
/// results never depend on draw order or on a platform's std:: engines.
class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t key) : key_(mix(key ^ 0x6A09E667F3BCC909ull)) {}

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// 64-bit FNV-1a, used to turn names into stream ids.
  static constexpr std::uint64_t hash(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (char c : s) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001B3ull;
    }
    return h;
  }

  constexpr std::uint64_t key() const { return key_; }

  constexpr std::uint64_t bits(std::uint64_t counter) const {
    return mix(key_ + (counter + 1) * 0x9E3779B97F4A7C15ull);
  }

  constexpr double uniform(std::uint64_t counter) const {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }
  constexpr double uniform(std::uint64_t counter, double lo, double hi) const {
    return lo + (hi - lo) * uniform(counter);
  }
  /// Integer uniform on [lo, hi] inclusive.
  constexpr std::int64_t uniform_int(std::uint64_t counter, std::int64_t lo, std::int64_t hi) const {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(bits(counter) % span);
  }

  double normal(std::uint64_t i) const {
    const double u1 = 1.0 - uniform(2 * i);  // (0, 1]
    const double u2 = uniform(2 * i + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  constexpr CounterRng stream(std::uint64_t id) const { return CounterRng(key_, mix(key_ ^ mix(id))); }
  constexpr CounterRng stream(std::string_view name) const { return stream(hash(name)); }

 private:
  constexpr CounterRng(std::uint64_t, std::uint64_t derived) : key_(derived) {}
  std::uint64_t key_;
};

}  // namespace pcsa
