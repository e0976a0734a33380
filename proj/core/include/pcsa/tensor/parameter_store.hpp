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
#include <deque>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pcsa/tensor/rng.hpp"
#include "pcsa/tensor/tape.hpp"

namespace pcsa {

enum class Init {
  kZero,
  kHeNormal,  // N(0, 2 / fan_in)
};

/// Owns the named parameters of one network. Addresses are stable for the
/// store's lifetime. Initial values depend only on (seed, name, index), so
/// the same config always yields the same weights regardless of build order.
template <typename T>
class ParameterStore {
 public:
  explicit ParameterStore(std::uint64_t seed = 0) : seed_(seed) {}
  ParameterStore(const ParameterStore&) = delete;
  ParameterStore& operator=(const ParameterStore&) = delete;
  ParameterStore(ParameterStore&&) = default;
  ParameterStore& operator=(ParameterStore&&) = default;

  Parameter<T>& add(std::string name, const Shape& shape, Init init, std::size_t fan_in = 1) {
    if (find(name)) throw std::invalid_argument("duplicate parameter name: " + name);
    Volume<T> v(shape);
    if (init == Init::kHeNormal) {
      const CounterRng rng = CounterRng(seed_).stream(name);
      const double stddev = std::sqrt(2.0 / static_cast<double>(std::max<std::size_t>(fan_in, 1)));
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<T>(stddev * rng.normal(i));
    }
    params_.emplace_back(std::move(name), std::move(v));
    return params_.back();
  }

  Parameter<T>* find(std::string_view name) {
    for (auto& p : params_)
      if (p.name == name) return &p;
    return nullptr;
  }
  const Parameter<T>* find(std::string_view name) const {
    for (const auto& p : params_)
      if (p.name == name) return &p;
    return nullptr;
  }
  Parameter<T>& at(std::string_view name) {
    if (auto* p = find(name)) return *p;
    throw std::out_of_range("no parameter named " + std::string(name));
  }

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }
  std::size_t size() const { return params_.size(); }

  std::size_t element_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p.value.size();
    return n;
  }

  void zero_grad() {
    for (auto& p : params_) p.zero_grad();
  }

  /// (name, shape) pairs in creation order.
  std::vector<std::pair<std::string, Shape>> manifest() const {
    std::vector<std::pair<std::string, Shape>> out;
    for (const auto& p : params_) out.emplace_back(p.name, p.value.shape());
    return out;
  }

  /// FNV-1a over the manifest; changes whenever a name or shape changes.
  std::uint64_t fingerprint() const {
    std::string text;
    for (const auto& [name, s] : manifest()) text += name + s.str() + ";";
    return CounterRng::hash(text);
  }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::deque<Parameter<T>> params_;
};

}  // namespace pcsa
