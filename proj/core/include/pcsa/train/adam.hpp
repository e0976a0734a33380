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

#include <cstdint>
#include <span>
#include <vector>

#include "pcsa/tensor/parameter_store.hpp"

namespace pcsa::train {

struct AdamHyper {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// One bias-corrected Adam update at step t (t >= 1, already incremented):
///   m <- b1 m + (1 - b1) g;  v <- b2 v + (1 - b2) g^2
///   theta <- theta - lr * (m / (1 - b1^t)) / (sqrt(v / (1 - b2^t)) + eps)
void adam_update(std::span<float> theta, std::span<const float> grad, std::span<float> m,
                 std::span<float> v, std::uint64_t t, const AdamHyper& h);

/// Moment buffers for every parameter of a store, in store order.
struct AdamState {
  std::vector<Volume<float>> m;
  std::vector<Volume<float>> v;
  std::uint64_t t = 0;
  bool operator==(const AdamState&) const = default;
};

class Adam {
 public:
  Adam(ParameterStore<float>& params, AdamHyper hyper);

  /// Applies the accumulated Parameter::grad of every parameter.
  void step();
  AdamState& state() { return state_; }
  const AdamState& state() const { return state_; }
  const AdamHyper& hyper() const { return hyper_; }

 private:
  ParameterStore<float>* params_;
  AdamHyper hyper_;
  AdamState state_;
};

}  // namespace pcsa::train
