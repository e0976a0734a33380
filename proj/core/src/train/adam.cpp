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

#include "pcsa/train/adam.hpp"

#include <cmath>

namespace pcsa::train {

void adam_update(std::span<float> theta, std::span<const float> grad, std::span<float> m,
                 std::span<float> v, std::uint64_t t, const AdamHyper& h) {
  if (grad.size() != theta.size() || m.size() != theta.size() || v.size() != theta.size()) {
    throw ShapeError("adam_update: parameter, gradient and moment sizes differ");
  }
  if (t == 0) throw std::invalid_argument("adam_update: step counter must be >= 1");
  const double td = static_cast<double>(t);
  const double c1 = 1.0 - std::pow(h.beta1, td);
  const double c2 = 1.0 - std::pow(h.beta2, td);
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double g = grad[i];
    const double mi = h.beta1 * m[i] + (1.0 - h.beta1) * g;
    const double vi = h.beta2 * v[i] + (1.0 - h.beta2) * g * g;
    m[i] = static_cast<float>(mi);
    v[i] = static_cast<float>(vi);
    theta[i] = static_cast<float>(theta[i] - h.lr * (mi / c1) / (std::sqrt(vi / c2) + h.epsilon));
  }
}

Adam::Adam(ParameterStore<float>& params, AdamHyper hyper) : params_(&params), hyper_(hyper) {
  for (const auto& p : params) {
    state_.m.emplace_back(p.value.shape());
    state_.v.emplace_back(p.value.shape());
  }
}

void Adam::step() {
  ++state_.t;
  std::size_t i = 0;
  for (auto& p : *params_) {
    adam_update(p.value.data(), p.grad.data(), state_.m[i].data(), state_.v[i].data(), state_.t, hyper_);
    ++i;
  }
}

}  // namespace pcsa::train
