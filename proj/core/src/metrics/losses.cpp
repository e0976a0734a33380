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

#include "pcsa/metrics/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace pcsa::metrics {

using namespace pcsa::ops;

void LossWeights::validate() const {
  for (double w : {alpha, beta, gamma}) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("loss weights must be finite and >= 0");
  }
  if (alpha == 0.0 && beta == 0.0 && gamma == 0.0) {
    throw std::invalid_argument("loss weights must not all be zero");
  }
}

template <typename T>
Var<T> l1_loss(const Var<T>& fake, const Var<T>& real) {
  if (!(fake.shape() == real.shape())) {
    throw ShapeError("l1_loss: shape mismatch " + fake.shape().str() + " vs " + real.shape().str());
  }
  return mean(abs(fake - real));
}

template <typename T>
Var<T> msssim_loss(const Var<T>& fake, const Var<T>& real, const SSIMConfig& cfg) {
  return add_scalar(scale(ms_ssim(fake, real, cfg), -1.0), 1.0);
}

template <typename T>
Var<T> discriminator_loss(const Var<T>& d_real, const Var<T>& d_fake) {
  return mean(softplus(scale(d_real, -1.0))) + mean(softplus(d_fake));
}

template <typename T>
Var<T> generator_adversarial_loss(const Var<T>& d_fake) {
  return mean(softplus(scale(d_fake, -1.0)));
}

template <typename T>
AdversarialLosses<T> adversarial_losses(const Var<T>& d_real, const Var<T>& d_fake) {
  return {discriminator_loss(d_real, d_fake), generator_adversarial_loss(d_fake)};
}

template <typename T>
Var<T> joint_generator_loss(const LossWeights& w, const Var<T>& adv, const Var<T>& l1,
                            const Var<T>& structural) {
  Var<T> total;
  bool have = false;
  const auto accumulate = [&](double weight, const Var<T>& term) {
    if (weight == 0.0) return;
    const Var<T> scaled = scale(term, weight);
    total = have ? total + scaled : scaled;
    have = true;
  };
  accumulate(w.alpha, adv);
  accumulate(w.beta, l1);
  accumulate(w.gamma, structural);
  if (!have) return scale(adv, 0.0);
  return total;
}

#define PCSA_INSTANTIATE(T)                                                                  \
  template Var<T> l1_loss<T>(const Var<T>&, const Var<T>&);                                  \
  template Var<T> msssim_loss<T>(const Var<T>&, const Var<T>&, const SSIMConfig&);          \
  template Var<T> discriminator_loss<T>(const Var<T>&, const Var<T>&);                       \
  template Var<T> generator_adversarial_loss<T>(const Var<T>&);                              \
  template AdversarialLosses<T> adversarial_losses<T>(const Var<T>&, const Var<T>&);         \
  template Var<T> joint_generator_loss<T>(const LossWeights&, const Var<T>&, const Var<T>&, \
                                          const Var<T>&);
PCSA_INSTANTIATE(float)
PCSA_INSTANTIATE(double)
#undef PCSA_INSTANTIATE

}  // namespace pcsa::metrics
