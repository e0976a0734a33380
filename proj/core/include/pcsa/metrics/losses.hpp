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

#include "pcsa/metrics/ssim.hpp"

namespace pcsa::metrics {

/// Weights of the generator objective alpha * adv + beta * l1 + gamma * structural.
struct LossWeights {
  double alpha = 1.0;
  double beta = 10.0;
  double gamma = 10.0;

  void validate() const;
  bool operator==(const LossWeights&) const = default;
};

/// Mean |fake - real| over every voxel of the batch.
template <typename T>
Var<T> l1_loss(const Var<T>& fake, const Var<T>& real);

/// 1 - ms_ssim(fake, real). With a single-scale config this is the SSIM loss.
template <typename T>
Var<T> msssim_loss(const Var<T>& fake, const Var<T>& real, const SSIMConfig& cfg);

template <typename T>
struct AdversarialLosses {
  Var<T> discriminator;  // mean softplus(-d_real) + mean softplus(d_fake)
  Var<T> generator;      // mean softplus(-d_fake)
};

/// Logit-stable GAN losses. The generator term uses the non-saturating form.
template <typename T>
AdversarialLosses<T> adversarial_losses(const Var<T>& d_real, const Var<T>& d_fake);

template <typename T>
Var<T> discriminator_loss(const Var<T>& d_real, const Var<T>& d_fake);
template <typename T>
Var<T> generator_adversarial_loss(const Var<T>& d_fake);

/// alpha * adv + beta * l1 + gamma * structural. Terms with zero weight are
/// left out of the graph.
template <typename T>
Var<T> joint_generator_loss(const LossWeights& w, const Var<T>& adv, const Var<T>& l1,
                            const Var<T>& structural);

}  // namespace pcsa::metrics
