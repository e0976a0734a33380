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
#include <map>
#include <string>
#include <vector>

#include "pcsa/data/dataset.hpp"
#include "pcsa/metrics/losses.hpp"
#include "pcsa/net/config.hpp"

namespace pcsa::train {

struct TrainConfig {
  double lr_generator = 1e-4;
  double lr_discriminator = 4e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t batch_size = 4;
  /// Total optimisation steps (one step = d_steps_per_g_step D updates + one G update).
  std::uint64_t steps = 300;
  std::size_t d_steps_per_g_step = 1;
  std::uint64_t seed = 7;
  /// 0 disables periodic checkpoints; the final checkpoint is always written.
  std::uint64_t checkpoint_interval = 100;
  /// Validation runs every val_interval steps and after the last step; 0 means
  /// only after the last step.
  std::uint64_t val_interval = 50;
  /// Validate on the first val_limit pairs of the val split; 0 = all.
  std::size_t val_limit = 0;

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

/// How the dataset section describes splits: either explicit seed lists or
/// counts assigned consecutive seeds from base_seed.
struct DatasetSection {
  std::size_t train = 200;
  std::size_t val = 20;
  std::size_t test = 20;
  std::uint64_t base_seed = 1000;
  std::map<std::string, std::vector<std::uint64_t>> splits;

  data::DatasetManifest manifest(const data::SyntheticSpec& spec) const;
  bool operator==(const DatasetSection&) const = default;
};

struct RunConfig {
  TrainConfig train;
  net::GeneratorConfig generator;
  net::Variant variant = net::Variant::kFull;
  net::DiscriminatorConfig discriminator;
  metrics::LossWeights loss_weights;
  /// Structural term of the generator loss.
  metrics::SSIMConfig ssim = metrics::SSIMConfig::multi_scale();
  /// SSIM reported by validation and evaluation.
  metrics::SSIMConfig eval_ssim = metrics::SSIMConfig::single_scale();
  data::SyntheticSpec synthetic;
  DatasetSection dataset;

  /// Strict JSON parse: every field optional, unknown keys raise ConfigError
  /// naming the dotted key. The variant is applied to the generator section.
  static RunConfig parse(std::string_view json_text);
  /// Fully resolved document; parse(to_json()) == *this.
  std::string to_json() const;
  void validate() const;
  bool operator==(const RunConfig&) const = default;
};

}  // namespace pcsa::train
