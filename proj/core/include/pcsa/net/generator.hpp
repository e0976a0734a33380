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

#include <array>
#include <cstdint>
#include <optional>

#include "pcsa/net/blocks.hpp"

namespace pcsa::net {

/// Contraction: two PCCA blocks, a stride-2 conv stage and a residual block.
/// Expansion: optional self-attention, then three stride-2 deconvolutions
/// (each summed with a trilinear-upsampled 1x1x1 projection of its input),
/// optional skip concatenation, a 1x1x1 head and a final sigmoid.
template <typename T>
class Generator {
 public:
  Generator(GeneratorConfig config, std::uint64_t seed);

  /// x: (N, 1, S, S, S) with S divisible by 8. Output has the same shape,
  /// values in (0, 1).
  Var<T> forward(const Var<T>& x, bool trainable = true) const;

  const GeneratorConfig& config() const { return config_; }
  ParameterStore<T>& params() { return store_; }
  const ParameterStore<T>& params() const { return store_; }

  /// Hash of the config description and the parameter name/shape manifest.
  std::uint64_t fingerprint() const;

  /// Channels entering expansion stage s (0, 1, 2). With skips, each stage's
  /// output is concatenated with the contraction map of the same extent:
  /// pooled block-2 features, block-2 features, block-1 features.
  std::size_t stage_channels(std::size_t stage) const;

 private:
  struct UpStage {
    ConvParams<T> deconv;
    std::optional<ConvParams<T>> detail;
  };

  GeneratorConfig config_;
  ParameterStore<T> store_;
  std::array<PyramidParams<T>, 2> pcca_;
  ConvParams<T> deep_;
  ResidualParams<T> residual_;
  std::optional<attention::SelfAttentionParams<T>> sa_;
  std::array<UpStage, 3> up_;
  ConvParams<T> head_;
};

/// Four conv(3^3)+ReLU+maxpool layers with 1x1x1 projection shortcuts from
/// `residual_from_layer` on, global average pooling and an FC producing one
/// logit per batch item (no sigmoid).
template <typename T>
class Discriminator {
 public:
  Discriminator(DiscriminatorConfig config, std::uint64_t seed);

  /// v: (N, C, S, S, S), C = 1 (2 when conditional), S divisible by 16.
  /// Returns logits (N, 1, 1, 1, 1).
  Var<T> forward(const Var<T>& v, bool trainable = true) const;

  const DiscriminatorConfig& config() const { return config_; }
  ParameterStore<T>& params() { return store_; }
  const ParameterStore<T>& params() const { return store_; }
  std::uint64_t fingerprint() const;

 private:
  struct Layer {
    ConvParams<T> conv;
    std::optional<ConvParams<T>> shortcut;
  };

  DiscriminatorConfig config_;
  ParameterStore<T> store_;
  std::array<Layer, 4> layers_;
  ConvParams<T> fc_;
};

template <typename T>
Var<T> generator_forward(const Generator<T>& g, const Var<T>& x, bool trainable = true) {
  return g.forward(x, trainable);
}

template <typename T>
Var<T> discriminator_forward(const Discriminator<T>& d, const Var<T>& v, bool trainable = true) {
  return d.forward(v, trainable);
}

}  // namespace pcsa::net
