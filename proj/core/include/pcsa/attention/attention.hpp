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

#include <span>
#include <string>

#include "pcsa/tensor/ops.hpp"
#include "pcsa/tensor/parameter_store.hpp"

namespace pcsa::attention {

/// Bottleneck width of the channel-attention MLPs: max(1, channels / ratio).
constexpr std::size_t hidden_units(std::size_t channels, std::size_t reduction_ratio) {
  return std::max<std::size_t>(1, channels / std::max<std::size_t>(1, reduction_ratio));
}

/// Two bottleneck MLPs, one fed by global average pooling (w1 -> w2) and one
/// by global max pooling (w3 -> w4).
template <typename T>
struct ChannelAttentionParams {
  Parameter<T>* w1 = nullptr;
  Parameter<T>* b1 = nullptr;
  Parameter<T>* w2 = nullptr;
  Parameter<T>* b2 = nullptr;
  Parameter<T>* w3 = nullptr;
  Parameter<T>* b3 = nullptr;
  Parameter<T>* w4 = nullptr;
  Parameter<T>* b4 = nullptr;
  std::size_t channels = 0;
  std::size_t hidden = 0;
  /// Apply the sigmoid gate inside CA. Disabling it leaves the raw logits
  /// for the group softmax.
  bool inner_sigmoid = true;

  static ChannelAttentionParams create(ParameterStore<T>& store, const std::string& prefix,
                                       std::size_t channels, std::size_t reduction_ratio = 4,
                                       bool inner_sigmoid = true);
};

/// Patch self-attention: Q/K/V are 1x1x1 projections of patch-mean tokens,
/// gamma is a learned scalar residual gate initialised to 0.
template <typename T>
struct SelfAttentionParams {
  Parameter<T>* wq = nullptr;
  Parameter<T>* bq = nullptr;
  Parameter<T>* wk = nullptr;
  Parameter<T>* bk = nullptr;
  Parameter<T>* wv = nullptr;
  Parameter<T>* bv = nullptr;
  Parameter<T>* gamma = nullptr;
  std::size_t channels = 0;
  std::size_t patch_edge = 1;

  static SelfAttentionParams create(ParameterStore<T>& store, const std::string& prefix,
                                    std::size_t channels, std::size_t patch_edge);
};

/// sigmoid(W2 relu(W1 GAP(x)) + W4 relu(W3 GMP(x))), shape (N, C, 1, 1, 1).
template <typename T>
Var<T> channel_attention(const Var<T>& x, const ChannelAttentionParams<T>& p, bool trainable = true);

/// For each group F_i: att_i = softmax over the group's channels of CA(F_i);
/// Y_i = F_i * att_i broadcast over space. Returns concat(Y_1 .. Y_n).
template <typename T>
Var<T> grouped_attention_weighting(std::span<const Var<T>> groups,
                                   std::span<const ChannelAttentionParams<T>> params,
                                   bool trainable = true);

/// x + gamma * broadcast(attention over patch tokens). patch_edge must divide
/// every spatial extent of x.
template <typename T>
Var<T> self_attention(const Var<T>& x, const SelfAttentionParams<T>& p, bool trainable = true);

}  // namespace pcsa::attention
