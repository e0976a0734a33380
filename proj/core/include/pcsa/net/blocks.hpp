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

#include <string>
#include <vector>

#include "pcsa/attention/attention.hpp"
#include "pcsa/net/config.hpp"

namespace pcsa::net {

template <typename T>
struct ConvParams {
  Parameter<T>* weight = nullptr;
  Parameter<T>* bias = nullptr;

  /// He-initialised (out, in, k, k, k) weight and zero bias.
  static ConvParams create(ParameterStore<T>& store, const std::string& prefix,
                           std::size_t in_channels, std::size_t out_channels, std::size_t kernel);
  /// (in, out, 3, 3, 3) weight for transposed_conv3d.
  static ConvParams create_transposed(ParameterStore<T>& store, const std::string& prefix,
                                      std::size_t in_channels, std::size_t out_channels);
};

template <typename T>
Var<T> conv(const Var<T>& x, const ConvParams<T>& p, ops::ConvOptions opt, bool trainable);

template <typename T>
struct PyramidParams {
  std::vector<ConvParams<T>> branches;
  /// One set per branch, or empty when channel attention is disabled.
  std::vector<attention::ChannelAttentionParams<T>> attention;
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;

  static PyramidParams create(ParameterStore<T>& store, const std::string& prefix,
                              std::size_t in_channels, const PyramidSpec& spec,
                              bool channel_attention, std::size_t ca_reduction,
                              bool ca_inner_sigmoid);
};

/// Branch convs + ReLU, grouped channel-attention weighting and concat, at
/// the input resolution.
template <typename T>
Var<T> pcca_features(const Var<T>& x, const PyramidParams<T>& p, bool trainable = true);

/// pcca_features followed by the 2x max pool.
template <typename T>
Var<T> pcca_block(const Var<T>& x, const PyramidParams<T>& p, bool trainable = true);

template <typename T>
struct ResidualParams {
  ConvParams<T> first;
  ConvParams<T> second;
  static ResidualParams create(ParameterStore<T>& store, const std::string& prefix,
                               std::size_t channels);
};

/// x + conv(relu(conv(x))), both 3^3 `same`.
template <typename T>
Var<T> residual_block(const Var<T>& x, const ResidualParams<T>& p, bool trainable = true);

}  // namespace pcsa::net
