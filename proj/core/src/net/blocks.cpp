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

#include "pcsa/net/blocks.hpp"

namespace pcsa::net {

using namespace pcsa::ops;

template <typename T>
ConvParams<T> ConvParams<T>::create(ParameterStore<T>& store, const std::string& prefix,
                                    std::size_t in_channels, std::size_t out_channels,
                                    std::size_t kernel) {
  ConvParams p;
  p.weight = &store.add(prefix + ".weight", Shape{out_channels, in_channels, kernel, kernel, kernel},
                        Init::kHeNormal, in_channels * kernel * kernel * kernel);
  p.bias = &store.add(prefix + ".bias", Shape{1, out_channels, 1, 1, 1}, Init::kZero);
  return p;
}

template <typename T>
ConvParams<T> ConvParams<T>::create_transposed(ParameterStore<T>& store, const std::string& prefix,
                                               std::size_t in_channels, std::size_t out_channels) {
  ConvParams p;
  // Each output voxel of a stride-2 3^3 deconvolution receives on average
  // in_channels * 27 / 8 taps.
  p.weight = &store.add(prefix + ".weight", Shape{in_channels, out_channels, 3, 3, 3},
                        Init::kHeNormal, std::max<std::size_t>(1, in_channels * 27 / 8));
  p.bias = &store.add(prefix + ".bias", Shape{1, out_channels, 1, 1, 1}, Init::kZero);
  return p;
}

template <typename T>
Var<T> conv(const Var<T>& x, const ConvParams<T>& p, ConvOptions opt, bool trainable) {
  Tape<T>& tape = x.tape();
  return conv3d(x, tape.parameter(*p.weight, trainable), tape.parameter(*p.bias, trainable), opt);
}

template <typename T>
PyramidParams<T> PyramidParams<T>::create(ParameterStore<T>& store, const std::string& prefix,
                                          std::size_t in_channels, const PyramidSpec& spec,
                                          bool channel_attention, std::size_t ca_reduction,
                                          bool ca_inner_sigmoid) {
  spec.validate();
  PyramidParams p;
  p.in_channels = in_channels;
  p.out_channels = spec.total_filters();
  for (const auto& b : spec.branches) {
    const std::string name = prefix + ".k" + std::to_string(b.kernel);
    p.branches.push_back(ConvParams<T>::create(store, name, in_channels, b.filters, b.kernel));
    if (channel_attention) {
      p.attention.push_back(attention::ChannelAttentionParams<T>::create(
          store, name + ".ca", b.filters, ca_reduction, ca_inner_sigmoid));
    }
  }
  return p;
}

template <typename T>
Var<T> pcca_features(const Var<T>& x, const PyramidParams<T>& p, bool trainable) {
  std::vector<Var<T>> features;
  features.reserve(p.branches.size());
  for (const auto& b : p.branches) features.push_back(relu(conv(x, b, {}, trainable)));
  const Var<T> merged =
      p.attention.empty()
          ? (features.size() == 1 ? features.front() : concat_channels<T>(features))
          : attention::grouped_attention_weighting<T>(features, p.attention, trainable);
  return merged;
}

template <typename T>
Var<T> pcca_block(const Var<T>& x, const PyramidParams<T>& p, bool trainable) {
  const Shape s = x.shape();
  if (s.depth % 2 || s.height % 2 || s.width % 2) {
    throw ShapeError("pcca_block: spatial extents of " + s.str() + " must be even");
  }
  return max_pool3d(pcca_features(x, p, trainable));
}

template <typename T>
ResidualParams<T> ResidualParams<T>::create(ParameterStore<T>& store, const std::string& prefix,
                                            std::size_t channels) {
  return {ConvParams<T>::create(store, prefix + ".conv1", channels, channels, 3),
          ConvParams<T>::create(store, prefix + ".conv2", channels, channels, 3)};
}

template <typename T>
Var<T> residual_block(const Var<T>& x, const ResidualParams<T>& p, bool trainable) {
  return x + conv(relu(conv(x, p.first, {}, trainable)), p.second, {}, trainable);
}

#define PCSA_INSTANTIATE(T)                                                      \
  template struct ConvParams<T>;                                                \
  template struct PyramidParams<T>;                                             \
  template struct ResidualParams<T>;                                            \
  template Var<T> conv<T>(const Var<T>&, const ConvParams<T>&, ConvOptions, bool); \
  template Var<T> pcca_features<T>(const Var<T>&, const PyramidParams<T>&, bool); \
  template Var<T> pcca_block<T>(const Var<T>&, const PyramidParams<T>&, bool);  \
  template Var<T> residual_block<T>(const Var<T>&, const ResidualParams<T>&, bool);
PCSA_INSTANTIATE(float)
PCSA_INSTANTIATE(double)
#undef PCSA_INSTANTIATE

}  // namespace pcsa::net
