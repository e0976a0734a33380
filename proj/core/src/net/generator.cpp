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

#include "pcsa/net/generator.hpp"

#include "pcsa/tensor/rng.hpp"

namespace pcsa::net {

using namespace pcsa::ops;

template <typename T>
Generator<T>::Generator(GeneratorConfig config, std::uint64_t seed)
    : config_(std::move(config)), store_(seed) {
  config_.validate();
  if (config_.kind == GeneratorKind::kIdentity) return;

  const auto& c = config_;
  pcca_[0] = PyramidParams<T>::create(store_, "generator.pcca1", 1, c.pcca[0], c.channel_attention,
                                      c.ca_reduction, c.ca_inner_sigmoid);
  pcca_[1] = PyramidParams<T>::create(store_, "generator.pcca2", pcca_[0].out_channels, c.pcca[1],
                                      c.channel_attention, c.ca_reduction, c.ca_inner_sigmoid);
  const std::size_t deep_c = c.deep_stage.total_filters();
  deep_ = ConvParams<T>::create(store_, "generator.deep", pcca_[1].out_channels, deep_c,
                                c.deep_stage.branches.front().kernel);
  residual_ = ResidualParams<T>::create(store_, "generator.residual", deep_c);
  if (c.self_attention) {
    sa_ = attention::SelfAttentionParams<T>::create(store_, "generator.sa",
                                                    stage_channels(c.sa_stage), c.sa_patch_edge);
  }
  const std::array<std::size_t, 3> outs = {pcca_[1].out_channels, pcca_[0].out_channels,
                                           c.head_channels};
  for (std::size_t s = 0; s < 3; ++s) {
    const std::string prefix = "generator.up" + std::to_string(s + 1);
    up_[s].deconv = ConvParams<T>::create_transposed(store_, prefix + ".deconv", stage_channels(s), outs[s]);
    if (c.trilinear_detail) {
      up_[s].detail = ConvParams<T>::create(store_, prefix + ".detail", stage_channels(s), outs[s], 1);
    }
  }
  const std::size_t head_in = c.head_channels + (c.skip_connections ? pcca_[0].out_channels : 0);
  head_ = ConvParams<T>::create(store_, "generator.head", head_in, 1, 1);
  head_.bias->value[0] = static_cast<T>(c.output_bias);
}

template <typename T>
std::size_t Generator<T>::stage_channels(std::size_t stage) const {
  const auto& c = config_;
  const std::size_t c1 = c.pcca[0].total_filters();
  const std::size_t c2 = c.pcca[1].total_filters();
  switch (stage) {
    case 0: return c.deep_stage.total_filters();
    case 1: return c2 + (c.skip_connections ? c2 : 0);
    default: return c1 + (c.skip_connections ? c2 : 0);
  }
}

template <typename T>
Var<T> Generator<T>::forward(const Var<T>& x, bool trainable) const {
  const Shape s = x.shape();
  if (s.channels != 1) throw ShapeError("generator expects a single-channel input, got " + s.str());
  if (s.depth % 8 || s.height % 8 || s.width % 8) {
    throw ShapeError("generator input extents must be divisible by 8, got " + s.str());
  }
  if (config_.kind == GeneratorKind::kIdentity) return x;

  // f1 (S) and f2 (S/2) are the pre-pool block features; e* are the pooled
  // or strided maps feeding the next stage.
  const Var<T> f1 = pcca_features(x, pcca_[0], trainable);
  const Var<T> e1 = max_pool3d(f1);
  const Var<T> f2 = pcca_features(e1, pcca_[1], trainable);
  const Var<T> e2 = max_pool3d(f2);
  const Var<T> e3 = relu(conv(e2, deep_, {.stride = 2}, trainable));
  Var<T> h = residual_block(e3, residual_, trainable);

  const std::array<Var<T>, 3> skips = {e2, f2, f1};
  Tape<T>& tape = x.tape();
  for (std::size_t stage = 0; stage < 3; ++stage) {
    if (sa_ && config_.sa_stage == stage) h = attention::self_attention(h, *sa_, trainable);
    const UpStage& up = up_[stage];
    Var<T> u = transposed_conv3d(h, tape.parameter(*up.deconv.weight, trainable),
                                 tape.parameter(*up.deconv.bias, trainable));
    if (up.detail) u = u + trilinear_upsample(conv(h, *up.detail, {}, trainable));
    u = relu(u);
    if (config_.skip_connections) {
      const std::array<Var<T>, 2> parts = {u, skips[stage]};
      h = concat_channels<T>(parts);
    } else {
      h = u;
    }
  }
  return sigmoid(conv(h, head_, {}, trainable));
}

template <typename T>
std::uint64_t Generator<T>::fingerprint() const {
  return CounterRng::hash(config_.describe() + "|" + std::to_string(store_.fingerprint()));
}

template <typename T>
Discriminator<T>::Discriminator(DiscriminatorConfig config, std::uint64_t seed)
    : config_(std::move(config)), store_(seed) {
  config_.validate();
  std::size_t in = config_.conditional ? 2 : 1;
  for (std::size_t l = 0; l < 4; ++l) {
    const std::size_t out = config_.channel_ladder[l];
    const std::string prefix = "discriminator.layer" + std::to_string(l + 1);
    layers_[l].conv = ConvParams<T>::create(store_, prefix + ".conv", in, out, config_.kernel_edge);
    if (l + 1 >= config_.residual_from_layer && in != out) {
      layers_[l].shortcut = ConvParams<T>::create(store_, prefix + ".shortcut", in, out, 1);
    }
    in = out;
  }
  fc_ = ConvParams<T>::create(store_, "discriminator.fc", in, 1, 1);
}

template <typename T>
Var<T> Discriminator<T>::forward(const Var<T>& v, bool trainable) const {
  const Shape s = v.shape();
  const std::size_t expect = config_.conditional ? 2 : 1;
  if (s.channels != expect) {
    throw ShapeError("discriminator expects " + std::to_string(expect) + " channel(s), got " + s.str());
  }
  if (s.depth % 16 || s.height % 16 || s.width % 16) {
    throw ShapeError("discriminator input extents must be divisible by 16, got " + s.str());
  }
  Var<T> h = v;
  for (std::size_t l = 0; l < 4; ++l) {
    const Layer& layer = layers_[l];
    Var<T> y = relu(conv(h, layer.conv, {}, trainable));
    if (layer.shortcut) {
      y = y + conv(h, *layer.shortcut, {}, trainable);
    } else if (l + 1 >= config_.residual_from_layer) {
      y = y + h;
    }
    h = max_pool3d(y);
  }
  Tape<T>& tape = v.tape();
  return fully_connected(global_avg_pool(h), tape.parameter(*fc_.weight, trainable),
                         tape.parameter(*fc_.bias, trainable));
}

template <typename T>
std::uint64_t Discriminator<T>::fingerprint() const {
  return CounterRng::hash(config_.describe() + "|" + std::to_string(store_.fingerprint()));
}

template class Generator<float>;
template class Generator<double>;
template class Discriminator<float>;
template class Discriminator<double>;

}  // namespace pcsa::net
