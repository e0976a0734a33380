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

#include "pcsa/attention/attention.hpp"

#include <vector>

namespace pcsa::attention {

using namespace pcsa::ops;

template <typename T>
ChannelAttentionParams<T> ChannelAttentionParams<T>::create(ParameterStore<T>& store,
                                                            const std::string& prefix,
                                                            std::size_t channels,
                                                            std::size_t reduction_ratio,
                                                            bool inner_sigmoid) {
  if (channels == 0) throw ShapeError("channel attention needs at least one channel");
  ChannelAttentionParams p;
  p.channels = channels;
  p.hidden = hidden_units(channels, reduction_ratio);
  p.inner_sigmoid = inner_sigmoid;
  const std::size_t c = channels, h = p.hidden;
  p.w1 = &store.add(prefix + ".w1", Shape{h, c, 1, 1, 1}, Init::kHeNormal, c);
  p.b1 = &store.add(prefix + ".b1", Shape{1, h, 1, 1, 1}, Init::kZero);
  p.w2 = &store.add(prefix + ".w2", Shape{c, h, 1, 1, 1}, Init::kHeNormal, h);
  p.b2 = &store.add(prefix + ".b2", Shape{1, c, 1, 1, 1}, Init::kZero);
  p.w3 = &store.add(prefix + ".w3", Shape{h, c, 1, 1, 1}, Init::kHeNormal, c);
  p.b3 = &store.add(prefix + ".b3", Shape{1, h, 1, 1, 1}, Init::kZero);
  p.w4 = &store.add(prefix + ".w4", Shape{c, h, 1, 1, 1}, Init::kHeNormal, h);
  p.b4 = &store.add(prefix + ".b4", Shape{1, c, 1, 1, 1}, Init::kZero);
  return p;
}

template <typename T>
SelfAttentionParams<T> SelfAttentionParams<T>::create(ParameterStore<T>& store,
                                                      const std::string& prefix,
                                                      std::size_t channels,
                                                      std::size_t patch_edge) {
  if (patch_edge == 0) throw ShapeError("self attention patch edge must be >= 1");
  SelfAttentionParams p;
  p.channels = channels;
  p.patch_edge = patch_edge;
  const Shape proj{channels, channels, 1, 1, 1};
  const Shape bias{1, channels, 1, 1, 1};
  p.wq = &store.add(prefix + ".wq", proj, Init::kHeNormal, channels);
  p.bq = &store.add(prefix + ".bq", bias, Init::kZero);
  p.wk = &store.add(prefix + ".wk", proj, Init::kHeNormal, channels);
  p.bk = &store.add(prefix + ".bk", bias, Init::kZero);
  p.wv = &store.add(prefix + ".wv", proj, Init::kHeNormal, channels);
  p.bv = &store.add(prefix + ".bv", bias, Init::kZero);
  p.gamma = &store.add(prefix + ".gamma", Shape{}, Init::kZero);
  return p;
}

template <typename T>
Var<T> channel_attention(const Var<T>& x, const ChannelAttentionParams<T>& p, bool trainable) {
  if (x.shape().channels != p.channels) {
    throw ShapeError("channel_attention: input " + x.shape().str() + " but parameters for " +
                     std::to_string(p.channels) + " channels");
  }
  Tape<T>& tape = x.tape();
  auto bind = [&](Parameter<T>* q) { return tape.parameter(*q, trainable); };
  const Var<T> avg = global_avg_pool(x);
  const Var<T> mx = global_max_pool(x);
  const Var<T> a = fully_connected(relu(fully_connected(avg, bind(p.w1), bind(p.b1))), bind(p.w2), bind(p.b2));
  const Var<T> m = fully_connected(relu(fully_connected(mx, bind(p.w3), bind(p.b3))), bind(p.w4), bind(p.b4));
  const Var<T> logits = a + m;
  return p.inner_sigmoid ? sigmoid(logits) : logits;
}

template <typename T>
Var<T> grouped_attention_weighting(std::span<const Var<T>> groups,
                                   std::span<const ChannelAttentionParams<T>> params,
                                   bool trainable) {
  if (groups.empty()) throw ShapeError("grouped_attention_weighting: empty group list");
  if (groups.size() != params.size()) {
    throw ShapeError("grouped_attention_weighting: " + std::to_string(groups.size()) +
                     " groups but " + std::to_string(params.size()) + " parameter sets");
  }
  std::vector<Var<T>> weighted;
  weighted.reserve(groups.size());
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const Var<T> att = softmax_channels(channel_attention(groups[i], params[i], trainable));
    weighted.push_back(groups[i] * att);
  }
  return concat_channels<T>(weighted);
}

template <typename T>
Var<T> self_attention(const Var<T>& x, const SelfAttentionParams<T>& p, bool trainable) {
  const Shape s = x.shape();
  const std::size_t e = p.patch_edge;
  if (s.channels != p.channels) {
    throw ShapeError("self_attention: input " + s.str() + " but parameters for " +
                     std::to_string(p.channels) + " channels");
  }
  if (s.depth % e || s.height % e || s.width % e) {
    throw ShapeError("self_attention: patch edge " + std::to_string(e) +
                     " does not divide spatial extents of " + s.str());
  }
  Tape<T>& tape = x.tape();
  auto bind = [&](Parameter<T>* q) { return tape.parameter(*q, trainable); };
  const Var<T> tokens = e == 1 ? x : avg_pool3d(x, e);
  const Var<T> q = conv3d(tokens, bind(p.wq), bind(p.bq));
  const Var<T> k = conv3d(tokens, bind(p.wk), bind(p.bk));
  const Var<T> v = conv3d(tokens, bind(p.wv), bind(p.bv));
  const Var<T> attended = token_attention(q, k, v);
  const Var<T> broadcast = e == 1 ? attended : nearest_upsample(attended, e);
  return x + bind(p.gamma) * broadcast;
}

#define PCSA_INSTANTIATE(T)                                                                   \
  template struct ChannelAttentionParams<T>;                                                 \
  template struct SelfAttentionParams<T>;                                                    \
  template Var<T> channel_attention<T>(const Var<T>&, const ChannelAttentionParams<T>&, bool); \
  template Var<T> grouped_attention_weighting<T>(std::span<const Var<T>>,                    \
                                                 std::span<const ChannelAttentionParams<T>>, bool); \
  template Var<T> self_attention<T>(const Var<T>&, const SelfAttentionParams<T>&, bool);
PCSA_INSTANTIATE(float)
PCSA_INSTANTIATE(double)
#undef PCSA_INSTANTIATE

}  // namespace pcsa::attention
