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


#include <cmath>
#include <numeric>
#include <vector>

#include "pcsa/attention/attention.hpp"
#include "test_util.hpp"

namespace pcsa::attention {
namespace {

using namespace pcsa::ops;
using pcsa::testing::max_abs_diff;
using pcsa::testing::random_volume;

double sigmoid_ref(double z) { return 1.0 / (1.0 + std::exp(-z)); }

void fill(Parameter<double>* p, std::uint64_t seed, double scale = 1.0) {
  p->value = random_volume<double>(p->value.shape(), seed, -scale, scale);
}

void zero(ChannelAttentionParams<double>& p) {
  for (auto* q : {p.w1, p.b1, p.w2, p.b2, p.w3, p.b3, p.w4, p.b4}) q->value = Volume<double>(q->value.shape());
}

// W (out, in) times vector plus bias.
std::vector<double> affine(const Parameter<double>& w, const Parameter<double>& b, const std::vector<double>& x) {
  const std::size_t out = w.value.shape().batch, in = w.value.shape().channels;
  std::vector<double> y(out);
  for (std::size_t o = 0; o < out; ++o) {
    y[o] = b.value[o];
    for (std::size_t i = 0; i < in; ++i) y[o] += w.value[o * in + i] * x[i];
  }
  return y;
}

std::vector<double> relu_ref(std::vector<double> v) {
  for (double& x : v) x = std::max(x, 0.0);
  return v;
}

TEST(HiddenUnits, BottleneckNeverEmpty) {
  EXPECT_EQ(hidden_units(4, 4), 1u);
  EXPECT_EQ(hidden_units(3, 4), 1u);
  EXPECT_EQ(hidden_units(96, 4), 24u);
  EXPECT_EQ(hidden_units(5, 0), 5u);
}

TEST(ChannelAttention, ParameterShapesChain) {
  ParameterStore<double> store(1);
  const auto p = ChannelAttentionParams<double>::create(store, "ca", 12, 4);
  EXPECT_EQ(p.hidden, 3u);
  EXPECT_EQ(p.w1->value.shape(), (Shape{3, 12, 1, 1, 1}));
  EXPECT_EQ(p.w2->value.shape(), (Shape{12, 3, 1, 1, 1}));
  EXPECT_EQ(p.w3->value.shape(), p.w1->value.shape());
  EXPECT_EQ(p.w4->value.shape(), p.w2->value.shape());
  EXPECT_EQ(store.size(), 8u);
}

TEST(ChannelAttention, ZeroInputGivesHalf) {
  ParameterStore<double> store(2);
  const auto p = ChannelAttentionParams<double>::create(store, "ca", 5, 4);
  Tape<double> tape;
  const auto y = channel_attention(tape.constant(Volume<double>({2, 5, 3, 3, 3})), p);
  ASSERT_EQ(y.shape(), (Shape{2, 5, 1, 1, 1}));
  for (double v : y.value().data()) EXPECT_EQ(v, 0.5);
}

TEST(ChannelAttention, ConstantInputMatchesHandEvaluation) {
  ParameterStore<double> store(3);
  auto p = ChannelAttentionParams<double>::create(store, "ca", 6, 2);
  std::uint64_t seed = 10;
  for (auto* q : {p.w1, p.b1, p.w2, p.b2, p.w3, p.b3, p.w4, p.b4}) fill(q, seed++);
  const std::vector<double> c = {0.3, -0.7, 1.1, 0.0, 0.25, -0.4};
  Volume<double> x({1, 6, 2, 3, 2});
  for (std::size_t ch = 0; ch < 6; ++ch)
    for (std::size_t s = 0; s < 12; ++s) x[ch * 12 + s] = c[ch];
  Tape<double> tape;
  const auto got = channel_attention(tape.constant(x), p).value();
  // GAP and GMP both equal the constant vector.
  const auto a = affine(*p.w2, *p.b2, relu_ref(affine(*p.w1, *p.b1, c)));
  const auto m = affine(*p.w4, *p.b4, relu_ref(affine(*p.w3, *p.b3, c)));
  for (std::size_t ch = 0; ch < 6; ++ch) EXPECT_NEAR(got[ch], sigmoid_ref(a[ch] + m[ch]), 1e-14);
}

TEST(ChannelAttention, OutputsStrictlyInsideUnitInterval) {
  ParameterStore<double> store(4);
  const auto p = ChannelAttentionParams<double>::create(store, "ca", 8, 4);
  Tape<double> tape;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto y = channel_attention(tape.constant(random_volume<double>({2, 8, 4, 4, 4}, seed, -5, 5)), p);
    for (double v : y.value().data()) {
      EXPECT_GT(v, 0.0);
      EXPECT_LT(v, 1.0);
    }
  }
}

TEST(ChannelAttention, RejectsChannelMismatch) {
  ParameterStore<double> store(5);
  const auto p = ChannelAttentionParams<double>::create(store, "ca", 4);
  Tape<double> tape;
  EXPECT_THROW(channel_attention(tape.constant(Volume<double>({1, 3, 2, 2, 2})), p), ShapeError);
}

TEST(GroupedWeighting, UniformAttentionDividesByGroupWidth) {
  ParameterStore<double> store(6);
  std::vector<ChannelAttentionParams<double>> params = {
      ChannelAttentionParams<double>::create(store, "g0", 4),
      ChannelAttentionParams<double>::create(store, "g1", 2)};
  for (auto& p : params) zero(p);
  Tape<double> tape;
  const auto f0 = random_volume<double>({1, 4, 3, 3, 3}, 1);
  const auto f1 = random_volume<double>({1, 2, 3, 3, 3}, 2);
  const std::vector<Var<double>> groups = {tape.constant(f0), tape.constant(f1)};
  const auto y = grouped_attention_weighting<double>(groups, params).value();
  ASSERT_EQ(y.shape(), (Shape{1, 6, 3, 3, 3}));
  for (std::size_t i = 0; i < f0.size(); ++i) EXPECT_NEAR(y[i], f0[i] / 4.0, 1e-15);
  for (std::size_t i = 0; i < f1.size(); ++i) EXPECT_NEAR(y[f0.size() + i], f1[i] / 2.0, 1e-15);
}

TEST(GroupedWeighting, SingletonGroupIsIdentity) {
  ParameterStore<double> store(7);
  std::vector<ChannelAttentionParams<double>> params = {ChannelAttentionParams<double>::create(store, "g", 1)};
  Tape<double> tape;
  const auto f = random_volume<double>({2, 1, 4, 4, 4}, 3);
  const std::vector<Var<double>> groups = {tape.constant(f)};
  EXPECT_EQ(grouped_attention_weighting<double>(groups, params).value(), f);
}

TEST(GroupedWeighting, TwoChannelScalarSoftmax) {
  const double a = 0.8, b = -1.3;
  for (bool inner : {true, false}) {
    ParameterStore<double> store(8);
    std::vector<ChannelAttentionParams<double>> params = {
        ChannelAttentionParams<double>::create(store, "g", 2, 4, inner)};
    zero(params[0]);
    // Zero weights leave the logits equal to b2 + b4.
    params[0].b2->value[0] = a;
    params[0].b2->value[1] = b;
    Tape<double> tape;
    const auto f = random_volume<double>({1, 2, 2, 2, 2}, 4);
    const std::vector<Var<double>> groups = {tape.constant(f)};
    const auto y = grouped_attention_weighting<double>(groups, params).value();
    const double la = inner ? sigmoid_ref(a) : a;
    const double lb = inner ? sigmoid_ref(b) : b;
    const double wa = std::exp(la) / (std::exp(la) + std::exp(lb));
    for (std::size_t s = 0; s < 8; ++s) {
      EXPECT_NEAR(y[s], f[s] * wa, 1e-15);
      EXPECT_NEAR(y[8 + s], f[8 + s] * (1.0 - wa), 1e-15);
    }
  }
}

TEST(GroupedWeighting, GroupWeightsSumToOne) {
  ParameterStore<double> store(9);
  std::vector<ChannelAttentionParams<double>> params = {
      ChannelAttentionParams<double>::create(store, "g0", 3),
      ChannelAttentionParams<double>::create(store, "g1", 5)};
  std::uint64_t seed = 50;
  for (auto& p : params)
    for (auto* q : {p.b1, p.b2, p.b3, p.b4}) fill(q, seed++, 2.0);
  Tape<double> tape;
  // Features are ones after the attention logits are computed on random
  // inputs, so each output channel is exactly its attention weight.
  const std::vector<Shape> shapes = {{2, 3, 2, 2, 2}, {2, 5, 2, 2, 2}};
  for (std::size_t g = 0; g < 2; ++g) {
    const auto x = tape.constant(random_volume<double>(shapes[g], 60 + g));
    const auto att = softmax_channels(channel_attention(x, params[g])).value();
    for (std::size_t n = 0; n < 2; ++n) {
      double total = 0.0;
      for (std::size_t c = 0; c < shapes[g].channels; ++c) total += att[n * shapes[g].channels + c];
      EXPECT_NEAR(total, 1.0, 1e-6);
    }
  }
}

TEST(GroupedWeighting, RejectsEmptyAndMismatchedLists) {
  std::vector<Var<double>> none;
  std::vector<ChannelAttentionParams<double>> no_params;
  EXPECT_THROW(grouped_attention_weighting<double>(none, no_params), ShapeError);
  Tape<double> tape;
  std::vector<Var<double>> one = {tape.constant(Volume<double>({1, 1, 2, 2, 2}))};
  EXPECT_THROW(grouped_attention_weighting<double>(one, no_params), ShapeError);
}

TEST(SelfAttention, ZeroGammaIsExactIdentity) {
  for (std::size_t patch : {1u, 2u, 4u}) {
    ParameterStore<float> store(10);
    const auto p = SelfAttentionParams<float>::create(store, "sa", 3, patch);
    EXPECT_EQ(p.gamma->value[0], 0.0f);
    Tape<float> tape;
    const auto x = random_volume<float>({2, 3, 4, 4, 4}, 11, -10, 10);
    EXPECT_EQ(self_attention(tape.constant(x), p).value(), x);
  }
}

TEST(SelfAttention, SingleTokenBroadcastsValueProjection) {
  ParameterStore<double> store(12);
  auto p = SelfAttentionParams<double>::create(store, "sa", 2, 4);
  p.gamma->value[0] = 0.6;
  fill(p.bv, 13);
  const auto xv = random_volume<double>({1, 2, 4, 4, 4}, 14);
  Tape<double> tape;
  const auto y = self_attention(tape.constant(xv), p).value();
  std::vector<double> mean(2, 0.0);
  for (std::size_t c = 0; c < 2; ++c)
    for (std::size_t s = 0; s < 64; ++s) mean[c] += xv[c * 64 + s] / 64.0;
  const auto v = affine(*p.wv, *p.bv, mean);
  for (std::size_t c = 0; c < 2; ++c)
    for (std::size_t s = 0; s < 64; ++s) EXPECT_NEAR(y[c * 64 + s], xv[c * 64 + s] + 0.6 * v[c], 1e-13);
}

TEST(SelfAttention, TwoTokenClosedForm) {
  // Two tokens (1, C=2, 1, 1, 2) with identity projections.
  ParameterStore<double> store(15);
  auto p = SelfAttentionParams<double>::create(store, "sa", 2, 1);
  for (auto* w : {p.wq, p.wk, p.wv}) {
    w->value = Volume<double>(w->value.shape());
    w->value[0] = w->value[3] = 1.0;
  }
  p.gamma->value[0] = 1.0;
  const Volume<double> x({1, 2, 1, 1, 2}, std::vector<double>{0.5, -1.0, 2.0, 0.25});
  // token j has features (x[0 + j], x[2 + j]).
  const double t0[2] = {0.5, 2.0}, t1[2] = {-1.0, 0.25};
  auto score = [](const double* a, const double* b) { return (a[0] * b[0] + a[1] * b[1]) / std::sqrt(2.0); };
  const double w00 = 1.0 / (1.0 + std::exp(score(t0, t1) - score(t0, t0)));
  const double w10 = 1.0 / (1.0 + std::exp(score(t1, t1) - score(t1, t0)));
  const auto weights = attention_weights<double>(x, x, 0);
  ASSERT_EQ(weights.size(), 4u);
  EXPECT_NEAR(weights[0], w00, 1e-15);
  EXPECT_NEAR(weights[1], 1.0 - w00, 1e-15);
  EXPECT_NEAR(weights[2], w10, 1e-15);
  EXPECT_NEAR(weights[3], 1.0 - w10, 1e-15);

  Tape<double> tape;
  const auto y = self_attention(tape.constant(x), p).value();
  for (std::size_t c = 0; c < 2; ++c) {
    const double a0 = w00 * (c ? t0[1] : t0[0]) + (1 - w00) * (c ? t1[1] : t1[0]);
    const double a1 = w10 * (c ? t0[1] : t0[0]) + (1 - w10) * (c ? t1[1] : t1[0]);
    EXPECT_NEAR(y[c * 2 + 0], x[c * 2 + 0] + a0, 1e-14);
    EXPECT_NEAR(y[c * 2 + 1], x[c * 2 + 1] + a1, 1e-14);
  }
}

TEST(SelfAttention, RejectsIndivisiblePatchAndChannelMismatch) {
  ParameterStore<double> store(16);
  const auto p = SelfAttentionParams<double>::create(store, "sa", 2, 3);
  Tape<double> tape;
  EXPECT_THROW(self_attention(tape.constant(Volume<double>({1, 2, 4, 6, 6})), p), ShapeError);
  EXPECT_THROW(self_attention(tape.constant(Volume<double>({1, 3, 6, 6, 6})), p), ShapeError);
  EXPECT_THROW(SelfAttentionParams<double>::create(store, "zero", 2, 0), ShapeError);
}

TEST(TokenAttention, RowsAreStochastic) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto q = random_volume<double>({2, 4, 2, 3, 2}, seed, -3, 3);
    const auto k = random_volume<double>({2, 4, 2, 3, 2}, seed + 100, -3, 3);
    for (std::size_t n = 0; n < 2; ++n) {
      const auto w = attention_weights<double>(q, k, n);
      ASSERT_EQ(w.size(), 144u);
      for (std::size_t i = 0; i < 12; ++i) {
        const double row = std::accumulate(w.begin() + static_cast<long>(i * 12),
                                           w.begin() + static_cast<long>(i * 12 + 12), 0.0);
        EXPECT_NEAR(row, 1.0, 1e-6);
      }
    }
  }
}

TEST(TokenAttention, EquivariantUnderTokenPermutation) {
  const std::size_t tokens = 6, channels = 3;
  const Shape s{1, channels, 1, 1, tokens};
  const auto q = random_volume<double>(s, 1), k = random_volume<double>(s, 2), v = random_volume<double>(s, 3);
  const std::vector<std::size_t> perm = {4, 0, 5, 2, 1, 3};
  auto permute = [&](const Volume<double>& a) {
    Volume<double> b(s);
    for (std::size_t c = 0; c < channels; ++c)
      for (std::size_t t = 0; t < tokens; ++t) b[c * tokens + t] = a[c * tokens + perm[t]];
    return b;
  };
  Tape<double> tape;
  const auto out = token_attention(tape.constant(q), tape.constant(k), tape.constant(v)).value();
  const auto out_p =
      token_attention(tape.constant(permute(q)), tape.constant(permute(k)), tape.constant(permute(v))).value();
  EXPECT_LT(max_abs_diff(out_p, permute(out)), 1e-5);
}

}  // namespace
}  // namespace pcsa::attention
