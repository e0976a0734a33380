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

#include "pcsa/tensor/gradcheck.hpp"
#include "pcsa/tensor/ops.hpp"
#include "pcsa/tensor/parameter_store.hpp"
#include "test_util.hpp"

namespace pcsa {
namespace {

using namespace pcsa::ops;
using pcsa::testing::dot;
using pcsa::testing::max_abs_diff;
using pcsa::testing::random_volume;

// Nested-loop convolution. `same` pads ((out - 1) * s + k - n) / 2 zeros in
// front of each axis, the remainder behind.
Volume<double> naive_conv(const Volume<double>& x, const Volume<double>& w, const Volume<double>& b,
                          std::size_t stride, bool same) {
  const Shape xs = x.shape();
  const Shape ws = w.shape();
  const std::size_t k = ws.depth;
  auto out_extent = [&](std::size_t n) { return same ? (n + stride - 1) / stride : (n - k) / stride + 1; };
  auto pad = [&](std::size_t n) -> long {
    if (!same) return 0;
    const long need = static_cast<long>((out_extent(n) - 1) * stride + k) - static_cast<long>(n);
    return std::max(need, 0L) / 2;
  };
  const Shape os{xs.batch, ws.batch, out_extent(xs.depth), out_extent(xs.height), out_extent(xs.width)};
  Volume<double> y(os);
  for (std::size_t n = 0; n < os.batch; ++n)
    for (std::size_t o = 0; o < os.channels; ++o)
      for (std::size_t d = 0; d < os.depth; ++d)
        for (std::size_t h = 0; h < os.height; ++h)
          for (std::size_t q = 0; q < os.width; ++q) {
            double acc = b[o];
            for (std::size_t i = 0; i < xs.channels; ++i)
              for (std::size_t a = 0; a < k; ++a)
                for (std::size_t c = 0; c < k; ++c)
                  for (std::size_t e = 0; e < k; ++e) {
                    const long id = static_cast<long>(d * stride + a) - pad(xs.depth);
                    const long ih = static_cast<long>(h * stride + c) - pad(xs.height);
                    const long iw = static_cast<long>(q * stride + e) - pad(xs.width);
                    if (id < 0 || ih < 0 || iw < 0 || id >= static_cast<long>(xs.depth) ||
                        ih >= static_cast<long>(xs.height) || iw >= static_cast<long>(xs.width)) {
                      continue;
                    }
                    acc += w.at(o, i, a, c, e) * x.at(n, i, static_cast<std::size_t>(id),
                                                      static_cast<std::size_t>(ih), static_cast<std::size_t>(iw));
                  }
            y.at(n, o, d, h, q) = acc;
          }
  return y;
}

Volume<double> run_conv(const Volume<double>& x, const Volume<double>& w, const Volume<double>& b,
                        ConvOptions opt) {
  Tape<double> tape;
  return conv3d(tape.constant(x), tape.constant(w), tape.constant(b), opt).value();
}

struct ConvCase {
  Shape input;
  std::size_t out_channels;
  std::size_t kernel;
  std::size_t stride;
  bool same;
};

class ConvOracleTest : public ::testing::TestWithParam<ConvCase> {};

TEST_P(ConvOracleTest, MatchesNestedLoops) {
  const ConvCase c = GetParam();
  const auto x = random_volume<double>(c.input, 1);
  const auto w = random_volume<double>({c.out_channels, c.input.channels, c.kernel, c.kernel, c.kernel}, 2);
  const auto b = random_volume<double>({1, c.out_channels, 1, 1, 1}, 3);
  const auto got = run_conv(x, w, b, {c.stride, c.same ? Padding::kSame : Padding::kValid});
  const auto want = naive_conv(x, w, b, c.stride, c.same);
  EXPECT_LT(max_abs_diff(got, want), 1e-12);
}

INSTANTIATE_TEST_SUITE_P(Shapes, ConvOracleTest,
                         ::testing::Values(ConvCase{{1, 1, 5, 5, 5}, 1, 3, 1, true},
                                           ConvCase{{2, 3, 6, 4, 5}, 2, 3, 1, true},
                                           ConvCase{{1, 2, 7, 7, 7}, 3, 5, 1, true},
                                           ConvCase{{1, 2, 8, 8, 8}, 2, 7, 1, true},
                                           ConvCase{{1, 2, 8, 6, 7}, 4, 3, 2, true},
                                           ConvCase{{2, 1, 5, 5, 5}, 2, 3, 2, true},
                                           ConvCase{{1, 2, 6, 6, 6}, 2, 3, 1, false},
                                           ConvCase{{1, 1, 9, 9, 9}, 1, 3, 2, false},
                                           ConvCase{{1, 4, 3, 3, 3}, 2, 1, 1, true}));

TEST(Conv3d, PointwiseUnitKernelCopiesInput) {
  const auto x = random_volume<double>({2, 1, 3, 4, 5}, 9);
  const auto y = run_conv(x, Volume<double>({1, 1, 1, 1, 1}, 1.0), Volume<double>({1, 1, 1, 1, 1}), {});
  EXPECT_EQ(y, x);
}

TEST(Conv3d, OnesKernelCountsInBoundsNeighbours) {
  const auto y = run_conv(Volume<double>({1, 1, 2, 2, 2}, 1.0), Volume<double>({1, 1, 3, 3, 3}, 1.0),
                          Volume<double>({1, 1, 1, 1, 1}), {});
  for (double v : y.data()) EXPECT_EQ(v, 8.0);
}

TEST(Conv3d, SameShapeContract) {
  Tape<float> tape;
  const auto y = conv3d(tape.constant(Volume<float>({1, 1, 16, 16, 16})),
                        tape.constant(Volume<float>({5, 1, 7, 7, 7})), tape.constant(Volume<float>({1, 5, 1, 1, 1})));
  EXPECT_EQ(y.shape(), (Shape{1, 5, 16, 16, 16}));
  const auto z = conv3d(tape.constant(Volume<float>({1, 1, 9, 8, 7})),
                        tape.constant(Volume<float>({2, 1, 3, 3, 3})), tape.constant(Volume<float>({1, 2, 1, 1, 1})),
                        {.stride = 2});
  EXPECT_EQ(z.shape(), (Shape{1, 2, 5, 4, 4}));
}

TEST(Conv3d, RejectsChannelMismatchAndSmallValidInput) {
  Tape<float> tape;
  const auto b = tape.constant(Volume<float>({1, 1, 1, 1, 1}));
  EXPECT_THROW(conv3d(tape.constant(Volume<float>({1, 2, 4, 4, 4})), tape.constant(Volume<float>({1, 1, 3, 3, 3})), b),
               ShapeError);
  EXPECT_THROW(conv3d(tape.constant(Volume<float>({1, 1, 2, 2, 2})), tape.constant(Volume<float>({1, 1, 3, 3, 3})), b,
                      {.padding = Padding::kValid}),
               ShapeError);
  EXPECT_THROW(conv3d(tape.constant(Volume<float>({1, 1, 4, 4, 4})), tape.constant(Volume<float>({1, 1, 3, 3, 3})), b,
                      {.stride = 3}),
               ShapeError);
}

TEST(Conv3d, IsLinearWithZeroBias) {
  const Shape s{1, 2, 6, 6, 6};
  const auto x = random_volume<double>(s, 11);
  const auto z = random_volume<double>(s, 12);
  const auto w = random_volume<double>({3, 2, 3, 3, 3}, 13);
  const Volume<double> b({1, 3, 1, 1, 1});
  const double a = 1.7, c = -0.6;
  Volume<double> mix(s);
  for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = a * x[i] + c * z[i];
  const auto lhs = run_conv(mix, w, b, {});
  const auto cx = run_conv(x, w, b, {});
  const auto cz = run_conv(z, w, b, {});
  Volume<double> rhs(lhs.shape());
  for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = a * cx[i] + c * cz[i];
  EXPECT_LT(max_abs_diff(lhs, rhs), 1e-5);
}

TEST(TransposedConv3d, DoublesExtentsAndZeroInputGivesBias) {
  Tape<double> tape;
  const auto b = random_volume<double>({1, 3, 1, 1, 1}, 4);
  const auto y = transposed_conv3d(tape.constant(Volume<double>({1, 2, 4, 4, 4})),
                                   tape.constant(random_volume<double>({2, 3, 3, 3, 3}, 5)), tape.constant(b));
  ASSERT_EQ(y.shape(), (Shape{1, 3, 8, 8, 8}));
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < 512; ++i) EXPECT_EQ(y.value()[c * 512 + i], b[c]);
}

TEST(TransposedConv3d, IsAdjointOfStridedConv) {
  // <conv_s2(x; w), y> = <x, tconv(y; w)> for every x, y when biases are zero.
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Shape xs{2, 3, 6, 8, 4};
    const auto x = random_volume<double>(xs, 100 + seed);
    const auto w = random_volume<double>({2, 3, 3, 3, 3}, 200 + seed);
    const auto y = random_volume<double>({2, 2, 3, 4, 2}, 300 + seed);
    const auto cx = run_conv(x, w, Volume<double>({1, 2, 1, 1, 1}), {.stride = 2});
    Tape<double> tape;
    const auto ty = transposed_conv3d(tape.constant(y), tape.constant(w), tape.constant(Volume<double>({1, 3, 1, 1, 1})));
    ASSERT_EQ(ty.shape(), xs);
    EXPECT_NEAR(dot(cx, y), dot(x, ty.value()), 1e-10);
  }
}

TEST(FullyConnected, HandMultiply) {
  Tape<double> tape;
  const auto x = tape.constant(Volume<double>({1, 2, 1, 1, 1}, std::vector<double>{1, 2}));
  const auto w = tape.constant(Volume<double>({2, 2, 1, 1, 1}, std::vector<double>{1, 1, 0, 1}));
  const auto y = fully_connected(x, w, tape.constant(Volume<double>({1, 2, 1, 1, 1})));
  EXPECT_EQ(y.value(), (Volume<double>({1, 2, 1, 1, 1}, std::vector<double>{3, 2})));
}

TEST(FullyConnected, IdentityAndZeroWeights) {
  Tape<double> tape;
  const auto xv = random_volume<double>({2, 3, 1, 1, 1}, 6);
  Volume<double> eye({3, 3, 1, 1, 1});
  for (std::size_t i = 0; i < 3; ++i) eye[i * 3 + i] = 1.0;
  const auto zero_b = tape.constant(Volume<double>({1, 3, 1, 1, 1}));
  EXPECT_EQ(fully_connected(tape.constant(xv), tape.constant(eye), zero_b).value(), xv);
  const Volume<double> bias({1, 3, 1, 1, 1}, std::vector<double>{0.5, -1, 2});
  const auto y = fully_connected(tape.constant(xv), tape.constant(Volume<double>({3, 3, 1, 1, 1})), tape.constant(bias));
  for (std::size_t n = 0; n < 2; ++n)
    for (std::size_t o = 0; o < 3; ++o) EXPECT_EQ(y.value().at(n, o, 0, 0, 0), bias[o]);
  EXPECT_THROW(fully_connected(tape.constant(xv), tape.constant(Volume<double>({3, 2, 1, 1, 1})), zero_b), ShapeError);
}

TEST(MaxPool3d, EnumeratedWindow) {
  Tape<double> tape;
  Volume<double> v({1, 1, 2, 2, 2});
  std::iota(v.data().begin(), v.data().end(), 1.0);
  const auto x = tape.variable(v);
  const auto y = max_pool3d(x);
  ASSERT_EQ(y.shape(), (Shape{1, 1, 1, 1, 1}));
  EXPECT_EQ(y.value()[0], 8.0);
  tape.backward(sum(y));
  const auto& g = *tape.grad(x);
  for (std::size_t i = 0; i < 7; ++i) EXPECT_EQ(g[i], 0.0);
  EXPECT_EQ(g[7], 1.0);
}

TEST(MaxPool3d, ConstantInputAndFirstIndexTieBreak) {
  Tape<double> tape;
  const auto x = tape.variable(Volume<double>({1, 2, 4, 4, 4}, 3.0));
  const auto y = max_pool3d(x);
  ASSERT_EQ(y.shape(), (Shape{1, 2, 2, 2, 2}));
  for (double v : y.value().data()) EXPECT_EQ(v, 3.0);
  tape.backward(sum(y));
  const auto& g = *tape.grad(x);
  // Every window's first voxel in scan order wins the tie.
  for (std::size_t c = 0; c < 2; ++c)
    for (std::size_t d = 0; d < 4; ++d)
      for (std::size_t h = 0; h < 4; ++h)
        for (std::size_t w = 0; w < 4; ++w) {
          const bool first = d % 2 == 0 && h % 2 == 0 && w % 2 == 0;
          EXPECT_EQ(g.at(0, c, d, h, w), first ? 1.0 : 0.0);
        }
}

TEST(MaxPool3d, RejectsOddExtent) {
  Tape<float> tape;
  EXPECT_THROW(max_pool3d(tape.constant(Volume<float>({1, 1, 3, 4, 4}))), ShapeError);
}

TEST(GlobalPools, SingleHotVoxel) {
  Tape<double> tape;
  Volume<double> v({1, 1, 4, 4, 4});
  v.at(0, 0, 1, 2, 3) = 5.0;
  const auto x = tape.constant(v);
  EXPECT_DOUBLE_EQ(global_avg_pool(x).value()[0], 5.0 / 64.0);
  EXPECT_EQ(global_max_pool(x).value()[0], 5.0);
  const auto c = tape.constant(Volume<double>({2, 3, 2, 3, 4}, -1.25));
  EXPECT_EQ(global_avg_pool(c).shape(), (Shape{2, 3, 1, 1, 1}));
  for (double g : global_avg_pool(c).value().data()) EXPECT_EQ(g, -1.25);
  for (double g : global_max_pool(c).value().data()) EXPECT_EQ(g, -1.25);
}

TEST(GlobalPools, AverageIsLinear) {
  Tape<double> tape;
  const auto v = random_volume<double>({2, 3, 4, 4, 4}, 8);
  const auto g = global_avg_pool(tape.constant(v)).value();
  const auto gs = global_avg_pool(scale(tape.constant(v), -2.5)).value();
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(gs[i], -2.5 * g[i], 1e-14);
}

TEST(Activations, ClosedForms) {
  Tape<double> tape;
  const auto z = tape.constant(Volume<double>::scalar(0.0));
  EXPECT_EQ(sigmoid(z).value()[0], 0.5);
  EXPECT_DOUBLE_EQ(softplus(z).value()[0], std::log(2.0));
  const auto big = tape.constant(Volume<double>({1, 1, 1, 1, 2}, std::vector<double>{800.0, -800.0}));
  EXPECT_DOUBLE_EQ(softplus(big).value()[0], 800.0);
  EXPECT_GE(softplus(big).value()[1], 0.0);
  EXPECT_TRUE(sigmoid(big).value().all_finite());
}

TEST(Activations, ReluGradientIsStepWithZeroAtOrigin) {
  Tape<double> tape;
  const auto x = tape.variable(Volume<double>({1, 1, 1, 1, 3}, std::vector<double>{-1.0, 0.0, 2.0}));
  tape.backward(sum(relu(x)));
  EXPECT_EQ(*tape.grad(x), (Volume<double>({1, 1, 1, 1, 3}, std::vector<double>{0, 0, 1})));
}

TEST(Activations, SigmoidGradient) {
  Tape<double> tape;
  const auto v = random_volume<double>({1, 1, 2, 2, 2}, 21, -4, 4);
  const auto x = tape.variable(v);
  tape.backward(sum(sigmoid(x)));
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double s = 1.0 / (1.0 + std::exp(-v[i]));
    EXPECT_NEAR((*tape.grad(x))[i], s * (1.0 - s), 1e-14);
  }
}

TEST(Softmax, UniformAndNormalised) {
  Tape<double> tape;
  const auto u = softmax_channels(tape.constant(Volume<double>({1, 6, 2, 2, 2}, 3.0))).value();
  for (double v : u.data()) EXPECT_DOUBLE_EQ(v, 1.0 / 6.0);
  const auto r = softmax_channels(tape.constant(random_volume<double>({2, 5, 3, 3, 3}, 31, -50, 50))).value();
  for (std::size_t n = 0; n < 2; ++n)
    for (std::size_t s = 0; s < 27; ++s) {
      double total = 0.0;
      for (std::size_t c = 0; c < 5; ++c) {
        const double v = r[(n * 5 + c) * 27 + s];
        EXPECT_GE(v, 0.0);
        total += v;
      }
      EXPECT_NEAR(total, 1.0, 1e-6);
    }
  const auto huge = softmax_channels(tape.constant(Volume<double>({1, 2, 1, 1, 1}, std::vector<double>{1e300, 1e300})));
  EXPECT_EQ(huge.value()[0], 0.5);
}

TEST(Pospow, UnitExponentPassesNegativesThrough) {
  Tape<double> tape;
  const Volume<double> v({1, 1, 1, 1, 3}, std::vector<double>{-0.5, 0.0, 2.0});
  EXPECT_EQ(pospow(tape.constant(v), 1.0).value(), v);
  const auto half = pospow(tape.constant(v), 0.5).value();
  EXPECT_EQ(half[0], 0.0);
  EXPECT_NEAR(half[2], std::sqrt(2.0), 1e-12);
}

TEST(TrilinearUpsample, ClosedFormWeights) {
  Tape<double> tape;
  const auto y = trilinear_upsample(tape.constant(Volume<double>({1, 1, 1, 1, 2}, std::vector<double>{0, 1}))).value();
  ASSERT_EQ(y.shape(), (Shape{1, 1, 2, 2, 4}));
  for (std::size_t d = 0; d < 2; ++d)
    for (std::size_t h = 0; h < 2; ++h) {
      EXPECT_DOUBLE_EQ(y.at(0, 0, d, h, 0), 0.0);
      EXPECT_DOUBLE_EQ(y.at(0, 0, d, h, 1), 0.25);
      EXPECT_DOUBLE_EQ(y.at(0, 0, d, h, 2), 0.75);
      EXPECT_DOUBLE_EQ(y.at(0, 0, d, h, 3), 1.0);
    }
}

TEST(TrilinearUpsample, ConstantAndMeanPreserving) {
  Tape<double> tape;
  const auto c = trilinear_upsample(tape.constant(Volume<double>({1, 2, 3, 3, 3}, 0.7))).value();
  for (double v : c.data()) EXPECT_NEAR(v, 0.7, 1e-15);
  // With edge clamping each input voxel's weights sum to 8 along the doubled
  // grid, so the mean is preserved exactly.
  const auto v = random_volume<double>({1, 1, 4, 5, 6}, 41);
  const auto up = trilinear_upsample(tape.constant(v)).value();
  const double in_mean = std::accumulate(v.data().begin(), v.data().end(), 0.0) / static_cast<double>(v.size());
  const double out_mean = std::accumulate(up.data().begin(), up.data().end(), 0.0) / static_cast<double>(up.size());
  EXPECT_NEAR(in_mean, out_mean, 1e-12);
}

TEST(NearestUpsample, ReplicatesBlocks) {
  Tape<double> tape;
  const auto v = random_volume<double>({1, 2, 2, 2, 2}, 43);
  const auto y = nearest_upsample(tape.constant(v), 3).value();
  ASSERT_EQ(y.shape(), (Shape{1, 2, 6, 6, 6}));
  for (std::size_t c = 0; c < 2; ++c)
    for (std::size_t d = 0; d < 6; ++d)
      for (std::size_t h = 0; h < 6; ++h)
        for (std::size_t w = 0; w < 6; ++w) EXPECT_EQ(y.at(0, c, d, h, w), v.at(0, c, d / 3, h / 3, w / 3));
}

TEST(Concat, ChannelCountsAndRoundTrip) {
  Tape<float> tape;
  const std::vector<Var<float>> parts = {tape.constant(random_volume<float>({2, 4, 3, 3, 3}, 1)),
                                         tape.constant(random_volume<float>({2, 8, 3, 3, 3}, 2)),
                                         tape.constant(random_volume<float>({2, 12, 3, 3, 3}, 3))};
  const auto cat = concat_channels<float>(parts);
  ASSERT_EQ(cat.shape(), (Shape{2, 24, 3, 3, 3}));
  EXPECT_EQ(slice_channels(cat, 0, 4).value(), parts[0].value());
  EXPECT_EQ(slice_channels(cat, 4, 8).value(), parts[1].value());
  EXPECT_EQ(slice_channels(cat, 12, 12).value(), parts[2].value());
  const std::vector<Var<float>> single = {parts[1]};
  EXPECT_EQ(concat_channels<float>(single).value(), parts[1].value());
  const std::vector<Var<float>> bad = {parts[0], tape.constant(Volume<float>({2, 1, 3, 3, 2}))};
  EXPECT_THROW(concat_channels<float>(bad), ShapeError);
}

TEST(Concat, BackwardSplitsGradient) {
  Tape<double> tape;
  const auto a = tape.variable(random_volume<double>({1, 2, 2, 2, 2}, 4));
  const auto b = tape.variable(random_volume<double>({1, 3, 2, 2, 2}, 5));
  const std::vector<Var<double>> parts = {a, b};
  const auto weights = random_volume<double>({1, 5, 2, 2, 2}, 6);
  tape.backward(sum(concat_channels<double>(parts) * tape.constant(weights)));
  for (std::size_t i = 0; i < 16; ++i) EXPECT_EQ((*tape.grad(a))[i], weights[i]);
  for (std::size_t i = 0; i < 24; ++i) EXPECT_EQ((*tape.grad(b))[i], weights[16 + i]);
}

TEST(Broadcast, ShapesAndErrors) {
  Tape<double> tape;
  const auto x = tape.constant(random_volume<double>({2, 3, 2, 2, 2}, 7));
  const auto g = tape.constant(random_volume<double>({2, 3, 1, 1, 1}, 8));
  const auto y = x * g;
  ASSERT_EQ(y.shape(), x.shape());
  for (std::size_t n = 0; n < 2; ++n)
    for (std::size_t c = 0; c < 3; ++c)
      for (std::size_t s = 0; s < 8; ++s)
        EXPECT_EQ(y.value()[(n * 3 + c) * 8 + s], x.value()[(n * 3 + c) * 8 + s] * g.value()[n * 3 + c]);
  EXPECT_THROW(x + tape.constant(Volume<double>({1, 2, 1, 1, 1})), ShapeError);
}

TEST(Backward, SumAndHalfMeanSquareClosedForms) {
  Tape<double> tape;
  const auto xv = random_volume<double>({1, 2, 3, 3, 3}, 51);
  const auto yv = random_volume<double>({1, 2, 3, 3, 3}, 52);
  const auto x = tape.variable(xv);
  tape.backward(sum(x));
  for (double g : tape.grad(x)->data()) EXPECT_EQ(g, 1.0);

  Tape<double> t2;
  const auto x2 = t2.variable(xv);
  t2.backward(scale(mean(square(x2 - t2.constant(yv))), 0.5));
  const double n = static_cast<double>(xv.size());
  for (std::size_t i = 0; i < xv.size(); ++i) EXPECT_NEAR((*t2.grad(x2))[i], (xv[i] - yv[i]) / n, 1e-15);
}

TEST(Backward, UnreachableParameterGetsZeroAndNonScalarThrows) {
  Parameter<double> used("used", random_volume<double>({1, 1, 2, 2, 2}, 1));
  Parameter<double> unused("unused", random_volume<double>({1, 1, 2, 2, 2}, 2));
  Tape<double> tape;
  const auto u = tape.parameter(used);
  tape.parameter(unused);
  tape.backward(sum(u));
  for (double g : used.grad.data()) EXPECT_EQ(g, 1.0);
  for (double g : unused.grad.data()) EXPECT_EQ(g, 0.0);
  EXPECT_THROW(tape.backward(u), ShapeError);
}

TEST(Backward, FrozenParameterIsConstant) {
  Parameter<double> p("p", Volume<double>({1, 1, 1, 1, 1}, 2.0));
  Tape<double> tape;
  const auto v = tape.parameter(p, false);
  EXPECT_FALSE(v.requires_grad());
  const auto x = tape.variable(Volume<double>::scalar(3.0));
  tape.backward(sum(v * x));
  EXPECT_EQ(p.grad[0], 0.0);
  EXPECT_EQ((*tape.grad(x))[0], 2.0);
}

TEST(Backward, DetachBlocksGradient) {
  Tape<double> tape;
  const auto x = tape.variable(Volume<double>::scalar(3.0));
  tape.backward(sum(x * detach(x)));
  EXPECT_EQ((*tape.grad(x))[0], 3.0);
}

TEST(GradientCheck, ConvPassesAndPerturbedBackwardFails) {
  Parameter<double> x("x", random_volume<double>({1, 2, 4, 4, 4}, 61));
  Parameter<double> w("w", random_volume<double>({2, 2, 3, 3, 3}, 62));
  Parameter<double> b("b", random_volume<double>({1, 2, 1, 1, 1}, 63));
  std::vector<Parameter<double>*> targets = {&x, &w, &b};
  const GraphBuilder build = [&](Tape<double>& t) {
    return conv3d(t.parameter(x), t.parameter(w), t.parameter(b));
  };
  const auto ok = gradient_check("conv3d", targets, build);
  EXPECT_TRUE(ok.passed) << ok.worst;
  EXPECT_LE(ok.max_rel_error, 1e-3);
  // 20 samples from each of x and w, both bias entries.
  EXPECT_EQ(ok.coordinates, 42u);

  debug::set_conv_backward_perturbation(0.05);
  const auto bad = gradient_check("conv3d", targets, build);
  debug::set_conv_backward_perturbation(0.0);
  EXPECT_FALSE(bad.passed);
  EXPECT_GT(bad.max_rel_error, 1e-2);
}

TEST(GradientCheck, ReluAwayFromZeroIsExact) {
  Volume<double> v = random_volume<double>({1, 1, 3, 3, 3}, 71, 0.2, 1.0);
  for (std::size_t i = 0; i < v.size(); i += 2) v[i] = -v[i];
  Parameter<double> x("x", v);
  std::vector<Parameter<double>*> targets = {&x};
  const auto r = gradient_check("relu", targets, [&](Tape<double>& t) { return relu(t.parameter(x)); });
  EXPECT_LT(r.max_rel_error, 1e-8);
}

TEST(GradientCheck, SoftmaxSquaredErrorComposite) {
  Parameter<double> logits("logits", random_volume<double>({2, 4, 2, 2, 2}, 81, -2, 2));
  Volume<double> onehot({2, 4, 2, 2, 2});
  for (std::size_t n = 0; n < 2; ++n)
    for (std::size_t s = 0; s < 8; ++s) onehot[(n * 4 + (s % 4)) * 8 + s] = 1.0;
  std::vector<Parameter<double>*> targets = {&logits};
  const auto r = gradient_check("softmax_sq", targets, [&](Tape<double>& t) {
    return mean(square(softmax_channels(t.parameter(logits)) - t.constant(onehot)));
  });
  EXPECT_TRUE(r.passed) << r.worst;
}

TEST(Determinism, ForwardIsBitIdentical) {
  auto run = [] {
    Tape<float> tape;
    const auto x = tape.constant(random_volume<float>({2, 3, 8, 8, 8}, 91));
    const auto w = tape.constant(random_volume<float>({4, 3, 3, 3, 3}, 92));
    const auto b = tape.constant(random_volume<float>({1, 4, 1, 1, 1}, 93));
    return trilinear_upsample(max_pool3d(relu(conv3d(x, w, b)))).value();
  };
  EXPECT_EQ(run(), run());
}

TEST(CounterRng, PureFunctionOfKeyAndCounter) {
  const CounterRng a(5), b(5), c(6);
  EXPECT_EQ(a.bits(17), b.bits(17));
  EXPECT_NE(a.bits(17), c.bits(17));
  EXPECT_EQ(a.stream("x").bits(0), b.stream("x").bits(0));
  EXPECT_NE(a.stream("x").bits(0), a.stream("y").bits(0));
  for (std::uint64_t i = 0; i < 1000; ++i) {
    const double u = a.uniform(i);
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    const auto k = a.uniform_int(i, -2, 3);
    EXPECT_GE(k, -2);
    EXPECT_LE(k, 3);
  }
  double m = 0.0, m2 = 0.0;
  const std::size_t n = 20000;
  for (std::size_t i = 0; i < n; ++i) {
    const double z = a.normal(i);
    m += z;
    m2 += z * z;
  }
  EXPECT_NEAR(m / n, 0.0, 0.03);
  EXPECT_NEAR(m2 / n, 1.0, 0.05);
}

TEST(ParameterStore, InitDependsOnlyOnSeedAndName) {
  ParameterStore<float> a(3), b(3), c(4);
  a.add("first", {2, 2, 3, 3, 3}, Init::kHeNormal, 54);
  a.add("second", {1, 2, 1, 1, 1}, Init::kZero);
  b.add("second", {1, 2, 1, 1, 1}, Init::kZero);
  b.add("first", {2, 2, 3, 3, 3}, Init::kHeNormal, 54);
  c.add("first", {2, 2, 3, 3, 3}, Init::kHeNormal, 54);
  EXPECT_EQ(a.at("first").value, b.at("first").value);
  EXPECT_NE(a.at("first").value, c.at("first").value);
  for (float v : a.at("second").value.data()) EXPECT_EQ(v, 0.0f);
  EXPECT_THROW(a.add("first", {1, 1, 1, 1, 1}, Init::kZero), std::invalid_argument);
  EXPECT_THROW(a.at("missing"), std::out_of_range);
  for (const auto& p : a) EXPECT_EQ(p.value.shape(), p.grad.shape());
}

TEST(ParameterStore, FingerprintTracksManifest) {
  ParameterStore<float> a(1), b(2), c(1);
  a.add("w", {2, 1, 3, 3, 3}, Init::kHeNormal, 27);
  b.add("w", {2, 1, 3, 3, 3}, Init::kHeNormal, 27);
  c.add("w", {3, 1, 3, 3, 3}, Init::kHeNormal, 27);
  EXPECT_EQ(a.fingerprint(), b.fingerprint());
  EXPECT_NE(a.fingerprint(), c.fingerprint());
}

TEST(Volume, ShapeContracts) {
  EXPECT_THROW(Volume<float>(Shape{1, 0, 1, 1, 1}), ShapeError);
  EXPECT_THROW(Volume<float>(Shape{1, 1, 2, 2, 2}, std::vector<float>(7)), ShapeError);
  const auto v = random_volume<float>({3, 2, 2, 2, 2}, 1);
  const std::vector<Volume<float>> items = {v.item(0), v.item(1), v.item(2)};
  EXPECT_EQ(stack_batch<float>(items), v);
}

}  // namespace
}  // namespace pcsa
