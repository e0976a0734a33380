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
#include <vector>

#include "pcsa/tensor/tape.hpp"

/// Differentiable volume operations. Every op reads its inputs from the tape,
/// appends one node and, when any input requires a gradient, registers the
/// matching backward rule. Implemented for float and double.
namespace pcsa::ops {

enum class Padding { kSame, kValid };

struct ConvOptions {
  std::size_t stride = 1;
  Padding padding = Padding::kSame;
};

// ---- convolution family -------------------------------------------------

/// weight (O, I, k, k, k), bias (1, O, 1, 1, 1). Stride 1 or 2. `same` is
/// zero padding producing ceil(extent / stride) outputs per axis.
template <typename T>
Var<T> conv3d(const Var<T>& x, const Var<T>& weight, const Var<T>& bias, ConvOptions opt = {});

/// Stride-2 3x3x3 transposed convolution; each spatial extent doubles.
/// weight (I, O, 3, 3, 3) is shared with the stride-2 `same` conv3d it is
/// the adjoint of; bias (1, O, 1, 1, 1).
template <typename T>
Var<T> transposed_conv3d(const Var<T>& x, const Var<T>& weight, const Var<T>& bias);

/// Affine map over the flattened (C, D, H, W) item. weight (out, in, 1, 1, 1),
/// bias (1, out, 1, 1, 1); output (N, out, 1, 1, 1).
template <typename T>
Var<T> fully_connected(const Var<T>& x, const Var<T>& weight, const Var<T>& bias);

// ---- pooling / resampling -------------------------------------------------

/// 2x2x2 window, stride 2. Ties resolve to the first voxel in scan order.
template <typename T>
Var<T> max_pool3d(const Var<T>& x);

/// Non-overlapping mean over window^3 blocks; trailing voxels that do not
/// fill a block are dropped.
template <typename T>
Var<T> avg_pool3d(const Var<T>& x, std::size_t window);

template <typename T>
Var<T> global_avg_pool(const Var<T>& x);
template <typename T>
Var<T> global_max_pool(const Var<T>& x);

/// x2 trilinear, align_corners = false, edge-clamped.
template <typename T>
Var<T> trilinear_upsample(const Var<T>& x);

/// Replicates each voxel into a factor^3 block.
template <typename T>
Var<T> nearest_upsample(const Var<T>& x, std::size_t factor);

/// Separable window filter with `valid` extent; the window is the outer
/// product of `kernel` along the three spatial axes.
template <typename T>
Var<T> window_filter(const Var<T>& x, const std::vector<T>& kernel);

// ---- activations ------------------------------------------------------------

template <typename T>
Var<T> relu(const Var<T>& x);
template <typename T>
Var<T> sigmoid(const Var<T>& x);
/// log(1 + e^x) in overflow-safe form.
template <typename T>
Var<T> softplus(const Var<T>& x);
/// Softmax across channels at every (batch, voxel) site.
template <typename T>
Var<T> softmax_channels(const Var<T>& x);

template <typename T>
Var<T> abs(const Var<T>& x);
template <typename T>
Var<T> square(const Var<T>& x);
/// max(x, 0)^p. p == 1 is the identity (negative values pass through).
template <typename T>
Var<T> pospow(const Var<T>& x, double p);
/// sqrt(max(x, 0)).
template <typename T>
Var<T> sqrt_pos(const Var<T>& x);

template <typename T>
Var<T> scale(const Var<T>& x, double a);
template <typename T>
Var<T> add_scalar(const Var<T>& x, double c);

// ---- broadcasting binary ----------------------------------------------------
// Each axis of either operand must equal the other's or be 1.

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b);
template <typename T>
Var<T> sub(const Var<T>& a, const Var<T>& b);
template <typename T>
Var<T> mul(const Var<T>& a, const Var<T>& b);
template <typename T>
Var<T> div(const Var<T>& a, const Var<T>& b);

// ---- structure --------------------------------------------------------------

template <typename T>
Var<T> concat_channels(std::span<const Var<T>> parts);
template <typename T>
Var<T> slice_channels(const Var<T>& x, std::size_t begin, std::size_t count);

// ---- reductions -------------------------------------------------------------

template <typename T>
Var<T> sum(const Var<T>& x);
template <typename T>
Var<T> mean(const Var<T>& x);
/// Mean over (C, D, H, W) for each batch item -> (N, 1, 1, 1, 1).
template <typename T>
Var<T> item_mean(const Var<T>& x);

// ---- attention --------------------------------------------------------------

/// Single-head scaled dot-product attention over voxel tokens. q, k, v share
/// shape (N, C, D, H, W); the D*H*W sites are tokens with C features.
/// out[:, i] = sum_j softmax_j(q_i . k_j / sqrt(C)) v[:, j].
template <typename T>
Var<T> token_attention(const Var<T>& q, const Var<T>& k, const Var<T>& v);

/// Row-stochastic attention matrix of token_attention for batch item n,
/// row-major tokens x tokens. Not recorded on the tape.
template <typename T>
std::vector<T> attention_weights(const Volume<T>& q, const Volume<T>& k, std::size_t n);

/// Copy of the value as a constant on the same tape; blocks gradient flow.
template <typename T>
Var<T> detach(const Var<T>& x) {
  return x.tape().constant(x.value());
}

// Operator sugar for graph code.
template <typename T>
Var<T> operator+(const Var<T>& a, const Var<T>& b) { return add(a, b); }
template <typename T>
Var<T> operator-(const Var<T>& a, const Var<T>& b) { return sub(a, b); }
template <typename T>
Var<T> operator*(const Var<T>& a, const Var<T>& b) { return mul(a, b); }
template <typename T>
Var<T> operator/(const Var<T>& a, const Var<T>& b) { return div(a, b); }

}  // namespace pcsa::ops

namespace pcsa::debug {

/// Multiplies conv3d weight gradients by (1 + factor). Zero in normal
/// operation; selfcheck fault-injection tests set it to prove the gradient
/// suite notices a broken backward.
void set_conv_backward_perturbation(double factor);
double conv_backward_perturbation();

}  // namespace pcsa::debug
