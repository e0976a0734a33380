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

// Internal helpers shared by the op translation units.

#include <Eigen/Core>

#include <cstddef>

#include "pcsa/tensor/tape.hpp"

namespace pcsa::ops::detail {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using StridedMap = Eigen::Map<RowMat<T>, 0, Eigen::OuterStride<>>;
template <typename T>
using ConstStridedMap = Eigen::Map<const RowMat<T>, 0, Eigen::OuterStride<>>;

/// Sliding-window geometry of one cubic-kernel convolution.
struct ConvGeometry {
  std::size_t in_d, in_h, in_w;
  std::size_t out_d, out_h, out_w;
  std::size_t kernel, stride;
  std::ptrdiff_t pad_d, pad_h, pad_w;  // leading zero padding

  std::size_t in_spatial() const { return in_d * in_h * in_w; }
  std::size_t out_plane() const { return out_h * out_w; }
  std::size_t out_spatial() const { return out_d * out_h * out_w; }
};

ConvGeometry same_geometry(const Shape& in, std::size_t kernel, std::size_t stride);
ConvGeometry valid_geometry(const Shape& in, std::size_t kernel, std::size_t stride);

/// Output depth planes per im2col chunk so a chunk holds at most ~4M values.
std::size_t planes_per_chunk(const ConvGeometry& g, std::size_t rows);

/// cols (channels*k^3, planes*out_plane) for output depth planes [od0, od1).
template <typename T>
void im2col(const T* x, std::size_t channels, const ConvGeometry& g, std::size_t od0,
            std::size_t od1, T* cols);

/// Adjoint of im2col: accumulates cols back into x.
template <typename T>
void col2im(const T* cols, std::size_t channels, const ConvGeometry& g, std::size_t od0,
            std::size_t od1, T* x);

/// Adds src into the gradient buffer of `id` if that node wants gradients.
template <typename T>
inline bool wants_grad(const Tape<T>& tape, NodeId id) {
  return tape.requires_grad(id);
}

}  // namespace pcsa::ops::detail
