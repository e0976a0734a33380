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

#include <cstddef>
#include <vector>

#include "pcsa/tensor/ops.hpp"

namespace pcsa::metrics {

enum class WindowKind { kGaussian, kUniform };

/// Exponents for one scale. `alpha` (luminance) is only used at the coarsest
/// scale.
struct ScaleExponents {
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 1.0;
  bool operator==(const ScaleExponents&) const = default;
};

struct SSIMConfig {
  std::size_t window_edge = 11;
  WindowKind window_kind = WindowKind::kGaussian;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double data_range = 1.0;
  /// One entry per scale; the scale count M is its size.
  std::vector<ScaleExponents> scale_exponents = {ScaleExponents{}};
  /// Shrink the window to the largest odd edge that fits the coarsest scale
  /// instead of failing.
  bool auto_window = true;

  /// Single scale, unit exponents.
  static SSIMConfig single_scale();
  /// Three scales with beta = (0.0448, 0.2856, 0.3001), gamma_j = beta_j and
  /// alpha_M = beta_M.
  static SSIMConfig multi_scale();

  std::size_t scales() const { return scale_exponents.size(); }
  double c1() const { return (k1 * data_range) * (k1 * data_range); }
  double c2() const { return (k2 * data_range) * (k2 * data_range); }
  double c3() const { return c2() / 2.0; }

  void validate() const;
  /// Window edge used for volumes of this shape. Throws ShapeError when even
  /// a 1-voxel window cannot serve every scale, or when auto_window is off
  /// and window_edge does not fit.
  std::size_t effective_window(const Shape& shape) const;
  /// Normalised 1-D window of the given edge; the 3-D window is its outer
  /// product.
  std::vector<double> kernel(std::size_t edge) const;

  bool operator==(const SSIMConfig&) const = default;
};

/// Differentiable MS-SSIM per batch item, shape (N, 1, 1, 1, 1):
///   prod_{j<M} mean_w(c_j^beta_j s_j^gamma_j) * mean_w(l_M^alpha_M c_M^beta_M s_M^gamma_M)
/// where mean_w averages over all valid window positions and each scale
/// after the first is a 2x average pool of the previous one. Fractional
/// powers of negative terms are clamped to 0. With one scale this is SSIM.
template <typename T>
Var<T> ms_ssim_per_item(const Var<T>& x, const Var<T>& y, const SSIMConfig& cfg);

/// Batch mean of ms_ssim_per_item.
template <typename T>
Var<T> ms_ssim(const Var<T>& x, const Var<T>& y, const SSIMConfig& cfg);

}  // namespace pcsa::metrics
