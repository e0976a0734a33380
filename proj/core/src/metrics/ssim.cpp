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

#include "pcsa/metrics/ssim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace pcsa::metrics {

using namespace pcsa::ops;

SSIMConfig SSIMConfig::single_scale() { return SSIMConfig{}; }

SSIMConfig SSIMConfig::multi_scale() {
  SSIMConfig cfg;
  cfg.scale_exponents = {
      ScaleExponents{0.0448, 0.0448, 0.0448},
      ScaleExponents{0.2856, 0.2856, 0.2856},
      ScaleExponents{0.3001, 0.3001, 0.3001},
  };
  return cfg;
}

void SSIMConfig::validate() const {
  if (window_edge == 0 || window_edge % 2 == 0) {
    throw std::invalid_argument("ssim window edge must be odd, got " + std::to_string(window_edge));
  }
  if (scale_exponents.empty()) throw std::invalid_argument("ssim needs at least one scale");
  if (!(data_range > 0.0) || !std::isfinite(data_range)) {
    throw std::invalid_argument("ssim data_range must be positive");
  }
  if (!(k1 > 0.0) || !(k2 > 0.0)) throw std::invalid_argument("ssim k1 and k2 must be positive");
  if (window_kind == WindowKind::kGaussian && !(sigma > 0.0)) {
    throw std::invalid_argument("ssim gaussian sigma must be positive");
  }
  for (const auto& e : scale_exponents) {
    if (!std::isfinite(e.alpha) || !std::isfinite(e.beta) || !std::isfinite(e.gamma)) {
      throw std::invalid_argument("ssim exponents must be finite");
    }
  }
}

std::size_t SSIMConfig::effective_window(const Shape& shape) const {
  validate();
  std::size_t coarse = std::min({shape.depth, shape.height, shape.width});
  for (std::size_t j = 1; j < scales(); ++j) coarse /= 2;
  if (!auto_window) {
    if (window_edge > coarse) {
      throw ShapeError("ssim window " + std::to_string(window_edge) + " does not fit " +
                       std::to_string(scales()) + " scale(s) of " + shape.str());
    }
    return window_edge;
  }
  const std::size_t fit = coarse % 2 ? coarse : coarse - (coarse > 0);
  if (fit == 0) {
    throw ShapeError("volume " + shape.str() + " is too small for " + std::to_string(scales()) +
                     " ssim scale(s)");
  }
  return std::min(window_edge, fit);
}

std::vector<double> SSIMConfig::kernel(std::size_t edge) const {
  std::vector<double> k(edge, 1.0);
  if (window_kind == WindowKind::kGaussian) {
    const double c = (static_cast<double>(edge) - 1.0) / 2.0;
    for (std::size_t i = 0; i < edge; ++i) {
      const double d = static_cast<double>(i) - c;
      k[i] = std::exp(-d * d / (2.0 * sigma * sigma));
    }
  }
  double total = 0.0;
  for (double v : k) total += v;
  for (double& v : k) v /= total;
  return k;
}

template <typename T>
Var<T> ms_ssim_per_item(const Var<T>& x_in, const Var<T>& y_in, const SSIMConfig& cfg) {
  if (!(x_in.shape() == y_in.shape())) {
    throw ShapeError("ssim: shape mismatch " + x_in.shape().str() + " vs " + y_in.shape().str());
  }
  const std::size_t edge = cfg.effective_window(x_in.shape());
  const std::vector<double> kd = cfg.kernel(edge);
  const std::vector<T> k(kd.begin(), kd.end());
  const double c1 = cfg.c1();
  const double c2 = cfg.c2();
  const double c3 = cfg.c3();

  Var<T> x = x_in;
  Var<T> y = y_in;
  Var<T> result;
  const std::size_t m = cfg.scales();
  for (std::size_t j = 0; j < m; ++j) {
    if (j > 0) {
      x = avg_pool3d(x, 2);
      y = avg_pool3d(y, 2);
    }
    const ScaleExponents& e = cfg.scale_exponents[j];
    const Var<T> mx = window_filter(x, k);
    const Var<T> my = window_filter(y, k);
    const Var<T> mxx = mx * mx;
    const Var<T> myy = my * my;
    const Var<T> mxy = mx * my;
    const Var<T> vx = window_filter(x * x, k) - mxx;
    const Var<T> vy = window_filter(y * y, k) - myy;
    const Var<T> cxy = window_filter(x * y, k) - mxy;
    const Var<T> vsum = add_scalar(vx + vy, c2);

    Var<T> term;
    if (e.beta == e.gamma) {
      // With C3 = C2 / 2 the contrast and structure terms multiply out to
      // (2 cov + C2) / (var_x + var_y + C2).
      term = pospow(add_scalar(scale(cxy, 2.0), c2) / vsum, e.beta);
    } else {
      const Var<T> sxy = sqrt_pos(vx) * sqrt_pos(vy);
      const Var<T> c = add_scalar(scale(sxy, 2.0), c2) / vsum;
      const Var<T> s = add_scalar(cxy, c3) / add_scalar(sxy, c3);
      term = pospow(c, e.beta) * pospow(s, e.gamma);
    }
    if (j + 1 == m) {
      const Var<T> l = add_scalar(scale(mxy, 2.0), c1) / add_scalar(mxx + myy, c1);
      term = pospow(l, e.alpha) * term;
    }
    const Var<T> v = item_mean(term);
    result = j == 0 ? v : result * v;
  }
  return result;
}

template <typename T>
Var<T> ms_ssim(const Var<T>& x, const Var<T>& y, const SSIMConfig& cfg) {
  return mean(ms_ssim_per_item(x, y, cfg));
}

template Var<float> ms_ssim_per_item<float>(const Var<float>&, const Var<float>&, const SSIMConfig&);
template Var<double> ms_ssim_per_item<double>(const Var<double>&, const Var<double>&, const SSIMConfig&);
template Var<float> ms_ssim<float>(const Var<float>&, const Var<float>&, const SSIMConfig&);
template Var<double> ms_ssim<double>(const Var<double>&, const Var<double>&, const SSIMConfig&);

}  // namespace pcsa::metrics
