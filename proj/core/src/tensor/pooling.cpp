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

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "kernels.hpp"
#include "pcsa/tensor/ops.hpp"

namespace pcsa::ops {
namespace {

/// Per-axis linear interpolation taps for x2 upsampling, align_corners=false.
struct Taps {
  std::vector<std::size_t> lo, hi;
  std::vector<double> frac;  // weight of `hi`
};

Taps upsample_taps(std::size_t n) {
  Taps t;
  const std::size_t m = 2 * n;
  t.lo.resize(m);
  t.hi.resize(m);
  t.frac.resize(m);
  for (std::size_t o = 0; o < m; ++o) {
    const double src = std::max(0.0, (static_cast<double>(o) + 0.5) / 2.0 - 0.5);
    const auto i0 = std::min(static_cast<std::size_t>(std::floor(src)), n - 1);
    t.lo[o] = i0;
    t.hi[o] = std::min(i0 + 1, n - 1);
    t.frac[o] = src - static_cast<double>(i0);
  }
  return t;
}

}  // namespace

template <typename T>
Var<T> max_pool3d(const Var<T>& x) {
  const Shape xs = x.shape();
  if (xs.depth % 2 || xs.height % 2 || xs.width % 2) {
    throw ShapeError("max_pool3d: spatial extents must be even, got " + xs.str());
  }
  const Shape ys{xs.batch, xs.channels, xs.depth / 2, xs.height / 2, xs.width / 2};
  Volume<T> y(ys);
  auto argmax = std::make_shared<std::vector<std::size_t>>(ys.numel());
  const Volume<T>& xv = x.value();
  std::size_t out = 0;
  for (std::size_t nc = 0; nc < xs.batch * xs.channels; ++nc) {
    const std::size_t base = nc * xs.spatial();
    for (std::size_t d = 0; d < ys.depth; ++d)
      for (std::size_t h = 0; h < ys.height; ++h)
        for (std::size_t w = 0; w < ys.width; ++w, ++out) {
          std::size_t best = base + ((2 * d) * xs.height + 2 * h) * xs.width + 2 * w;
          T best_v = xv[best];
          for (std::size_t dd = 0; dd < 2; ++dd)
            for (std::size_t hh = 0; hh < 2; ++hh)
              for (std::size_t ww = 0; ww < 2; ++ww) {
                const std::size_t i =
                    base + ((2 * d + dd) * xs.height + 2 * h + hh) * xs.width + 2 * w + ww;
                if (xv[i] > best_v) {  // strict: first index wins ties
                  best_v = xv[i];
                  best = i;
                }
              }
          y[out] = best_v;
          (*argmax)[out] = best;
        }
  }
  const NodeId xi = x.id();
  return x.tape().record("max_pool3d", std::move(y), {xi}, [=](Tape<T>& tape, NodeId self) {
    if (!tape.requires_grad(xi)) return;
    const Volume<T>& gy = *tape.grad(self);
    Volume<T>& gx = tape.grad_mut(xi);
    for (std::size_t i = 0; i < gy.size(); ++i) gx[(*argmax)[i]] += gy[i];
  });
}

template <typename T>
Var<T> avg_pool3d(const Var<T>& x, std::size_t window) {
  const Shape xs = x.shape();
  if (window == 0 || xs.depth < window || xs.height < window || xs.width < window) {
    throw ShapeError("avg_pool3d: window " + std::to_string(window) + " exceeds " + xs.str());
  }
  const Shape ys{xs.batch, xs.channels, xs.depth / window, xs.height / window, xs.width / window};
  const T inv = T(1) / static_cast<T>(window * window * window);
  Volume<T> y(ys);
  const Volume<T>& xv = x.value();
  for (std::size_t nc = 0; nc < xs.batch * xs.channels; ++nc) {
    const T* xc = xv.raw() + nc * xs.spatial();
    T* yc = y.raw() + nc * ys.spatial();
    for (std::size_t d = 0; d < ys.depth * window; ++d)
      for (std::size_t h = 0; h < ys.height * window; ++h)
        for (std::size_t w = 0; w < ys.width * window; ++w)
          yc[((d / window) * ys.height + h / window) * ys.width + w / window] +=
              xc[(d * xs.height + h) * xs.width + w];
    for (std::size_t i = 0; i < ys.spatial(); ++i) yc[i] *= inv;
  }
  const NodeId xi = x.id();
  return x.tape().record("avg_pool3d", std::move(y), {xi}, [=](Tape<T>& tape, NodeId self) {
    if (!tape.requires_grad(xi)) return;
    const Volume<T>& gy = *tape.grad(self);
    Volume<T>& gx = tape.grad_mut(xi);
    for (std::size_t nc = 0; nc < xs.batch * xs.channels; ++nc) {
      const T* gc = gy.raw() + nc * ys.spatial();
      T* xc = gx.raw() + nc * xs.spatial();
      for (std::size_t d = 0; d < ys.depth * window; ++d)
        for (std::size_t h = 0; h < ys.height * window; ++h)
          for (std::size_t w = 0; w < ys.width * window; ++w)
            xc[(d * xs.height + h) * xs.width + w] +=
                inv * gc[((d / window) * ys.height + h / window) * ys.width + w / window];
    }
  });
}

template <typename T>
Var<T> global_avg_pool(const Var<T>& x) {
  const Shape xs = x.shape();
  const std::size_t sp = xs.spatial();
  Volume<T> y(Shape{xs.batch, xs.channels, 1, 1, 1});
  const Volume<T>& xv = x.value();
  for (std::size_t nc = 0; nc < xs.batch * xs.channels; ++nc) {
    double acc = 0;
    for (std::size_t i = 0; i < sp; ++i) acc += xv[nc * sp + i];
    y[nc] = static_cast<T>(acc / static_cast<double>(sp));
  }
  const NodeId xi = x.id();
  return x.tape().record("global_avg_pool", std::move(y), {xi}, [=](Tape<T>& tape, NodeId self) {
    if (!tape.requires_grad(xi)) return;
    const Volume<T>& gy = *tape.grad(self);
    Volume<T>& gx = tape.grad_mut(xi);
    const T inv = T(1) / static_cast<T>(sp);
    for (std::size_t nc = 0; nc < xs.batch * xs.channels; ++nc)
      for (std::size_t i = 0; i < sp; ++i) gx[nc * sp + i] += gy[nc] * inv;
  });
}

template <typename T>
Var<T> global_max_pool(const Var<T>& x) {
  const Shape xs = x.shape();
  const std::size_t sp = xs.spatial();
  Volume<T> y(Shape{xs.batch, xs.channels, 1, 1, 1});
  auto argmax = std::make_shared<std::vector<std::size_t>>(xs.batch * xs.channels);
  const Volume<T>& xv = x.value();
  for (std::size_t nc = 0; nc < xs.batch * xs.channels; ++nc) {
    std::size_t best = nc * sp;
    for (std::size_t i = 1; i < sp; ++i)
      if (xv[nc * sp + i] > xv[best]) best = nc * sp + i;
    y[nc] = xv[best];
    (*argmax)[nc] = best;
  }
  const NodeId xi = x.id();
  return x.tape().record("global_max_pool", std::move(y), {xi}, [=](Tape<T>& tape, NodeId self) {
    if (!tape.requires_grad(xi)) return;
    const Volume<T>& gy = *tape.grad(self);
    Volume<T>& gx = tape.grad_mut(xi);
    for (std::size_t nc = 0; nc < gy.size(); ++nc) gx[(*argmax)[nc]] += gy[nc];
  });
}

template <typename T>
Var<T> trilinear_upsample(const Var<T>& x) {
  const Shape xs = x.shape();
  const Shape ys{xs.batch, xs.channels, 2 * xs.depth, 2 * xs.height, 2 * xs.width};
  auto td = std::make_shared<Taps>(upsample_taps(xs.depth));
  auto th = std::make_shared<Taps>(upsample_taps(xs.height));
  auto tw = std::make_shared<Taps>(upsample_taps(xs.width));

  // Visits every (output index, input index, weight) triple of one channel.
  auto for_each_tap = [=](auto&& fn) {
    for (std::size_t d = 0; d < ys.depth; ++d)
      for (std::size_t h = 0; h < ys.height; ++h)
        for (std::size_t w = 0; w < ys.width; ++w) {
          const std::size_t o = (d * ys.height + h) * ys.width + w;
          const std::size_t di[2] = {td->lo[d], td->hi[d]};
          const std::size_t hi[2] = {th->lo[h], th->hi[h]};
          const std::size_t wi[2] = {tw->lo[w], tw->hi[w]};
          const double dw[2] = {1 - td->frac[d], td->frac[d]};
          const double hw[2] = {1 - th->frac[h], th->frac[h]};
          const double ww[2] = {1 - tw->frac[w], tw->frac[w]};
          for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
              for (int c = 0; c < 2; ++c)
                fn(o, (di[a] * xs.height + hi[b]) * xs.width + wi[c], dw[a] * hw[b] * ww[c]);
        }
  };

  Volume<T> y(ys);
  const Volume<T>& xv = x.value();
  for (std::size_t nc = 0; nc < xs.batch * xs.channels; ++nc) {
    const T* xc = xv.raw() + nc * xs.spatial();
    T* yc = y.raw() + nc * ys.spatial();
    for_each_tap([&](std::size_t o, std::size_t i, double wgt) { yc[o] += static_cast<T>(wgt) * xc[i]; });
  }
  const NodeId xi = x.id();
  return x.tape().record("trilinear_upsample", std::move(y), {xi}, [=](Tape<T>& tape, NodeId self) {
    if (!tape.requires_grad(xi)) return;
    const Volume<T>& gy = *tape.grad(self);
    Volume<T>& gx = tape.grad_mut(xi);
    for (std::size_t nc = 0; nc < xs.batch * xs.channels; ++nc) {
      const T* gc = gy.raw() + nc * ys.spatial();
      T* xc = gx.raw() + nc * xs.spatial();
      for_each_tap([&](std::size_t o, std::size_t i, double wgt) { xc[i] += static_cast<T>(wgt) * gc[o]; });
    }
  });
}

template <typename T>
Var<T> nearest_upsample(const Var<T>& x, std::size_t factor) {
  const Shape xs = x.shape();
  if (factor == 0) throw ShapeError("nearest_upsample: factor must be >= 1");
  const Shape ys{xs.batch, xs.channels, factor * xs.depth, factor * xs.height, factor * xs.width};
  Volume<T> y(ys);
  const Volume<T>& xv = x.value();
  auto src_index = [=](std::size_t d, std::size_t h, std::size_t w) {
    return ((d / factor) * xs.height + h / factor) * xs.width + w / factor;
  };
  for (std::size_t nc = 0; nc < xs.batch * xs.channels; ++nc) {
    const T* xc = xv.raw() + nc * xs.spatial();
    T* yc = y.raw() + nc * ys.spatial();
    for (std::size_t d = 0; d < ys.depth; ++d)
      for (std::size_t h = 0; h < ys.height; ++h)
        for (std::size_t w = 0; w < ys.width; ++w)
          yc[(d * ys.height + h) * ys.width + w] = xc[src_index(d, h, w)];
  }
  const NodeId xi = x.id();
  return x.tape().record("nearest_upsample", std::move(y), {xi}, [=](Tape<T>& tape, NodeId self) {
    if (!tape.requires_grad(xi)) return;
    const Volume<T>& gy = *tape.grad(self);
    Volume<T>& gx = tape.grad_mut(xi);
    for (std::size_t nc = 0; nc < xs.batch * xs.channels; ++nc) {
      const T* gc = gy.raw() + nc * ys.spatial();
      T* xc = gx.raw() + nc * xs.spatial();
      for (std::size_t d = 0; d < ys.depth; ++d)
        for (std::size_t h = 0; h < ys.height; ++h)
          for (std::size_t w = 0; w < ys.width; ++w)
            xc[src_index(d, h, w)] += gc[(d * ys.height + h) * ys.width + w];
    }
  });
}

namespace {

// 1-D valid correlation along one axis. `stride` is the element distance
// between neighbours on that axis, `len` its extent; other axes are folded
// into (outer, inner).
template <typename T>
void filter_axis(const T* src, T* dst, std::size_t outer, std::size_t len, std::size_t inner,
                 const std::vector<T>& k) {
  const std::size_t out_len = len - k.size() + 1;
  for (std::size_t a = 0; a < outer; ++a)
    for (std::size_t o = 0; o < out_len; ++o) {
      T* d = dst + (a * out_len + o) * inner;
      for (std::size_t t = 0; t < k.size(); ++t) {
        const T* s = src + (a * len + o + t) * inner;
        const T kt = k[t];
        for (std::size_t i = 0; i < inner; ++i) d[i] += kt * s[i];
      }
    }
}

// Adjoint of filter_axis.
template <typename T>
void filter_axis_adjoint(const T* gout, T* gin, std::size_t outer, std::size_t len,
                         std::size_t inner, const std::vector<T>& k) {
  const std::size_t out_len = len - k.size() + 1;
  for (std::size_t a = 0; a < outer; ++a)
    for (std::size_t o = 0; o < out_len; ++o) {
      const T* g = gout + (a * out_len + o) * inner;
      for (std::size_t t = 0; t < k.size(); ++t) {
        T* s = gin + (a * len + o + t) * inner;
        const T kt = k[t];
        for (std::size_t i = 0; i < inner; ++i) s[i] += kt * g[i];
      }
    }
}

}  // namespace

template <typename T>
Var<T> window_filter(const Var<T>& x, const std::vector<T>& kernel) {
  const Shape xs = x.shape();
  const std::size_t k = kernel.size();
  if (k == 0 || xs.depth < k || xs.height < k || xs.width < k) {
    throw ShapeError("window_filter: window " + std::to_string(k) + " larger than " + xs.str());
  }
  const std::size_t nc = xs.batch * xs.channels;
  const std::size_t D = xs.depth, H = xs.height, W = xs.width;
  const std::size_t d2 = D - k + 1, h2 = H - k + 1, w2 = W - k + 1;
  const Shape ys{xs.batch, xs.channels, d2, h2, w2};

  // W pass -> (nc, D, H, w2); H pass -> (nc, D, h2, w2); D pass -> (nc, d2, h2, w2).
  std::vector<T> a(nc * D * H * w2), b(nc * D * h2 * w2);
  filter_axis(x.value().raw(), a.data(), nc * D * H, W, 1, kernel);
  filter_axis(a.data(), b.data(), nc * D, H, w2, kernel);
  Volume<T> y(ys);
  filter_axis(b.data(), y.raw(), nc, D, h2 * w2, kernel);

  const NodeId xi = x.id();
  return x.tape().record("window_filter", std::move(y), {xi}, [=](Tape<T>& tape, NodeId self) {
    if (!tape.requires_grad(xi)) return;
    std::vector<T> gb(nc * D * h2 * w2), ga(nc * D * H * w2);
    filter_axis_adjoint(tape.grad(self)->raw(), gb.data(), nc, D, h2 * w2, kernel);
    filter_axis_adjoint(gb.data(), ga.data(), nc * D, H, w2, kernel);
    filter_axis_adjoint(ga.data(), tape.grad_mut(xi).raw(), nc * D * H, W, 1, kernel);
  });
}

#define PCSA_INSTANTIATE(T)                                                          \
  template Var<T> max_pool3d<T>(const Var<T>&);                                     \
  template Var<T> avg_pool3d<T>(const Var<T>&, std::size_t);                        \
  template Var<T> global_avg_pool<T>(const Var<T>&);                                \
  template Var<T> global_max_pool<T>(const Var<T>&);                                \
  template Var<T> trilinear_upsample<T>(const Var<T>&);                             \
  template Var<T> nearest_upsample<T>(const Var<T>&, std::size_t);                  \
  template Var<T> window_filter<T>(const Var<T>&, const std::vector<T>&);
PCSA_INSTANTIATE(float)
PCSA_INSTANTIATE(double)
#undef PCSA_INSTANTIATE

}  // namespace pcsa::ops
