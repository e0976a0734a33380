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
#include <atomic>
#include <vector>

#include "kernels.hpp"
#include "pcsa/tensor/ops.hpp"

namespace pcsa::debug {
namespace {
std::atomic<double> g_conv_perturbation{0.0};
}
void set_conv_backward_perturbation(double factor) { g_conv_perturbation.store(factor); }
double conv_backward_perturbation() { return g_conv_perturbation.load(); }
}  // namespace pcsa::debug

namespace pcsa::ops {
namespace detail {

namespace {
std::size_t same_out(std::size_t n, std::size_t s) { return (n + s - 1) / s; }
std::ptrdiff_t same_pad(std::size_t n, std::size_t k, std::size_t s) {
  const auto out = same_out(n, s);
  const auto need = static_cast<std::ptrdiff_t>((out - 1) * s + k) - static_cast<std::ptrdiff_t>(n);
  return std::max<std::ptrdiff_t>(need, 0) / 2;
}
}  // namespace

ConvGeometry same_geometry(const Shape& in, std::size_t k, std::size_t s) {
  return {in.depth,
          in.height,
          in.width,
          same_out(in.depth, s),
          same_out(in.height, s),
          same_out(in.width, s),
          k,
          s,
          same_pad(in.depth, k, s),
          same_pad(in.height, k, s),
          same_pad(in.width, k, s)};
}

ConvGeometry valid_geometry(const Shape& in, std::size_t k, std::size_t s) {
  if (in.depth < k || in.height < k || in.width < k) {
    throw ShapeError("valid conv: spatial extent of " + in.str() + " smaller than kernel " +
                     std::to_string(k));
  }
  return {in.depth, in.height, in.width, (in.depth - k) / s + 1, (in.height - k) / s + 1,
          (in.width - k) / s + 1, k, s, 0, 0, 0};
}

std::size_t planes_per_chunk(const ConvGeometry& g, std::size_t rows) {
  constexpr std::size_t kBudget = std::size_t{1} << 22;
  const std::size_t per_plane = std::max<std::size_t>(1, rows * g.out_plane());
  return std::clamp<std::size_t>(kBudget / per_plane, 1, g.out_d);
}

template <typename T>
void im2col(const T* x, std::size_t channels, const ConvGeometry& g, std::size_t od0,
            std::size_t od1, T* cols) {
  const std::size_t k = g.kernel;
  const std::size_t cols_n = (od1 - od0) * g.out_plane();
  const auto in_d = static_cast<std::ptrdiff_t>(g.in_d);
  const auto in_h = static_cast<std::ptrdiff_t>(g.in_h);
  const auto in_w = static_cast<std::ptrdiff_t>(g.in_w);
  const auto s = static_cast<std::ptrdiff_t>(g.stride);
  for (std::size_t c = 0; c < channels; ++c) {
    const T* xc = x + c * g.in_spatial();
    for (std::size_t kd = 0; kd < k; ++kd)
      for (std::size_t kh = 0; kh < k; ++kh)
        for (std::size_t kw = 0; kw < k; ++kw) {
          const std::size_t row = ((c * k + kd) * k + kh) * k + kw;
          T* dst = cols + row * cols_n;
          for (std::size_t od = od0; od < od1; ++od) {
            const std::ptrdiff_t id = static_cast<std::ptrdiff_t>(od) * s + static_cast<std::ptrdiff_t>(kd) - g.pad_d;
            for (std::size_t oh = 0; oh < g.out_h; ++oh) {
              const std::ptrdiff_t ih = static_cast<std::ptrdiff_t>(oh) * s + static_cast<std::ptrdiff_t>(kh) - g.pad_h;
              if (id < 0 || id >= in_d || ih < 0 || ih >= in_h) {
                std::fill(dst, dst + g.out_w, T(0));
                dst += g.out_w;
                continue;
              }
              const T* row_src = xc + (id * in_h + ih) * in_w;
              for (std::size_t ow = 0; ow < g.out_w; ++ow) {
                const std::ptrdiff_t iw = static_cast<std::ptrdiff_t>(ow) * s + static_cast<std::ptrdiff_t>(kw) - g.pad_w;
                *dst++ = (iw >= 0 && iw < in_w) ? row_src[iw] : T(0);
              }
            }
          }
        }
  }
}

template <typename T>
void col2im(const T* cols, std::size_t channels, const ConvGeometry& g, std::size_t od0,
            std::size_t od1, T* x) {
  const std::size_t k = g.kernel;
  const std::size_t cols_n = (od1 - od0) * g.out_plane();
  const auto in_d = static_cast<std::ptrdiff_t>(g.in_d);
  const auto in_h = static_cast<std::ptrdiff_t>(g.in_h);
  const auto in_w = static_cast<std::ptrdiff_t>(g.in_w);
  const auto s = static_cast<std::ptrdiff_t>(g.stride);
  for (std::size_t c = 0; c < channels; ++c) {
    T* xc = x + c * g.in_spatial();
    for (std::size_t kd = 0; kd < k; ++kd)
      for (std::size_t kh = 0; kh < k; ++kh)
        for (std::size_t kw = 0; kw < k; ++kw) {
          const std::size_t row = ((c * k + kd) * k + kh) * k + kw;
          const T* src = cols + row * cols_n;
          for (std::size_t od = od0; od < od1; ++od) {
            const std::ptrdiff_t id = static_cast<std::ptrdiff_t>(od) * s + static_cast<std::ptrdiff_t>(kd) - g.pad_d;
            for (std::size_t oh = 0; oh < g.out_h; ++oh) {
              const std::ptrdiff_t ih = static_cast<std::ptrdiff_t>(oh) * s + static_cast<std::ptrdiff_t>(kh) - g.pad_h;
              if (id < 0 || id >= in_d || ih < 0 || ih >= in_h) {
                src += g.out_w;
                continue;
              }
              T* row_dst = xc + (id * in_h + ih) * in_w;
              for (std::size_t ow = 0; ow < g.out_w; ++ow) {
                const std::ptrdiff_t iw = static_cast<std::ptrdiff_t>(ow) * s + static_cast<std::ptrdiff_t>(kw) - g.pad_w;
                const T v = *src++;
                if (iw >= 0 && iw < in_w) row_dst[iw] += v;
              }
            }
          }
        }
  }
}

template void im2col<float>(const float*, std::size_t, const ConvGeometry&, std::size_t, std::size_t, float*);
template void im2col<double>(const double*, std::size_t, const ConvGeometry&, std::size_t, std::size_t, double*);
template void col2im<float>(const float*, std::size_t, const ConvGeometry&, std::size_t, std::size_t, float*);
template void col2im<double>(const double*, std::size_t, const ConvGeometry&, std::size_t, std::size_t, double*);

}  // namespace detail

namespace {

using detail::ConstStridedMap;
using detail::ConvGeometry;
using detail::RowMat;
using detail::StridedMap;

void check_cubic(const Shape& w, const char* op) {
  if (w.depth != w.height || w.height != w.width) {
    throw ShapeError(std::string(op) + ": kernel must be cubic, weight " + w.str());
  }
}

void check_bias(const Shape& b, std::size_t channels, const char* op) {
  if (b.numel() != channels) {
    throw ShapeError(std::string(op) + ": bias " + b.str() + " does not match " +
                     std::to_string(channels) + " output channels");
  }
}

}  // namespace

template <typename T>
Var<T> conv3d(const Var<T>& x, const Var<T>& weight, const Var<T>& bias, ConvOptions opt) {
  const Shape xs = x.shape();
  const Shape ws = weight.shape();
  check_cubic(ws, "conv3d");
  if (ws.channels != xs.channels) {
    throw ShapeError("conv3d: input has " + std::to_string(xs.channels) +
                     " channels, weight expects " + std::to_string(ws.channels));
  }
  if (opt.stride != 1 && opt.stride != 2) throw ShapeError("conv3d: stride must be 1 or 2");
  const std::size_t out_c = ws.batch;
  check_bias(bias.shape(), out_c, "conv3d");

  const ConvGeometry g = opt.padding == Padding::kSame
                             ? detail::same_geometry(xs, ws.depth, opt.stride)
                             : detail::valid_geometry(xs, ws.depth, opt.stride);
  const std::size_t rows = xs.channels * g.kernel * g.kernel * g.kernel;
  const Shape ys{xs.batch, out_c, g.out_d, g.out_h, g.out_w};
  Volume<T> y(ys);

  const Volume<T>& xv = x.value();
  const Volume<T>& wv = weight.value();
  const Volume<T>& bv = bias.value();
  const Eigen::Map<const RowMat<T>> wm(wv.raw(), static_cast<Eigen::Index>(out_c),
                                       static_cast<Eigen::Index>(rows));
  const std::size_t chunk = detail::planes_per_chunk(g, rows);
  std::vector<T> cols;
  for (std::size_t n = 0; n < xs.batch; ++n) {
    const T* xn = xv.raw() + n * xs.item_size();
    T* yn = y.raw() + n * ys.item_size();
    for (std::size_t od0 = 0; od0 < g.out_d; od0 += chunk) {
      const std::size_t od1 = std::min(g.out_d, od0 + chunk);
      const std::size_t ncols = (od1 - od0) * g.out_plane();
      cols.resize(rows * ncols);
      detail::im2col(xn, xs.channels, g, od0, od1, cols.data());
      const Eigen::Map<const RowMat<T>> cm(cols.data(), static_cast<Eigen::Index>(rows),
                                           static_cast<Eigen::Index>(ncols));
      StridedMap<T> ym(yn + od0 * g.out_plane(), static_cast<Eigen::Index>(out_c),
                       static_cast<Eigen::Index>(ncols),
                       Eigen::OuterStride<>(static_cast<Eigen::Index>(g.out_spatial())));
      ym.noalias() = wm * cm;
    }
    for (std::size_t o = 0; o < out_c; ++o) {
      T* yo = yn + o * g.out_spatial();
      const T b = bv[o];
      for (std::size_t i = 0; i < g.out_spatial(); ++i) yo[i] += b;
    }
  }

  const NodeId xi = x.id(), wi = weight.id(), bi = bias.id();
  return x.tape().record(
      "conv3d", std::move(y), {xi, wi, bi}, [=](Tape<T>& tape, NodeId self) {
        const Volume<T>& gy = *tape.grad(self);
        const Volume<T>& xv2 = tape.value(xi);
        const Volume<T>& wv2 = tape.value(wi);
        const bool gx = tape.requires_grad(xi), gw = tape.requires_grad(wi),
                   gb = tape.requires_grad(bi);
        const Eigen::Map<const RowMat<T>> wm2(wv2.raw(), static_cast<Eigen::Index>(out_c),
                                              static_cast<Eigen::Index>(rows));
        RowMat<T> dw;
        if (gw) dw = RowMat<T>::Zero(static_cast<Eigen::Index>(out_c), static_cast<Eigen::Index>(rows));
        std::vector<T> cols2, dcols;
        for (std::size_t n = 0; n < xs.batch; ++n) {
          const T* xn = xv2.raw() + n * xs.item_size();
          const T* gyn = gy.raw() + n * ys.item_size();
          for (std::size_t od0 = 0; od0 < g.out_d; od0 += chunk) {
            const std::size_t od1 = std::min(g.out_d, od0 + chunk);
            const std::size_t ncols = (od1 - od0) * g.out_plane();
            const ConstStridedMap<T> gym(gyn + od0 * g.out_plane(), static_cast<Eigen::Index>(out_c),
                                         static_cast<Eigen::Index>(ncols),
                                         Eigen::OuterStride<>(static_cast<Eigen::Index>(g.out_spatial())));
            if (gw) {
              cols2.resize(rows * ncols);
              detail::im2col(xn, xs.channels, g, od0, od1, cols2.data());
              const Eigen::Map<const RowMat<T>> cm(cols2.data(), static_cast<Eigen::Index>(rows),
                                                   static_cast<Eigen::Index>(ncols));
              dw.noalias() += gym * cm.transpose();
            }
            if (gx) {
              dcols.resize(rows * ncols);
              Eigen::Map<RowMat<T>> dcm(dcols.data(), static_cast<Eigen::Index>(rows),
                                        static_cast<Eigen::Index>(ncols));
              dcm.noalias() = wm2.transpose() * gym;
              T* dxn = tape.grad_mut(xi).raw() + n * xs.item_size();
              detail::col2im(dcols.data(), xs.channels, g, od0, od1, dxn);
            }
          }
        }
        if (gw) {
          const T scale = static_cast<T>(1.0 + debug::conv_backward_perturbation());
          T* dst = tape.grad_mut(wi).raw();
          for (Eigen::Index i = 0; i < dw.size(); ++i) dst[i] += dw.data()[i] * scale;
        }
        if (gb) {
          T* db = tape.grad_mut(bi).raw();
          for (std::size_t n = 0; n < xs.batch; ++n)
            for (std::size_t o = 0; o < out_c; ++o) {
              const T* go = gy.raw() + n * ys.item_size() + o * g.out_spatial();
              T acc = 0;
              for (std::size_t i = 0; i < g.out_spatial(); ++i) acc += go[i];
              db[o] += acc;
            }
        }
      });
}

template <typename T>
Var<T> transposed_conv3d(const Var<T>& x, const Var<T>& weight, const Var<T>& bias) {
  const Shape xs = x.shape();
  const Shape ws = weight.shape();
  check_cubic(ws, "transposed_conv3d");
  if (ws.depth != 3) throw ShapeError("transposed_conv3d: kernel must be 3x3x3, weight " + ws.str());
  if (ws.batch != xs.channels) {
    throw ShapeError("transposed_conv3d: input has " + std::to_string(xs.channels) +
                     " channels, weight expects " + std::to_string(ws.batch));
  }
  const std::size_t out_c = ws.channels;
  check_bias(bias.shape(), out_c, "transposed_conv3d");

  // Geometry of the stride-2 conv that maps the (2x) output back onto x.
  const Shape ys{xs.batch, out_c, 2 * xs.depth, 2 * xs.height, 2 * xs.width};
  const ConvGeometry g = detail::same_geometry(ys, 3, 2);
  const std::size_t rows = out_c * 27;
  const std::size_t in_c = xs.channels;
  Volume<T> y(ys);

  const Volume<T>& xv = x.value();
  const Volume<T>& wv = weight.value();
  const Volume<T>& bv = bias.value();
  const Eigen::Map<const RowMat<T>> wm(wv.raw(), static_cast<Eigen::Index>(in_c),
                                       static_cast<Eigen::Index>(rows));
  const std::size_t chunk = detail::planes_per_chunk(g, rows);
  std::vector<T> cols;
  for (std::size_t n = 0; n < xs.batch; ++n) {
    const T* xn = xv.raw() + n * xs.item_size();
    T* yn = y.raw() + n * ys.item_size();
    for (std::size_t od0 = 0; od0 < g.out_d; od0 += chunk) {
      const std::size_t od1 = std::min(g.out_d, od0 + chunk);
      const std::size_t ncols = (od1 - od0) * g.out_plane();
      cols.resize(rows * ncols);
      Eigen::Map<RowMat<T>> cm(cols.data(), static_cast<Eigen::Index>(rows),
                               static_cast<Eigen::Index>(ncols));
      const ConstStridedMap<T> xm(xn + od0 * g.out_plane(), static_cast<Eigen::Index>(in_c),
                                  static_cast<Eigen::Index>(ncols),
                                  Eigen::OuterStride<>(static_cast<Eigen::Index>(g.out_spatial())));
      cm.noalias() = wm.transpose() * xm;
      detail::col2im(cols.data(), out_c, g, od0, od1, yn);
    }
    for (std::size_t o = 0; o < out_c; ++o) {
      T* yo = yn + o * g.in_spatial();
      const T b = bv[o];
      for (std::size_t i = 0; i < g.in_spatial(); ++i) yo[i] += b;
    }
  }

  const NodeId xi = x.id(), wi = weight.id(), bi = bias.id();
  return x.tape().record(
      "transposed_conv3d", std::move(y), {xi, wi, bi}, [=](Tape<T>& tape, NodeId self) {
        const Volume<T>& gy = *tape.grad(self);
        const Volume<T>& xv2 = tape.value(xi);
        const Volume<T>& wv2 = tape.value(wi);
        const bool gx = tape.requires_grad(xi), gw = tape.requires_grad(wi),
                   gb = tape.requires_grad(bi);
        const Eigen::Map<const RowMat<T>> wm2(wv2.raw(), static_cast<Eigen::Index>(in_c),
                                              static_cast<Eigen::Index>(rows));
        RowMat<T> dw;
        if (gw) dw = RowMat<T>::Zero(static_cast<Eigen::Index>(in_c), static_cast<Eigen::Index>(rows));
        std::vector<T> cols2;
        for (std::size_t n = 0; n < xs.batch; ++n) {
          const T* gyn = gy.raw() + n * ys.item_size();
          const T* xn = xv2.raw() + n * xs.item_size();
          for (std::size_t od0 = 0; od0 < g.out_d; od0 += chunk) {
            const std::size_t od1 = std::min(g.out_d, od0 + chunk);
            const std::size_t ncols = (od1 - od0) * g.out_plane();
            cols2.resize(rows * ncols);
            detail::im2col(gyn, out_c, g, od0, od1, cols2.data());
            const Eigen::Map<const RowMat<T>> cm(cols2.data(), static_cast<Eigen::Index>(rows),
                                                 static_cast<Eigen::Index>(ncols));
            if (gx) {
              StridedMap<T> dxm(tape.grad_mut(xi).raw() + n * xs.item_size() + od0 * g.out_plane(),
                                static_cast<Eigen::Index>(in_c), static_cast<Eigen::Index>(ncols),
                                Eigen::OuterStride<>(static_cast<Eigen::Index>(g.out_spatial())));
              dxm.noalias() += wm2 * cm;
            }
            if (gw) {
              const ConstStridedMap<T> xm(xn + od0 * g.out_plane(), static_cast<Eigen::Index>(in_c),
                                          static_cast<Eigen::Index>(ncols),
                                          Eigen::OuterStride<>(static_cast<Eigen::Index>(g.out_spatial())));
              dw.noalias() += xm * cm.transpose();
            }
          }
        }
        if (gw) {
          T* dst = tape.grad_mut(wi).raw();
          for (Eigen::Index i = 0; i < dw.size(); ++i) dst[i] += dw.data()[i];
        }
        if (gb) {
          T* db = tape.grad_mut(bi).raw();
          for (std::size_t n = 0; n < xs.batch; ++n)
            for (std::size_t o = 0; o < out_c; ++o) {
              const T* go = gy.raw() + n * ys.item_size() + o * g.in_spatial();
              T acc = 0;
              for (std::size_t i = 0; i < g.in_spatial(); ++i) acc += go[i];
              db[o] += acc;
            }
        }
      });
}

template <typename T>
Var<T> fully_connected(const Var<T>& x, const Var<T>& weight, const Var<T>& bias) {
  const Shape xs = x.shape();
  const Shape ws = weight.shape();
  const std::size_t in = xs.item_size();
  const std::size_t out = ws.batch;
  if (ws.item_size() != in) {
    throw ShapeError("fully_connected: weight " + ws.str() + " expects " +
                     std::to_string(ws.item_size()) + " inputs, got " + std::to_string(in));
  }
  check_bias(bias.shape(), out, "fully_connected");
  const auto N = static_cast<Eigen::Index>(xs.batch);
  const auto I = static_cast<Eigen::Index>(in);
  const auto O = static_cast<Eigen::Index>(out);

  Volume<T> y(Shape{xs.batch, out, 1, 1, 1});
  {
    const Eigen::Map<const RowMat<T>> xm(x.value().raw(), N, I);
    const Eigen::Map<const RowMat<T>> wm(weight.value().raw(), O, I);
    Eigen::Map<RowMat<T>> ym(y.raw(), N, O);
    ym.noalias() = xm * wm.transpose();
    const T* b = bias.value().raw();
    for (Eigen::Index n = 0; n < N; ++n)
      for (Eigen::Index o = 0; o < O; ++o) ym(n, o) += b[o];
  }
  const NodeId xi = x.id(), wi = weight.id(), bi = bias.id();
  return x.tape().record(
      "fully_connected", std::move(y), {xi, wi, bi}, [=](Tape<T>& tape, NodeId self) {
        const Eigen::Map<const RowMat<T>> gy(tape.grad(self)->raw(), N, O);
        if (tape.requires_grad(xi)) {
          const Eigen::Map<const RowMat<T>> wm(tape.value(wi).raw(), O, I);
          Eigen::Map<RowMat<T>> dx(tape.grad_mut(xi).raw(), N, I);
          dx.noalias() += gy * wm;
        }
        if (tape.requires_grad(wi)) {
          const Eigen::Map<const RowMat<T>> xm(tape.value(xi).raw(), N, I);
          Eigen::Map<RowMat<T>> dw(tape.grad_mut(wi).raw(), O, I);
          dw.noalias() += gy.transpose() * xm;
        }
        if (tape.requires_grad(bi)) {
          T* db = tape.grad_mut(bi).raw();
          for (Eigen::Index n = 0; n < N; ++n)
            for (Eigen::Index o = 0; o < O; ++o) db[o] += gy(n, o);
        }
      });
}

#define PCSA_INSTANTIATE(T)                                                               \
  template Var<T> conv3d<T>(const Var<T>&, const Var<T>&, const Var<T>&, ConvOptions);   \
  template Var<T> transposed_conv3d<T>(const Var<T>&, const Var<T>&, const Var<T>&);     \
  template Var<T> fully_connected<T>(const Var<T>&, const Var<T>&, const Var<T>&);
PCSA_INSTANTIATE(float)
PCSA_INSTANTIATE(double)
#undef PCSA_INSTANTIATE

}  // namespace pcsa::ops
