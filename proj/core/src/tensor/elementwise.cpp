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
#include <array>
#include <cmath>
#include <vector>

#include "kernels.hpp"
#include "pcsa/tensor/ops.hpp"

namespace pcsa::ops {
namespace {

// y = f(x); backward multiplies by df(x, y).
template <typename T, typename F, typename DF>
Var<T> unary(std::string_view name, const Var<T>& x, F f, DF df) {
  const Volume<T>& xv = x.value();
  Volume<T> y(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) y[i] = f(xv[i]);
  const NodeId xi = x.id();
  return x.tape().record(name, std::move(y), {xi}, [=](Tape<T>& tape, NodeId self) {
    if (!tape.requires_grad(xi)) return;
    const Volume<T>& gy = *tape.grad(self);
    const Volume<T>& xv2 = tape.value(xi);
    const Volume<T>& yv = tape.value(self);
    Volume<T>& gx = tape.grad_mut(xi);
    for (std::size_t i = 0; i < gy.size(); ++i) gx[i] += gy[i] * df(xv2[i], yv[i]);
  });
}

Shape broadcast_shape(const Shape& a, const Shape& b, std::string_view op) {
  const auto da = a.dims(), db = b.dims();
  std::array<std::size_t, 5> out{};
  for (std::size_t i = 0; i < 5; ++i) {
    if (da[i] == db[i] || db[i] == 1) {
      out[i] = da[i];
    } else if (da[i] == 1) {
      out[i] = db[i];
    } else {
      throw ShapeError(std::string(op) + ": cannot broadcast " + a.str() + " with " + b.str());
    }
  }
  return Shape::from_dims(out);
}

std::array<std::size_t, 5> broadcast_strides(const Shape& s, const Shape& out) {
  const auto d = s.dims(), o = out.dims();
  std::array<std::size_t, 5> st{};
  std::size_t acc = 1;
  for (std::size_t i = 5; i-- > 0;) {
    st[i] = (d[i] == 1 && o[i] != 1) ? 0 : acc;
    acc *= d[i];
  }
  return st;
}

// fn(out_index, a_index, b_index) over every output element.
template <typename Fn>
void for_each_broadcast(const Shape& out, const std::array<std::size_t, 5>& sa,
                        const std::array<std::size_t, 5>& sb, Fn&& fn) {
  std::size_t o = 0;
  for (std::size_t n = 0; n < out.batch; ++n)
    for (std::size_t c = 0; c < out.channels; ++c)
      for (std::size_t d = 0; d < out.depth; ++d)
        for (std::size_t h = 0; h < out.height; ++h) {
          const std::size_t ia = n * sa[0] + c * sa[1] + d * sa[2] + h * sa[3];
          const std::size_t ib = n * sb[0] + c * sb[1] + d * sb[2] + h * sb[3];
          for (std::size_t w = 0; w < out.width; ++w, ++o) fn(o, ia + w * sa[4], ib + w * sb[4]);
        }
}

enum class BinOp { kAdd, kSub, kMul, kDiv };

template <typename T>
Var<T> binary(BinOp op, const Var<T>& a, const Var<T>& b) {
  static constexpr std::string_view kNames[] = {"add", "sub", "mul", "div"};
  const std::string_view name = kNames[static_cast<int>(op)];
  const Shape as = a.shape(), bs = b.shape();
  const Shape ys = broadcast_shape(as, bs, name);
  const auto sa = broadcast_strides(as, ys), sb = broadcast_strides(bs, ys);
  Volume<T> y(ys);
  const Volume<T>& av = a.value();
  const Volume<T>& bv = b.value();
  for_each_broadcast(ys, sa, sb, [&](std::size_t o, std::size_t ia, std::size_t ib) {
    switch (op) {
      case BinOp::kAdd: y[o] = av[ia] + bv[ib]; break;
      case BinOp::kSub: y[o] = av[ia] - bv[ib]; break;
      case BinOp::kMul: y[o] = av[ia] * bv[ib]; break;
      case BinOp::kDiv: y[o] = av[ia] / bv[ib]; break;
    }
  });
  const NodeId ai = a.id(), bi = b.id();
  return a.tape().record(name, std::move(y), {ai, bi}, [=](Tape<T>& tape, NodeId self) {
    const Volume<T>& gy = *tape.grad(self);
    const Volume<T>& av2 = tape.value(ai);
    const Volume<T>& bv2 = tape.value(bi);
    const bool ga = tape.requires_grad(ai), gb = tape.requires_grad(bi);
    T* da = ga ? tape.grad_mut(ai).raw() : nullptr;
    T* db = gb ? tape.grad_mut(bi).raw() : nullptr;
    for_each_broadcast(ys, sa, sb, [&](std::size_t o, std::size_t ia, std::size_t ib) {
      const T g = gy[o];
      switch (op) {
        case BinOp::kAdd:
          if (da) da[ia] += g;
          if (db) db[ib] += g;
          break;
        case BinOp::kSub:
          if (da) da[ia] += g;
          if (db) db[ib] -= g;
          break;
        case BinOp::kMul:
          if (da) da[ia] += g * bv2[ib];
          if (db) db[ib] += g * av2[ia];
          break;
        case BinOp::kDiv: {
          const T inv = T(1) / bv2[ib];
          if (da) da[ia] += g * inv;
          if (db) db[ib] -= g * av2[ia] * inv * inv;
          break;
        }
      }
    });
  });
}

}  // namespace

template <typename T>
Var<T> relu(const Var<T>& x) {
  // Derivative at exactly zero is taken as 0.
  return unary<T>(
      "relu", x, [](T v) { return v > T(0) ? v : T(0); },
      [](T v, T) { return v > T(0) ? T(1) : T(0); });
}

template <typename T>
Var<T> sigmoid(const Var<T>& x) {
  return unary<T>(
      "sigmoid", x,
      [](T v) {
        if (v >= T(0)) return T(1) / (T(1) + std::exp(-v));
        const T e = std::exp(v);
        return e / (T(1) + e);
      },
      [](T, T y) { return y * (T(1) - y); });
}

template <typename T>
Var<T> softplus(const Var<T>& x) {
  return unary<T>(
      "softplus", x, [](T v) { return std::max(v, T(0)) + std::log1p(std::exp(-std::abs(v))); },
      [](T v, T) {
        if (v >= T(0)) return T(1) / (T(1) + std::exp(-v));
        const T e = std::exp(v);
        return e / (T(1) + e);
      });
}

template <typename T>
Var<T> abs(const Var<T>& x) {
  return unary<T>(
      "abs", x, [](T v) { return std::abs(v); },
      [](T v, T) { return v > T(0) ? T(1) : (v < T(0) ? T(-1) : T(0)); });
}

template <typename T>
Var<T> square(const Var<T>& x) {
  return unary<T>("square", x, [](T v) { return v * v; }, [](T v, T) { return T(2) * v; });
}

template <typename T>
Var<T> pospow(const Var<T>& x, double p) {
  if (p == 1.0) {
    return unary<T>("pospow", x, [](T v) { return v; }, [](T, T) { return T(1); });
  }
  // Below this the derivative p * v^(p-1) is treated as 0 with the value.
  constexpr double kFloor = 1e-12;
  return unary<T>(
      "pospow", x,
      [p](T v) { return v > T(kFloor) ? static_cast<T>(std::pow(static_cast<double>(v), p)) : T(0); },
      [p](T v, T) {
        return v > T(kFloor) ? static_cast<T>(p * std::pow(static_cast<double>(v), p - 1.0)) : T(0);
      });
}

template <typename T>
Var<T> sqrt_pos(const Var<T>& x) {
  return unary<T>(
      "sqrt_pos", x, [](T v) { return v > T(0) ? std::sqrt(v) : T(0); },
      [](T, T y) { return y > T(1e-12) ? T(0.5) / y : T(0); });
}

template <typename T>
Var<T> scale(const Var<T>& x, double a) {
  const T s = static_cast<T>(a);
  return unary<T>("scale", x, [s](T v) { return s * v; }, [s](T, T) { return s; });
}

template <typename T>
Var<T> add_scalar(const Var<T>& x, double c) {
  const T s = static_cast<T>(c);
  return unary<T>("add_scalar", x, [s](T v) { return v + s; }, [](T, T) { return T(1); });
}

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b) { return binary(BinOp::kAdd, a, b); }
template <typename T>
Var<T> sub(const Var<T>& a, const Var<T>& b) { return binary(BinOp::kSub, a, b); }
template <typename T>
Var<T> mul(const Var<T>& a, const Var<T>& b) { return binary(BinOp::kMul, a, b); }
template <typename T>
Var<T> div(const Var<T>& a, const Var<T>& b) { return binary(BinOp::kDiv, a, b); }

template <typename T>
Var<T> softmax_channels(const Var<T>& x) {
  const Shape xs = x.shape();
  const std::size_t C = xs.channels, sp = xs.spatial();
  Volume<T> y(xs);
  const Volume<T>& xv = x.value();
  for (std::size_t n = 0; n < xs.batch; ++n) {
    const T* xn = xv.raw() + n * xs.item_size();
    T* yn = y.raw() + n * xs.item_size();
    for (std::size_t s = 0; s < sp; ++s) {
      T mx = xn[s];
      for (std::size_t c = 1; c < C; ++c) mx = std::max(mx, xn[c * sp + s]);
      T total = 0;
      for (std::size_t c = 0; c < C; ++c) {
        yn[c * sp + s] = std::exp(xn[c * sp + s] - mx);
        total += yn[c * sp + s];
      }
      for (std::size_t c = 0; c < C; ++c) yn[c * sp + s] /= total;
    }
  }
  const NodeId xi = x.id();
  return x.tape().record("softmax_channels", std::move(y), {xi}, [=](Tape<T>& tape, NodeId self) {
    if (!tape.requires_grad(xi)) return;
    const Volume<T>& gy = *tape.grad(self);
    const Volume<T>& yv = tape.value(self);
    Volume<T>& gx = tape.grad_mut(xi);
    for (std::size_t n = 0; n < xs.batch; ++n) {
      const std::size_t base = n * xs.item_size();
      for (std::size_t s = 0; s < sp; ++s) {
        T dot = 0;
        for (std::size_t c = 0; c < C; ++c) dot += yv[base + c * sp + s] * gy[base + c * sp + s];
        for (std::size_t c = 0; c < C; ++c) {
          const std::size_t i = base + c * sp + s;
          gx[i] += yv[i] * (gy[i] - dot);
        }
      }
    }
  });
}

template <typename T>
Var<T> concat_channels(std::span<const Var<T>> parts) {
  if (parts.empty()) throw ShapeError("concat_channels: no parts");
  const Shape first = parts.front().shape();
  std::size_t channels = 0;
  std::vector<NodeId> ids;
  std::vector<std::size_t> offsets;
  for (const auto& p : parts) {
    const Shape s = p.shape();
    if (s.batch != first.batch || !s.same_spatial(first)) {
      throw ShapeError("concat_channels: part " + s.str() + " does not match " + first.str());
    }
    offsets.push_back(channels);
    channels += s.channels;
    ids.push_back(p.id());
  }
  const Shape ys{first.batch, channels, first.depth, first.height, first.width};
  const std::size_t sp = first.spatial();
  Volume<T> y(ys);
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const Volume<T>& v = parts[p].value();
    const std::size_t chunk = v.shape().channels * sp;
    for (std::size_t n = 0; n < ys.batch; ++n)
      std::copy_n(v.raw() + n * chunk, chunk, y.raw() + n * ys.item_size() + offsets[p] * sp);
  }
  Tape<T>& tape = parts.front().tape();
  return tape.record("concat_channels", std::move(y), ids, [=](Tape<T>& t, NodeId self) {
    const Volume<T>& gy = *t.grad(self);
    for (std::size_t p = 0; p < ids.size(); ++p) {
      if (!t.requires_grad(ids[p])) continue;
      Volume<T>& g = t.grad_mut(ids[p]);
      const std::size_t chunk = g.shape().channels * sp;
      for (std::size_t n = 0; n < ys.batch; ++n) {
        const T* src = gy.raw() + n * ys.item_size() + offsets[p] * sp;
        T* dst = g.raw() + n * chunk;
        for (std::size_t i = 0; i < chunk; ++i) dst[i] += src[i];
      }
    }
  });
}

template <typename T>
Var<T> slice_channels(const Var<T>& x, std::size_t begin, std::size_t count) {
  const Shape xs = x.shape();
  if (count == 0 || begin + count > xs.channels) {
    throw ShapeError("slice_channels: [" + std::to_string(begin) + ", " +
                     std::to_string(begin + count) + ") outside " + xs.str());
  }
  const std::size_t sp = xs.spatial();
  const Shape ys{xs.batch, count, xs.depth, xs.height, xs.width};
  Volume<T> y(ys);
  for (std::size_t n = 0; n < xs.batch; ++n)
    std::copy_n(x.value().raw() + n * xs.item_size() + begin * sp, count * sp,
                y.raw() + n * ys.item_size());
  const NodeId xi = x.id();
  return x.tape().record("slice_channels", std::move(y), {xi}, [=](Tape<T>& tape, NodeId self) {
    if (!tape.requires_grad(xi)) return;
    const Volume<T>& gy = *tape.grad(self);
    Volume<T>& gx = tape.grad_mut(xi);
    for (std::size_t n = 0; n < xs.batch; ++n) {
      T* dst = gx.raw() + n * xs.item_size() + begin * sp;
      const T* src = gy.raw() + n * ys.item_size();
      for (std::size_t i = 0; i < count * sp; ++i) dst[i] += src[i];
    }
  });
}

template <typename T>
Var<T> sum(const Var<T>& x) {
  double acc = 0;
  for (T v : x.value().data()) acc += v;
  const NodeId xi = x.id();
  return x.tape().record("sum", Volume<T>::scalar(static_cast<T>(acc)), {xi},
                         [xi](Tape<T>& tape, NodeId self) {
                           if (!tape.requires_grad(xi)) return;
                           const T g = (*tape.grad(self))[0];
                           for (T& v : tape.grad_mut(xi).data()) v += g;
                         });
}

template <typename T>
Var<T> mean(const Var<T>& x) {
  const std::size_t n = x.value().size();
  double acc = 0;
  for (T v : x.value().data()) acc += v;
  const NodeId xi = x.id();
  return x.tape().record("mean", Volume<T>::scalar(static_cast<T>(acc / static_cast<double>(n))), {xi},
                         [xi, n](Tape<T>& tape, NodeId self) {
                           if (!tape.requires_grad(xi)) return;
                           const T g = (*tape.grad(self))[0] / static_cast<T>(n);
                           for (T& v : tape.grad_mut(xi).data()) v += g;
                         });
}

template <typename T>
Var<T> item_mean(const Var<T>& x) {
  const Shape xs = x.shape();
  const std::size_t per = xs.item_size();
  Volume<T> y(Shape{xs.batch, 1, 1, 1, 1});
  for (std::size_t n = 0; n < xs.batch; ++n) {
    double acc = 0;
    for (std::size_t i = 0; i < per; ++i) acc += x.value()[n * per + i];
    y[n] = static_cast<T>(acc / static_cast<double>(per));
  }
  const NodeId xi = x.id();
  return x.tape().record("item_mean", std::move(y), {xi}, [=](Tape<T>& tape, NodeId self) {
    if (!tape.requires_grad(xi)) return;
    const Volume<T>& gy = *tape.grad(self);
    Volume<T>& gx = tape.grad_mut(xi);
    for (std::size_t n = 0; n < xs.batch; ++n) {
      const T g = gy[n] / static_cast<T>(per);
      for (std::size_t i = 0; i < per; ++i) gx[n * per + i] += g;
    }
  });
}

namespace {

template <typename T>
detail::RowMat<T> attention_matrix(const T* q, const T* k, std::size_t C, std::size_t tokens) {
  using detail::RowMat;
  const Eigen::Map<const RowMat<T>> qm(q, static_cast<Eigen::Index>(C), static_cast<Eigen::Index>(tokens));
  const Eigen::Map<const RowMat<T>> km(k, static_cast<Eigen::Index>(C), static_cast<Eigen::Index>(tokens));
  RowMat<T> s = (qm.transpose() * km) * static_cast<T>(1.0 / std::sqrt(static_cast<double>(C)));
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    const T mx = s.row(i).maxCoeff();
    s.row(i) = (s.row(i).array() - mx).exp().matrix();
    s.row(i) /= s.row(i).sum();
  }
  return s;
}

}  // namespace

template <typename T>
std::vector<T> attention_weights(const Volume<T>& q, const Volume<T>& k, std::size_t n) {
  const Shape s = q.shape();
  if (k.shape() != s) throw ShapeError("attention_weights: q/k shapes differ");
  const auto a = attention_matrix(q.raw() + n * s.item_size(), k.raw() + n * s.item_size(),
                                  s.channels, s.spatial());
  return std::vector<T>(a.data(), a.data() + a.size());
}

template <typename T>
Var<T> token_attention(const Var<T>& q, const Var<T>& k, const Var<T>& v) {
  using detail::RowMat;
  const Shape s = q.shape();
  if (k.shape() != s || v.shape() != s) {
    throw ShapeError("token_attention: q " + s.str() + ", k " + k.shape().str() + ", v " +
                     v.shape().str() + " must match");
  }
  const std::size_t C = s.channels, tokens = s.spatial();
  const auto Ci = static_cast<Eigen::Index>(C), Ti = static_cast<Eigen::Index>(tokens);
  Volume<T> y(s);
  for (std::size_t n = 0; n < s.batch; ++n) {
    const std::size_t off = n * s.item_size();
    const RowMat<T> a = attention_matrix(q.value().raw() + off, k.value().raw() + off, C, tokens);
    const Eigen::Map<const RowMat<T>> vm(v.value().raw() + off, Ci, Ti);
    Eigen::Map<RowMat<T>> ym(y.raw() + off, Ci, Ti);
    ym.noalias() = vm * a.transpose();
  }
  const NodeId qi = q.id(), ki = k.id(), vi = v.id();
  return q.tape().record("token_attention", std::move(y), {qi, ki, vi}, [=](Tape<T>& tape, NodeId self) {
    const T scale = static_cast<T>(1.0 / std::sqrt(static_cast<double>(C)));
    for (std::size_t n = 0; n < s.batch; ++n) {
      const std::size_t off = n * s.item_size();
      const T* qn = tape.value(qi).raw() + off;
      const T* kn = tape.value(ki).raw() + off;
      const RowMat<T> a = attention_matrix(qn, kn, C, tokens);
      const Eigen::Map<const RowMat<T>> go(tape.grad(self)->raw() + off, Ci, Ti);
      const Eigen::Map<const RowMat<T>> vm(tape.value(vi).raw() + off, Ci, Ti);
      if (tape.requires_grad(vi)) {
        Eigen::Map<RowMat<T>> dv(tape.grad_mut(vi).raw() + off, Ci, Ti);
        dv.noalias() += go * a;
      }
      if (!tape.requires_grad(qi) && !tape.requires_grad(ki)) continue;
      const RowMat<T> da = go.transpose() * vm;
      RowMat<T> ds = a.cwiseProduct(da);
      const Eigen::Matrix<T, Eigen::Dynamic, 1> rows = ds.rowwise().sum();
      ds = a.cwiseProduct(da.colwise() - rows);
      const Eigen::Map<const RowMat<T>> qm(qn, Ci, Ti);
      const Eigen::Map<const RowMat<T>> km(kn, Ci, Ti);
      if (tape.requires_grad(qi)) {
        Eigen::Map<RowMat<T>> dq(tape.grad_mut(qi).raw() + off, Ci, Ti);
        dq.noalias() += scale * (km * ds.transpose());
      }
      if (tape.requires_grad(ki)) {
        Eigen::Map<RowMat<T>> dk(tape.grad_mut(ki).raw() + off, Ci, Ti);
        dk.noalias() += scale * (qm * ds);
      }
    }
  });
}

#define PCSA_INSTANTIATE(T)                                                        \
  template Var<T> relu<T>(const Var<T>&);                                         \
  template Var<T> sigmoid<T>(const Var<T>&);                                      \
  template Var<T> softplus<T>(const Var<T>&);                                     \
  template Var<T> softmax_channels<T>(const Var<T>&);                             \
  template Var<T> abs<T>(const Var<T>&);                                          \
  template Var<T> square<T>(const Var<T>&);                                       \
  template Var<T> pospow<T>(const Var<T>&, double);                               \
  template Var<T> sqrt_pos<T>(const Var<T>&);                                     \
  template Var<T> scale<T>(const Var<T>&, double);                                \
  template Var<T> add_scalar<T>(const Var<T>&, double);                           \
  template Var<T> add<T>(const Var<T>&, const Var<T>&);                           \
  template Var<T> sub<T>(const Var<T>&, const Var<T>&);                           \
  template Var<T> mul<T>(const Var<T>&, const Var<T>&);                           \
  template Var<T> div<T>(const Var<T>&, const Var<T>&);                           \
  template Var<T> concat_channels<T>(std::span<const Var<T>>);                    \
  template Var<T> slice_channels<T>(const Var<T>&, std::size_t, std::size_t);     \
  template Var<T> sum<T>(const Var<T>&);                                          \
  template Var<T> mean<T>(const Var<T>&);                                         \
  template Var<T> item_mean<T>(const Var<T>&);                                    \
  template Var<T> token_attention<T>(const Var<T>&, const Var<T>&, const Var<T>&); \
  template std::vector<T> attention_weights<T>(const Volume<T>&, const Volume<T>&, std::size_t);
PCSA_INSTANTIATE(float)
PCSA_INSTANTIATE(double)
#undef PCSA_INSTANTIATE

}  // namespace pcsa::ops
