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

#include <algorithm>
#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "pcsa/tensor/shape.hpp"

namespace pcsa {

/// Dense row-major (N, C, D, H, W) buffer. Element count always equals
/// shape().numel().
template <typename T>
class Volume {
 public:
  using value_type = T;

  Volume() : Volume(Shape{}) {}
  explicit Volume(const Shape& shape, T fill = T(0)) : shape_(shape) {
    shape_.validate();
    data_.assign(shape_.numel(), fill);
  }
  Volume(const Shape& shape, std::vector<T> data) : shape_(shape), data_(std::move(data)) {
    shape_.validate();
    if (data_.size() != shape_.numel()) {
      throw ShapeError("buffer of " + std::to_string(data_.size()) +
                       " elements does not match shape " + shape_.str());
    }
  }

  static Volume zeros(const Shape& s) { return Volume(s); }
  static Volume full(const Shape& s, T v) { return Volume(s, v); }
  static Volume scalar(T v) { return Volume(Shape{}, v); }

  const Shape& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  T* raw() { return data_.data(); }
  const T* raw() const { return data_.data(); }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::size_t index(std::size_t n, std::size_t c, std::size_t d, std::size_t h,
                    std::size_t w) const {
    return (((n * shape_.channels + c) * shape_.depth + d) * shape_.height + h) *
               shape_.width + w;
  }
  T& at(std::size_t n, std::size_t c, std::size_t d, std::size_t h, std::size_t w) {
    return data_[index(n, c, d, h, w)];
  }
  const T& at(std::size_t n, std::size_t c, std::size_t d, std::size_t h,
              std::size_t w) const {
    return data_[index(n, c, d, h, w)];
  }

  /// Same buffer, new extents with identical element count.
  Volume reshaped(const Shape& s) const& {
    if (s.numel() != shape_.numel()) throw ShapeError("reshape " + shape_.str() + " -> " + s.str());
    return Volume(s, data_);
  }
  Volume reshaped(const Shape& s) && {
    if (s.numel() != shape_.numel()) throw ShapeError("reshape " + shape_.str() + " -> " + s.str());
    return Volume(s, std::move(data_));
  }

  template <typename U>
  Volume<U> cast() const {
    std::vector<U> out(data_.size());
    std::transform(data_.begin(), data_.end(), out.begin(),
                   [](T v) { return static_cast<U>(v); });
    return Volume<U>(shape_, std::move(out));
  }

  /// Single batch item as a (1, C, D, H, W) volume.
  Volume item(std::size_t n) const {
    Shape s = shape_;
    s.batch = 1;
    const auto off = n * shape_.item_size();
    return Volume(s, std::vector<T>(data_.begin() + static_cast<std::ptrdiff_t>(off),
                                    data_.begin() + static_cast<std::ptrdiff_t>(off + s.numel())));
  }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](T v) { return std::isfinite(v); });
  }

  bool operator==(const Volume& o) const { return shape_ == o.shape_ && data_ == o.data_; }

 private:
  Shape shape_;
  std::vector<T> data_;
};

/// Stack single-item volumes of identical shape along the batch axis.
template <typename T>
Volume<T> stack_batch(std::span<const Volume<T>> items) {
  if (items.empty()) throw ShapeError("stack_batch: no items");
  Shape s = items.front().shape();
  const std::size_t per = s.numel();
  std::vector<T> data;
  data.reserve(per * items.size());
  for (const auto& v : items) {
    if (v.shape() != s) throw ShapeError("stack_batch: mismatched item " + v.shape().str());
    data.insert(data.end(), v.data().begin(), v.data().end());
  }
  s.batch *= items.size();
  return Volume<T>(s, std::move(data));
}

}  // namespace pcsa
