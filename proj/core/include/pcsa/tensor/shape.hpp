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

#include <array>
#include <cstddef>
#include <string>

#include "pcsa/tensor/errors.hpp"

namespace pcsa {

/// Extents of a rank-5 volume in (batch, channel, depth, height, width) order.
struct Shape {
  std::size_t batch = 1;
  std::size_t channels = 1;
  std::size_t depth = 1;
  std::size_t height = 1;
  std::size_t width = 1;

  constexpr std::size_t spatial() const { return depth * height * width; }
  constexpr std::size_t item_size() const { return channels * spatial(); }
  constexpr std::size_t numel() const { return batch * item_size(); }

  constexpr std::array<std::size_t, 5> dims() const {
    return {batch, channels, depth, height, width};
  }
  static constexpr Shape from_dims(const std::array<std::size_t, 5>& d) {
    return {d[0], d[1], d[2], d[3], d[4]};
  }

  constexpr bool valid() const {
    return batch >= 1 && channels >= 1 && depth >= 1 && height >= 1 && width >= 1;
  }
  void validate() const {
    if (!valid()) throw ShapeError("shape extents must all be >= 1, got " + str());
  }

  constexpr bool same_spatial(const Shape& o) const {
    return depth == o.depth && height == o.height && width == o.width;
  }

  std::string str() const {
    return "(" + std::to_string(batch) + "," + std::to_string(channels) + "," +
           std::to_string(depth) + "," + std::to_string(height) + "," +
           std::to_string(width) + ")";
  }

  constexpr bool operator==(const Shape&) const = default;
};

/// Cubic single-item shape helper: (1, channels, edge, edge, edge).
constexpr Shape cube(std::size_t channels, std::size_t edge, std::size_t batch = 1) {
  return {batch, channels, edge, edge, edge};
}

}  // namespace pcsa
