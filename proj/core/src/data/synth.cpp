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

#include "pcsa/data/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "pcsa/tensor/rng.hpp"

namespace pcsa::data {

void SyntheticSpec::validate() const {
  if (edge == 0 || edge % 8 != 0) {
    throw std::invalid_argument("synthetic edge must be a positive multiple of 8, got " +
                                std::to_string(edge));
  }
  if (blob_count_range.first > blob_count_range.second) {
    throw std::invalid_argument("synthetic blob_count_range must have min <= max");
  }
  if (!(blob_sigma_range.first > 0.0) || blob_sigma_range.first > blob_sigma_range.second) {
    throw std::invalid_argument("synthetic blob_sigma_range must be positive with min <= max");
  }
}

Normalized minmax_normalize(const Volume<float>& v) {
  Normalized out{Volume<float>(v.shape()), false};
  if (v.size() == 0) return out;
  const auto [lo_it, hi_it] = std::minmax_element(v.data().begin(), v.data().end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (!(hi > lo)) {
    out.degenerate = true;
    return out;
  }
  const double range = hi - lo;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.volume[i] = static_cast<float>((static_cast<double>(v[i]) - lo) / range);
  }
  return out;
}

Volume<float> gen_source(const SyntheticSpec& spec, std::uint64_t seed) {
  spec.validate();
  const CounterRng rng = CounterRng(seed).stream("source");
  std::uint64_t counter = 0;
  const std::size_t e = spec.edge;
  const double edge = static_cast<double>(e);
  std::vector<double> field(e * e * e, 0.0);

  const auto blobs = static_cast<std::size_t>(
      rng.uniform_int(counter++, static_cast<std::int64_t>(spec.blob_count_range.first),
                      static_cast<std::int64_t>(spec.blob_count_range.second)));
  for (std::size_t b = 0; b < blobs; ++b) {
    const double cz = rng.uniform(counter++, 0.0, edge);
    const double cy = rng.uniform(counter++, 0.0, edge);
    const double cx = rng.uniform(counter++, 0.0, edge);
    const double sigma = rng.uniform(counter++, spec.blob_sigma_range.first, spec.blob_sigma_range.second);
    const double amp = rng.uniform(counter++, 0.5, 1.0);
    const double inv = 1.0 / (2.0 * sigma * sigma);
    std::size_t i = 0;
    for (std::size_t d = 0; d < e; ++d) {
      for (std::size_t h = 0; h < e; ++h) {
        for (std::size_t w = 0; w < e; ++w, ++i) {
          const double dz = static_cast<double>(d) - cz;
          const double dy = static_cast<double>(h) - cy;
          const double dx = static_cast<double>(w) - cx;
          field[i] += amp * std::exp(-(dz * dz + dy * dy + dx * dx) * inv);
        }
      }
    }
  }

  const double r_hi = std::max(1.5, edge / 5.0);
  for (std::size_t c = 0; c < spec.cavity_count; ++c) {
    const double cz = rng.uniform(counter++, 0.2 * edge, 0.8 * edge);
    const double cy = rng.uniform(counter++, 0.2 * edge, 0.8 * edge);
    const double cx = rng.uniform(counter++, 0.2 * edge, 0.8 * edge);
    const double rz = rng.uniform(counter++, 1.5, r_hi);
    const double ry = rng.uniform(counter++, 1.5, r_hi);
    const double rx = rng.uniform(counter++, 1.5, r_hi);
    std::size_t i = 0;
    for (std::size_t d = 0; d < e; ++d) {
      for (std::size_t h = 0; h < e; ++h) {
        for (std::size_t w = 0; w < e; ++w, ++i) {
          const double z = (static_cast<double>(d) - cz) / rz;
          const double y = (static_cast<double>(h) - cy) / ry;
          const double x = (static_cast<double>(w) - cx) / rx;
          if (z * z + y * y + x * x <= 1.0) field[i] *= 0.2;
        }
      }
    }
  }

  Volume<float> raw(cube(1, e));
  for (std::size_t i = 0; i < field.size(); ++i) raw[i] = static_cast<float>(field[i]);
  return minmax_normalize(raw).volume;
}

namespace {
std::size_t mirror(std::ptrdiff_t i, std::size_t n) {
  if (n == 1) return 0;
  const auto m = static_cast<std::ptrdiff_t>(n);
  if (i < 0) i = -i;
  if (i >= m) i = 2 * (m - 1) - i;
  return static_cast<std::size_t>(i);
}
}  // namespace

Volume<float> modality_transform(const Volume<float>& source) {
  const Shape s = source.shape();
  Volume<float> filtered(s);
  const std::size_t items = s.batch * s.channels;
  const std::size_t plane = s.height * s.width;
  for (std::size_t nc = 0; nc < items; ++nc) {
    const float* src = source.raw() + nc * s.spatial();
    float* dst = filtered.raw() + nc * s.spatial();
    for (std::size_t d = 0; d < s.depth; ++d) {
      for (std::size_t h = 0; h < s.height; ++h) {
        for (std::size_t w = 0; w < s.width; ++w) {
          double total = 0.0;
          for (int dd = -1; dd <= 1; ++dd) {
            const std::size_t z = mirror(static_cast<std::ptrdiff_t>(d) + dd, s.depth);
            for (int dh = -1; dh <= 1; ++dh) {
              const std::size_t y = mirror(static_cast<std::ptrdiff_t>(h) + dh, s.height);
              for (int dw = -1; dw <= 1; ++dw) {
                const std::size_t x = mirror(static_cast<std::ptrdiff_t>(w) + dw, s.width);
                const double v = src[z * plane + y * s.width + x];
                total += v * v;
              }
            }
          }
          dst[d * plane + h * s.width + w] = static_cast<float>(total / 27.0);
        }
      }
    }
  }
  return minmax_normalize(filtered).volume;
}

VolumePair make_pair(const SyntheticSpec& spec, std::uint64_t seed) {
  Volume<float> source = gen_source(spec, seed);
  Volume<float> target = modality_transform(source);
  return {std::move(source), std::move(target), seed};
}

}  // namespace pcsa::data
