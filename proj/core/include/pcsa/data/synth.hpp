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

#include <cstdint>
#include <utility>

#include "pcsa/tensor/volume.hpp"

namespace pcsa::data {

/// Parameters of the synthetic source generator. Volumes are (1, 1, e, e, e).
struct SyntheticSpec {
  std::uint64_t seed = 0;
  std::size_t edge = 16;
  std::pair<std::size_t, std::size_t> blob_count_range = {3, 8};
  std::pair<double, double> blob_sigma_range = {1.5, 4.0};
  std::size_t cavity_count = 2;

  void validate() const;
  bool operator==(const SyntheticSpec&) const = default;
};

struct VolumePair {
  Volume<float> source;
  Volume<float> target;
  std::uint64_t seed = 0;
};

struct Normalized {
  Volume<float> volume;
  /// max == min; the volume was replaced by zeros.
  bool degenerate = false;
};

/// (x - min) / (max - min) over the whole volume; all zeros when max == min.
Normalized minmax_normalize(const Volume<float>& v);

/// Sum of Gaussian blobs with ellipsoidal cavities (intensity x0.2 inside),
/// min-max normalised. A pure function of (spec, seed); spec.seed is ignored.
Volume<float> gen_source(const SyntheticSpec& spec, std::uint64_t seed);

/// minmax_normalize(box3(source^2)), where box3 is the 3^3 mean filter with
/// mirror padding that excludes the edge voxel (d c b | a b c d | c b a).
Volume<float> modality_transform(const Volume<float>& source);

VolumePair make_pair(const SyntheticSpec& spec, std::uint64_t seed);

}  // namespace pcsa::data
