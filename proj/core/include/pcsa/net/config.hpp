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
#include <string_view>
#include <vector>

namespace pcsa::net {

struct PyramidBranch {
  std::size_t kernel = 3;
  std::size_t filters = 1;
  bool operator==(const PyramidBranch&) const = default;
};

/// Parallel convolutions of different kernel edges over the same input.
struct PyramidSpec {
  std::vector<PyramidBranch> branches;
  std::size_t stride = 1;

  std::size_t total_filters() const;
  void validate() const;
  bool operator==(const PyramidSpec&) const = default;
};

enum class GeneratorKind {
  kPcsa,
  /// Returns its input unchanged; has no parameters. Used to exercise the
  /// evaluation path without training.
  kIdentity,
};

/// Generator layout. Defaults reproduce the published filter counts:
/// block 1 (7^3 x 4, 5^3 x 8, 3^3 x 12), block 2 (5^3 x 36, 3^3 x 60),
/// then a stride-2 3^3 x 192 stage.
struct GeneratorConfig {
  GeneratorKind kind = GeneratorKind::kPcsa;
  std::array<PyramidSpec, 2> pcca = {
      PyramidSpec{{{7, 4}, {5, 8}, {3, 12}}, 1},
      PyramidSpec{{{5, 36}, {3, 60}}, 1},
  };
  PyramidSpec deep_stage = PyramidSpec{{{3, 192}}, 2};

  bool channel_attention = true;
  std::size_t ca_reduction = 4;
  bool ca_inner_sigmoid = true;

  bool self_attention = true;
  /// 0 = deepest map (before the first deconvolution), 1 and 2 = inputs of
  /// the second and third deconvolutions.
  std::size_t sa_stage = 0;
  std::size_t sa_patch_edge = 1;

  bool skip_connections = true;
  bool trilinear_detail = true;
  std::size_t head_channels = 8;
  /// Initial bias of the output conv, as a logit. Zero starts every voxel at
  /// 0.5, far above the typical target, and the first coherent L1 updates
  /// drive the sigmoid into saturation. logit(0.025) sits near the median
  /// intensity of min-max normalized targets.
  double output_bias = -3.66;

  void validate() const;
  /// Canonical one-line description; part of the architecture fingerprint.
  std::string describe() const;
  bool operator==(const GeneratorConfig&) const = default;
};

struct DiscriminatorConfig {
  std::array<std::size_t, 4> channel_ladder = {24, 48, 96, 192};
  std::size_t kernel_edge = 3;
  /// First layer (1-based) that carries a shortcut connection.
  std::size_t residual_from_layer = 2;
  /// Feed (source, candidate) as two channels instead of the candidate alone.
  bool conditional = false;

  void validate() const;
  std::string describe() const;
  bool operator==(const DiscriminatorConfig&) const = default;
};

enum class Variant { kFull, kPcaOnly, kSaOnly };

Variant parse_variant(std::string_view name);
std::string_view to_string(Variant v);

/// full: unchanged. pca_only: self-attention removed. sa_only: every pyramid
/// block becomes a single 3^3 conv with the same total filter count and no
/// channel attention.
GeneratorConfig ablation_variant(GeneratorConfig config, Variant variant);

}  // namespace pcsa::net
