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

#include "pcsa/net/config.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace pcsa::net {

std::size_t PyramidSpec::total_filters() const {
  std::size_t n = 0;
  for (const auto& b : branches) n += b.filters;
  return n;
}

void PyramidSpec::validate() const {
  if (branches.empty()) throw std::invalid_argument("pyramid spec has no branches");
  if (stride != 1 && stride != 2) throw std::invalid_argument("pyramid stride must be 1 or 2");
  for (const auto& b : branches) {
    if (b.kernel % 2 == 0) {
      throw std::invalid_argument("pyramid kernel edge must be odd, got " + std::to_string(b.kernel));
    }
    if (b.filters == 0) throw std::invalid_argument("pyramid branch needs at least one filter");
  }
}

void GeneratorConfig::validate() const {
  if (kind == GeneratorKind::kIdentity) return;
  for (const auto& p : pcca) {
    p.validate();
    if (p.stride != 1) throw std::invalid_argument("pyramid block stride must be 1 (downsampling is by pooling)");
  }
  deep_stage.validate();
  if (deep_stage.branches.size() != 1) {
    throw std::invalid_argument("deep stage must have exactly one branch");
  }
  if (deep_stage.stride != 2) throw std::invalid_argument("deep stage stride must be 2");
  if (ca_reduction == 0) throw std::invalid_argument("ca_reduction must be >= 1");
  if (sa_stage > 2) throw std::invalid_argument("sa_stage must be 0, 1 or 2");
  if (sa_patch_edge == 0) throw std::invalid_argument("sa_patch_edge must be >= 1");
  if (head_channels == 0) throw std::invalid_argument("head_channels must be >= 1");
  if (!std::isfinite(output_bias)) throw std::invalid_argument("output_bias must be finite");
}

namespace {
void describe_pyramid(std::ostream& os, const PyramidSpec& p) {
  os << "[";
  for (const auto& b : p.branches) os << b.kernel << "x" << b.filters << ",";
  os << "s" << p.stride << "]";
}
}  // namespace

std::string GeneratorConfig::describe() const {
  std::ostringstream os;
  if (kind == GeneratorKind::kIdentity) return "generator:identity";
  os << "generator:pcsa";
  describe_pyramid(os, pcca[0]);
  describe_pyramid(os, pcca[1]);
  describe_pyramid(os, deep_stage);
  os << ";ca=" << channel_attention << "/" << ca_reduction << "/" << ca_inner_sigmoid
     << ";sa=" << self_attention << "/" << sa_stage << "/" << sa_patch_edge
     << ";skip=" << skip_connections << ";detail=" << trilinear_detail
     << ";head=" << head_channels;
  return os.str();
}

void DiscriminatorConfig::validate() const {
  for (std::size_t i = 1; i < channel_ladder.size(); ++i) {
    if (channel_ladder[i] <= channel_ladder[i - 1]) {
      throw std::invalid_argument("discriminator channel ladder must be strictly increasing");
    }
  }
  if (channel_ladder[0] == 0) throw std::invalid_argument("discriminator channels must be >= 1");
  if (kernel_edge % 2 == 0) throw std::invalid_argument("discriminator kernel edge must be odd");
  if (residual_from_layer < 1 || residual_from_layer > 5) {
    throw std::invalid_argument("residual_from_layer must be in [1, 5]");
  }
}

std::string DiscriminatorConfig::describe() const {
  std::ostringstream os;
  os << "discriminator:";
  for (auto c : channel_ladder) os << c << ",";
  os << "k" << kernel_edge << ";res" << residual_from_layer << ";cond=" << conditional;
  return os.str();
}

Variant parse_variant(std::string_view name) {
  if (name == "full") return Variant::kFull;
  if (name == "pca_only") return Variant::kPcaOnly;
  if (name == "sa_only") return Variant::kSaOnly;
  throw std::invalid_argument("unknown architecture variant '" + std::string(name) +
                              "' (expected full, pca_only or sa_only)");
}

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::kFull: return "full";
    case Variant::kPcaOnly: return "pca_only";
    case Variant::kSaOnly: return "sa_only";
  }
  return "full";
}

GeneratorConfig ablation_variant(GeneratorConfig config, Variant variant) {
  switch (variant) {
    case Variant::kFull:
      break;
    case Variant::kPcaOnly:
      config.self_attention = false;
      break;
    case Variant::kSaOnly:
      for (auto& p : config.pcca) p.branches = {PyramidBranch{3, p.total_filters()}};
      config.channel_attention = false;
      config.self_attention = true;
      break;
  }
  return config;
}

}  // namespace pcsa::net
