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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pcsa/train/run_config.hpp"

namespace pcsa::cli {

/// Generator objective combinations compared by the loss ablation. Every
/// combination keeps the adversarial term.
enum class LossCombo { kAdv, kAdvMae, kAdvMsssim, kAdvMaeSsim, kAdvMaeMsssim };

/// Plan spelling: "adv", "adv+mae", "adv+msssim", "adv+mae+ssim", "adv+mae+msssim".
std::string_view to_string(LossCombo c);
/// Row label of the published loss table: "Adversarial Loss", "MAE",
/// "MM-SSIM", "MAE+SSIM", "MAE+MM-SSIM".
std::string_view table_label(LossCombo c);
LossCombo parse_loss_combo(std::string_view name);
std::vector<LossCombo> all_loss_combos();

/// Zeroes the weights of absent terms (the rest keep the base magnitudes)
/// and picks single-scale SSIM or the base MS-SSIM as the structural loss.
void apply_loss_combo(LossCombo c, train::RunConfig& config);

struct AblationVariant {
  std::string name;
  net::Variant generator = net::Variant::kFull;
  std::optional<std::size_t> sa_stage;
  std::optional<std::size_t> sa_patch_edge;
  LossCombo losses = LossCombo::kAdvMaeMsssim;
};

/// A list of variants trained under identical seeds and budgets. The JSON
/// form holds explicit "variants", a "grid" expanded as the cross product
/// generators x sa x losses, or both:
///   {"seeds": [7], "eval_split": "test", "config": {...},
///    "variants": [{"name": "full", "generator": "full", "losses": "adv+mae+msssim"}],
///    "grid": {"generators": ["full", "pca_only"], "sa": [[0, 1], [1, 2]],
///             "losses": ["adv", "adv+mae"]}}
struct AblationPlan {
  std::vector<AblationVariant> variants;
  /// Training seeds; every variant runs once per seed. Empty = base seed.
  std::vector<std::uint64_t> seeds;
  std::string eval_split = "test";
  /// Embedded run config document, if the plan carries one.
  std::optional<std::string> config_json;

  /// Strict parse; unknown keys and malformed entries raise ConfigError with
  /// the dotted key ("variants[2].losses").
  static AblationPlan parse(std::string_view json_text);
  /// Unique, filesystem-safe names ([A-Za-z0-9_.+-]), at least one variant.
  void validate() const;
  /// The run config of one variant for one seed.
  train::RunConfig resolve(const AblationVariant& v, const train::RunConfig& base,
                           std::uint64_t seed) const;
};

}  // namespace pcsa::cli
