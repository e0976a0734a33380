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


#include "ablation.hpp"

#include <algorithm>
#include <array>
#include <set>

#include "json.hpp"

namespace pcsa::cli {
namespace {

using Json = nlohmann::json;

struct ComboInfo {
  LossCombo combo;
  std::string_view name;
  std::string_view label;
};

constexpr std::array<ComboInfo, 5> kCombos = {{
    {LossCombo::kAdv, "adv", "Adversarial Loss"},
    {LossCombo::kAdvMae, "adv+mae", "MAE"},
    {LossCombo::kAdvMsssim, "adv+msssim", "MM-SSIM"},
    {LossCombo::kAdvMaeSsim, "adv+mae+ssim", "MAE+SSIM"},
    {LossCombo::kAdvMaeMsssim, "adv+mae+msssim", "MAE+MM-SSIM"},
}};

const ComboInfo& info(LossCombo c) {
  return *std::find_if(kCombos.begin(), kCombos.end(), [c](const ComboInfo& i) { return i.combo == c; });
}

void require_keys(const Json& j, const std::string& path, std::initializer_list<std::string_view> keys) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  for (const auto& [k, v] : j.items()) {
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
      throw ConfigError(path.empty() ? k : path + "." + k, "unknown key");
    }
  }
}

std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

std::string get_string(const Json& j, const std::string& key) {
  if (!j.is_string()) throw ConfigError(key, "expected a string");
  return j.get<std::string>();
}

std::size_t get_count(const Json& j, const std::string& key) {
  if (!j.is_number_unsigned()) throw ConfigError(key, "expected a non-negative integer");
  return j.get<std::size_t>();
}

net::Variant get_generator(const Json& j, const std::string& key) {
  try {
    return net::parse_variant(get_string(j, key));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(key, e.what());
  }
}

LossCombo get_combo(const Json& j, const std::string& key) {
  try {
    return parse_loss_combo(get_string(j, key));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(key, e.what());
  }
}

std::string default_name(const AblationVariant& v) {
  std::string name(net::to_string(v.generator));
  if (v.sa_stage) name += ".sa" + std::to_string(*v.sa_stage);
  if (v.sa_patch_edge) name += "p" + std::to_string(*v.sa_patch_edge);
  return name + "." + std::string(to_string(v.losses));
}

}  // namespace

std::string_view to_string(LossCombo c) { return info(c).name; }
std::string_view table_label(LossCombo c) { return info(c).label; }

LossCombo parse_loss_combo(std::string_view name) {
  for (const auto& i : kCombos)
    if (i.name == name) return i.combo;
  throw std::invalid_argument("unknown loss combination '" + std::string(name) +
                              "' (expected adv, adv+mae, adv+msssim, adv+mae+ssim or adv+mae+msssim)");
}

std::vector<LossCombo> all_loss_combos() {
  std::vector<LossCombo> out;
  for (const auto& i : kCombos) out.push_back(i.combo);
  return out;
}

void apply_loss_combo(LossCombo c, train::RunConfig& config) {
  const bool mae = c == LossCombo::kAdvMae || c == LossCombo::kAdvMaeSsim || c == LossCombo::kAdvMaeMsssim;
  const bool structural = c != LossCombo::kAdv && c != LossCombo::kAdvMae;
  if (!mae) config.loss_weights.beta = 0.0;
  if (!structural) config.loss_weights.gamma = 0.0;
  if (c == LossCombo::kAdvMaeSsim) config.ssim = metrics::SSIMConfig::single_scale();
}

AblationPlan AblationPlan::parse(std::string_view json_text) {
  Json doc;
  try {
    doc = Json::parse(json_text);
  } catch (const Json::parse_error& e) {
    throw ConfigError("", std::string("malformed plan: ") + e.what());
  }
  require_keys(doc, "", {"variants", "grid", "seeds", "eval_split", "config"});
  AblationPlan plan;
  if (doc.contains("config")) {
    if (!doc["config"].is_object()) throw ConfigError("config", "expected an object");
    plan.config_json = doc["config"].dump();
  }
  if (doc.contains("eval_split")) plan.eval_split = get_string(doc["eval_split"], "eval_split");
  if (doc.contains("seeds")) {
    if (!doc["seeds"].is_array()) throw ConfigError("seeds", "expected an array");
    for (std::size_t i = 0; i < doc["seeds"].size(); ++i) {
      const std::string key = "seeds[" + std::to_string(i) + "]";
      if (!doc["seeds"][i].is_number_unsigned()) throw ConfigError(key, "expected a non-negative integer");
      plan.seeds.push_back(doc["seeds"][i].get<std::uint64_t>());
    }
  }
  if (doc.contains("variants")) {
    if (!doc["variants"].is_array()) throw ConfigError("variants", "expected an array");
    for (std::size_t i = 0; i < doc["variants"].size(); ++i) {
      const std::string path = "variants[" + std::to_string(i) + "]";
      const Json& j = doc["variants"][i];
      require_keys(j, path, {"name", "generator", "sa_stage", "sa_patch_edge", "losses"});
      AblationVariant v;
      if (j.contains("generator")) v.generator = get_generator(j["generator"], join(path, "generator"));
      if (j.contains("sa_stage")) v.sa_stage = get_count(j["sa_stage"], join(path, "sa_stage"));
      if (j.contains("sa_patch_edge")) v.sa_patch_edge = get_count(j["sa_patch_edge"], join(path, "sa_patch_edge"));
      if (j.contains("losses")) v.losses = get_combo(j["losses"], join(path, "losses"));
      v.name = j.contains("name") ? get_string(j["name"], join(path, "name")) : default_name(v);
      plan.variants.push_back(std::move(v));
    }
  }
  if (doc.contains("grid")) {
    const Json& g = doc["grid"];
    require_keys(g, "grid", {"generators", "sa", "losses"});
    std::vector<net::Variant> gens = {net::Variant::kFull};
    std::vector<std::optional<std::pair<std::size_t, std::size_t>>> sa = {std::nullopt};
    std::vector<LossCombo> losses = {LossCombo::kAdvMaeMsssim};
    auto array_at = [&](const char* key) -> const Json& {
      if (!g[key].is_array() || g[key].empty()) throw ConfigError(std::string("grid.") + key, "expected a non-empty array");
      return g[key];
    };
    if (g.contains("generators")) {
      gens.clear();
      const Json& a = array_at("generators");
      for (std::size_t i = 0; i < a.size(); ++i)
        gens.push_back(get_generator(a[i], "grid.generators[" + std::to_string(i) + "]"));
    }
    if (g.contains("sa")) {
      sa.clear();
      const Json& a = array_at("sa");
      for (std::size_t i = 0; i < a.size(); ++i) {
        const std::string key = "grid.sa[" + std::to_string(i) + "]";
        if (!a[i].is_array() || a[i].size() != 2) throw ConfigError(key, "expected [stage, patch_edge]");
        sa.emplace_back(std::pair{get_count(a[i][0], key), get_count(a[i][1], key)});
      }
    }
    if (g.contains("losses")) {
      losses.clear();
      const Json& a = array_at("losses");
      for (std::size_t i = 0; i < a.size(); ++i)
        losses.push_back(get_combo(a[i], "grid.losses[" + std::to_string(i) + "]"));
    }
    for (auto gen : gens)
      for (const auto& s : sa)
        for (auto l : losses) {
          AblationVariant v;
          v.generator = gen;
          v.losses = l;
          if (s) {
            v.sa_stage = s->first;
            v.sa_patch_edge = s->second;
          }
          v.name = default_name(v);
          plan.variants.push_back(std::move(v));
        }
  }
  plan.validate();
  return plan;
}

void AblationPlan::validate() const {
  if (variants.empty()) throw ConfigError("variants", "plan has no variants");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < variants.size(); ++i) {
    const std::string& name = variants[i].name;
    const std::string key = "variants[" + std::to_string(i) + "].name";
    const bool safe = !name.empty() && name != "." && name != ".." &&
                      std::all_of(name.begin(), name.end(), [](char ch) {
                        return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '.' ||
                               ch == '+' || ch == '-';
                      });
    if (!safe) throw ConfigError(key, "variant names may only use [A-Za-z0-9_.+-], got '" + name + "'");
    if (!seen.insert(name).second) throw ConfigError(key, "duplicate variant name '" + name + "'");
  }
  if (eval_split.empty()) throw ConfigError("eval_split", "must not be empty");
}

train::RunConfig AblationPlan::resolve(const AblationVariant& v, const train::RunConfig& base,
                                       std::uint64_t seed) const {
  train::RunConfig cfg = base;
  cfg.train.seed = seed;
  if (v.sa_stage) cfg.generator.sa_stage = *v.sa_stage;
  if (v.sa_patch_edge) cfg.generator.sa_patch_edge = *v.sa_patch_edge;
  cfg.variant = v.generator;
  cfg.generator = net::ablation_variant(cfg.generator, v.generator);
  apply_loss_combo(v.losses, cfg);
  cfg.validate();
  return cfg;
}

}  // namespace pcsa::cli
