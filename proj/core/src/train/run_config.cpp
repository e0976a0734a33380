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

#include "pcsa/train/run_config.hpp"

#include <cmath>

#include "common/json_fields.hpp"
#include "data/spec_json.hpp"

namespace pcsa::train {

using detail::Json;
using detail::read_field;
using detail::require_known_keys;

void TrainConfig::validate() const {
  if (!(lr_generator > 0.0) || !(lr_discriminator > 0.0)) {
    throw ConfigError("train", "learning rates must be > 0");
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ConfigError("train.beta1", "must be in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("train.beta2", "must be in [0, 1)");
  if (!(epsilon > 0.0)) throw ConfigError("train.epsilon", "must be > 0");
  if (batch_size == 0) throw ConfigError("train.batch_size", "must be >= 1");
  if (d_steps_per_g_step == 0) throw ConfigError("train.d_steps_per_g_step", "must be >= 1");
}

data::DatasetManifest DatasetSection::manifest(const data::SyntheticSpec& spec) const {
  if (splits.empty()) return data::DatasetManifest::from_counts(spec, train, val, test, base_seed);
  data::DatasetManifest m;
  m.spec = spec;
  m.splits = splits;
  return m;
}

namespace {

Json pyramid_to_json(const net::PyramidSpec& p) {
  Json out = Json::array();
  for (const auto& b : p.branches) out.push_back({b.kernel, b.filters});
  return out;
}

std::vector<net::PyramidBranch> pyramid_from_json(const Json& j, const std::string& key) {
  if (!j.is_array() || j.empty()) throw ConfigError(key, "expected a list of [kernel, filters] pairs");
  std::vector<net::PyramidBranch> out;
  for (const auto& b : j) {
    if (!b.is_array() || b.size() != 2 || !b[0].is_number_unsigned() || !b[1].is_number_unsigned()) {
      throw ConfigError(key, "expected a list of [kernel, filters] pairs");
    }
    out.push_back({b[0].get<std::size_t>(), b[1].get<std::size_t>()});
  }
  return out;
}

Json ssim_to_json(const metrics::SSIMConfig& s) {
  Json exps = Json::array();
  for (const auto& e : s.scale_exponents) exps.push_back({{"alpha", e.alpha}, {"beta", e.beta}, {"gamma", e.gamma}});
  return Json{{"window_edge", s.window_edge},
              {"window_kind", s.window_kind == metrics::WindowKind::kGaussian ? "gaussian" : "uniform"},
              {"sigma", s.sigma},
              {"k1", s.k1},
              {"k2", s.k2},
              {"data_range", s.data_range},
              {"auto_window", s.auto_window},
              {"exponents", exps}};
}

metrics::SSIMConfig ssim_from_json(const Json& j, const std::string& prefix, metrics::SSIMConfig s) {
  require_known_keys(j, prefix,
                     {"window_edge", "window_kind", "sigma", "k1", "k2", "data_range", "auto_window", "exponents"});
  read_field(j, prefix, "window_edge", s.window_edge);
  read_field(j, prefix, "sigma", s.sigma);
  read_field(j, prefix, "k1", s.k1);
  read_field(j, prefix, "k2", s.k2);
  read_field(j, prefix, "data_range", s.data_range);
  read_field(j, prefix, "auto_window", s.auto_window);
  std::string kind;
  read_field(j, prefix, "window_kind", kind);
  if (kind == "gaussian") {
    s.window_kind = metrics::WindowKind::kGaussian;
  } else if (kind == "uniform") {
    s.window_kind = metrics::WindowKind::kUniform;
  } else if (!kind.empty()) {
    throw ConfigError(prefix + ".window_kind", "expected \"gaussian\" or \"uniform\"");
  }
  if (const auto it = j.find("exponents"); it != j.end()) {
    const std::string key = prefix + ".exponents";
    if (!it->is_array() || it->empty()) throw ConfigError(key, "expected a non-empty list");
    s.scale_exponents.clear();
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string item_key = key + "." + std::to_string(i);
      const Json& e = (*it)[i];
      require_known_keys(e, item_key, {"alpha", "beta", "gamma"});
      metrics::ScaleExponents x;
      read_field(e, item_key, "alpha", x.alpha);
      read_field(e, item_key, "beta", x.beta);
      read_field(e, item_key, "gamma", x.gamma);
      s.scale_exponents.push_back(x);
    }
  }
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(prefix, e.what());
  }
  return s;
}

}  // namespace

RunConfig RunConfig::parse(std::string_view json_text) {
  Json root;
  try {
    root = Json::parse(json_text);
  } catch (const Json::parse_error& e) {
    throw ConfigError("", std::string("config is not valid JSON: ") + e.what());
  }
  require_known_keys(root, "",
                     {"train", "generator", "discriminator", "loss_weights", "ssim", "eval_ssim", "synthetic",
                      "dataset"});
  RunConfig c;

  if (const auto it = root.find("train"); it != root.end()) {
    const Json& j = *it;
    require_known_keys(j, "train",
                       {"lr_generator", "lr_discriminator", "beta1", "beta2", "epsilon", "batch_size", "steps",
                        "d_steps_per_g_step", "seed", "checkpoint_interval", "val_interval", "val_limit"});
    auto& t = c.train;
    read_field(j, "train", "lr_generator", t.lr_generator);
    read_field(j, "train", "lr_discriminator", t.lr_discriminator);
    read_field(j, "train", "beta1", t.beta1);
    read_field(j, "train", "beta2", t.beta2);
    read_field(j, "train", "epsilon", t.epsilon);
    read_field(j, "train", "batch_size", t.batch_size);
    read_field(j, "train", "steps", t.steps);
    read_field(j, "train", "d_steps_per_g_step", t.d_steps_per_g_step);
    read_field(j, "train", "seed", t.seed);
    read_field(j, "train", "checkpoint_interval", t.checkpoint_interval);
    read_field(j, "train", "val_interval", t.val_interval);
    read_field(j, "train", "val_limit", t.val_limit);
  }

  if (const auto it = root.find("generator"); it != root.end()) {
    const Json& j = *it;
    const std::string p = "generator";
    require_known_keys(j, p,
                       {"kind", "variant", "pcca1", "pcca2", "deep", "channel_attention", "ca_reduction",
                        "ca_inner_sigmoid", "self_attention", "sa_stage", "sa_patch_edge", "skip_connections",
                        "trilinear_detail", "head_channels", "output_bias"});
    auto& g = c.generator;
    std::string kind;
    read_field(j, p, "kind", kind);
    if (kind == "identity") {
      g.kind = net::GeneratorKind::kIdentity;
    } else if (!kind.empty() && kind != "pcsa") {
      throw ConfigError(p + ".kind", "expected \"pcsa\" or \"identity\"");
    }
    std::string variant;
    read_field(j, p, "variant", variant);
    if (!variant.empty()) {
      try {
        c.variant = net::parse_variant(variant);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(p + ".variant", e.what());
      }
    }
    if (j.contains("pcca1")) g.pcca[0].branches = pyramid_from_json(j["pcca1"], p + ".pcca1");
    if (j.contains("pcca2")) g.pcca[1].branches = pyramid_from_json(j["pcca2"], p + ".pcca2");
    if (j.contains("deep")) {
      const Json& d = j["deep"];
      if (!d.is_array() || d.size() != 2 || !d[0].is_number_unsigned() || !d[1].is_number_unsigned()) {
        throw ConfigError(p + ".deep", "expected [kernel, filters]");
      }
      g.deep_stage.branches = {{d[0].get<std::size_t>(), d[1].get<std::size_t>()}};
    }
    read_field(j, p, "channel_attention", g.channel_attention);
    read_field(j, p, "ca_reduction", g.ca_reduction);
    read_field(j, p, "ca_inner_sigmoid", g.ca_inner_sigmoid);
    read_field(j, p, "self_attention", g.self_attention);
    read_field(j, p, "sa_stage", g.sa_stage);
    read_field(j, p, "sa_patch_edge", g.sa_patch_edge);
    read_field(j, p, "skip_connections", g.skip_connections);
    read_field(j, p, "trilinear_detail", g.trilinear_detail);
    read_field(j, p, "head_channels", g.head_channels);
    read_field(j, p, "output_bias", g.output_bias);
    g = net::ablation_variant(g, c.variant);
  }

  if (const auto it = root.find("discriminator"); it != root.end()) {
    const Json& j = *it;
    require_known_keys(j, "discriminator", {"channel_ladder", "kernel_edge", "residual_from_layer", "conditional"});
    auto& d = c.discriminator;
    if (j.contains("channel_ladder")) {
      const Json& l = j["channel_ladder"];
      if (!l.is_array() || l.size() != 4) {
        throw ConfigError("discriminator.channel_ladder", "expected four channel counts");
      }
      for (std::size_t i = 0; i < 4; ++i) {
        if (!l[i].is_number_unsigned()) throw ConfigError("discriminator.channel_ladder", "expected integers");
        d.channel_ladder[i] = l[i].get<std::size_t>();
      }
    }
    read_field(j, "discriminator", "kernel_edge", d.kernel_edge);
    read_field(j, "discriminator", "residual_from_layer", d.residual_from_layer);
    read_field(j, "discriminator", "conditional", d.conditional);
  }

  if (const auto it = root.find("loss_weights"); it != root.end()) {
    require_known_keys(*it, "loss_weights", {"alpha", "beta", "gamma"});
    read_field(*it, "loss_weights", "alpha", c.loss_weights.alpha);
    read_field(*it, "loss_weights", "beta", c.loss_weights.beta);
    read_field(*it, "loss_weights", "gamma", c.loss_weights.gamma);
  }
  if (const auto it = root.find("ssim"); it != root.end()) c.ssim = ssim_from_json(*it, "ssim", c.ssim);
  if (const auto it = root.find("eval_ssim"); it != root.end()) {
    c.eval_ssim = ssim_from_json(*it, "eval_ssim", c.eval_ssim);
  }
  if (const auto it = root.find("synthetic"); it != root.end()) {
    c.synthetic = detail::spec_from_json(*it, "synthetic");
  }
  if (const auto it = root.find("dataset"); it != root.end()) {
    const Json& j = *it;
    require_known_keys(j, "dataset", {"train", "val", "test", "base_seed", "splits"});
    read_field(j, "dataset", "train", c.dataset.train);
    read_field(j, "dataset", "val", c.dataset.val);
    read_field(j, "dataset", "test", c.dataset.test);
    read_field(j, "dataset", "base_seed", c.dataset.base_seed);
    if (j.contains("splits")) {
      const Json& s = j["splits"];
      if (!s.is_object()) throw ConfigError("dataset.splits", "expected an object of seed lists");
      for (const auto& [name, seeds] : s.items()) {
        const std::string key = "dataset.splits." + name;
        if (!seeds.is_array()) throw ConfigError(key, "expected a list of seeds");
        auto& out = c.dataset.splits[name];
        for (const auto& v : seeds) {
          if (!v.is_number_unsigned()) throw ConfigError(key, "seeds must be non-negative integers");
          out.push_back(v.get<std::uint64_t>());
        }
      }
    }
  }
  c.validate();
  return c;
}

void RunConfig::validate() const {
  train.validate();
  try {
    generator.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("generator", e.what());
  }
  try {
    discriminator.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("discriminator", e.what());
  }
  try {
    loss_weights.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("loss_weights", e.what());
  }
  try {
    dataset.manifest(synthetic).validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("dataset", e.what());
  }
}

std::string RunConfig::to_json() const {
  const auto& t = train;
  const auto& g = generator;
  const auto& d = discriminator;
  Json splits = Json::object();
  for (const auto& [name, seeds] : dataset.splits) splits[name] = seeds;
  Json dataset_json{{"train", dataset.train}, {"val", dataset.val}, {"test", dataset.test},
                    {"base_seed", dataset.base_seed}};
  if (!dataset.splits.empty()) dataset_json["splits"] = splits;
  const Json root{
      {"train",
       {{"lr_generator", t.lr_generator},
        {"lr_discriminator", t.lr_discriminator},
        {"beta1", t.beta1},
        {"beta2", t.beta2},
        {"epsilon", t.epsilon},
        {"batch_size", t.batch_size},
        {"steps", t.steps},
        {"d_steps_per_g_step", t.d_steps_per_g_step},
        {"seed", t.seed},
        {"checkpoint_interval", t.checkpoint_interval},
        {"val_interval", t.val_interval},
        {"val_limit", t.val_limit}}},
      {"generator",
       {{"kind", g.kind == net::GeneratorKind::kIdentity ? "identity" : "pcsa"},
        {"variant", std::string(net::to_string(variant))},
        {"pcca1", pyramid_to_json(g.pcca[0])},
        {"pcca2", pyramid_to_json(g.pcca[1])},
        {"deep", {g.deep_stage.branches.front().kernel, g.deep_stage.branches.front().filters}},
        {"channel_attention", g.channel_attention},
        {"ca_reduction", g.ca_reduction},
        {"ca_inner_sigmoid", g.ca_inner_sigmoid},
        {"self_attention", g.self_attention},
        {"sa_stage", g.sa_stage},
        {"sa_patch_edge", g.sa_patch_edge},
        {"skip_connections", g.skip_connections},
        {"trilinear_detail", g.trilinear_detail},
        {"head_channels", g.head_channels},
        {"output_bias", g.output_bias}}},
      {"discriminator",
       {{"channel_ladder", d.channel_ladder},
        {"kernel_edge", d.kernel_edge},
        {"residual_from_layer", d.residual_from_layer},
        {"conditional", d.conditional}}},
      {"loss_weights", {{"alpha", loss_weights.alpha}, {"beta", loss_weights.beta}, {"gamma", loss_weights.gamma}}},
      {"ssim", ssim_to_json(ssim)},
      {"eval_ssim", ssim_to_json(eval_ssim)},
      {"synthetic", detail::spec_to_json(synthetic)},
      {"dataset", dataset_json},
  };
  return root.dump(2) + "\n";
}

}  // namespace pcsa::train
