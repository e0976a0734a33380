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

#include "pcsa/data/dataset.hpp"

#include <fstream>
#include <sstream>
#include <unordered_map>

#include "data/spec_json.hpp"
#include "pcsa/data/volume_io.hpp"

namespace pcsa::data {

using detail::Json;

DatasetManifest DatasetManifest::from_counts(const SyntheticSpec& spec, std::size_t train,
                                             std::size_t val, std::size_t test,
                                             std::uint64_t base_seed) {
  DatasetManifest m;
  m.spec = spec;
  std::uint64_t next = base_seed;
  const auto take = [&](std::size_t n) {
    std::vector<std::uint64_t> out(n);
    for (auto& s : out) s = next++;
    return out;
  };
  m.splits["train"] = take(train);
  m.splits["val"] = take(val);
  m.splits["test"] = take(test);
  return m;
}

void DatasetManifest::validate() const {
  spec.validate();
  std::unordered_map<std::uint64_t, std::string> owner;
  for (const auto& [name, seeds] : splits) {
    if (name.empty() || name.find_first_of("/\\.") != std::string::npos) {
      throw std::invalid_argument("invalid split name '" + name + "'");
    }
    for (auto seed : seeds) {
      const auto [it, inserted] = owner.emplace(seed, name);
      if (!inserted) {
        throw OverlappingSplitError("seed " + std::to_string(seed) + " appears in both '" + it->second +
                                    "' and '" + name + "'");
      }
    }
  }
}

std::size_t DatasetManifest::pair_count() const {
  std::size_t n = 0;
  for (const auto& [name, seeds] : splits) n += seeds.size();
  return n;
}

std::string DatasetManifest::to_json() const {
  Json splits_json = Json::object();
  for (const auto& [name, seeds] : splits) splits_json[name] = seeds;
  const Json j{{"format", "pcsa-dataset"}, {"version", 1}, {"spec", detail::spec_to_json(spec)},
               {"splits", splits_json}};
  return j.dump(2) + "\n";
}

DatasetManifest DatasetManifest::from_json(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError("", std::string("manifest is not valid JSON: ") + e.what());
  }
  detail::require_known_keys(j, "", {"format", "version", "spec", "splits"});
  if (j.value("format", "") != "pcsa-dataset") throw ConfigError("format", "expected \"pcsa-dataset\"");
  DatasetManifest m;
  if (j.contains("spec")) m.spec = detail::spec_from_json(j["spec"], "spec");
  if (!j.contains("splits") || !j["splits"].is_object()) throw ConfigError("splits", "expected an object");
  for (const auto& [name, seeds] : j["splits"].items()) {
    if (!seeds.is_array()) throw ConfigError("splits." + name, "expected an array of seeds");
    auto& out = m.splits[name];
    for (const auto& s : seeds) {
      if (!s.is_number_unsigned()) throw ConfigError("splits." + name, "seeds must be non-negative integers");
      out.push_back(s.get<std::uint64_t>());
    }
  }
  m.validate();
  return m;
}

std::filesystem::path source_path(const std::filesystem::path& root, std::string_view split,
                                  std::uint64_t seed) {
  return root / std::string(split) / (std::to_string(seed) + "_source.vol");
}

std::filesystem::path target_path(const std::filesystem::path& root, std::string_view split,
                                  std::uint64_t seed) {
  return root / std::string(split) / (std::to_string(seed) + "_target.vol");
}

void build_dataset(const DatasetManifest& manifest, const std::filesystem::path& root) {
  manifest.validate();
  std::error_code ec;
  for (const auto& [name, seeds] : manifest.splits) {
    std::filesystem::create_directories(root / name, ec);
    if (ec) throw VolumeIoError(VolumeIoErrc::kIo, "cannot create " + (root / name).string() + ": " + ec.message());
    for (auto seed : seeds) {
      const VolumePair pair = make_pair(manifest.spec, seed);
      write_volume(source_path(root, name, seed), pair.source, kSourceModality, seed);
      write_volume(target_path(root, name, seed), pair.target, kTargetModality, seed);
    }
  }
  std::ofstream out(root / "manifest.json", std::ios::binary | std::ios::trunc);
  out << manifest.to_json();
  if (!out) throw VolumeIoError(VolumeIoErrc::kIo, "cannot write " + (root / "manifest.json").string());
}

Dataset Dataset::open(const std::filesystem::path& root) {
  std::ifstream in(root / "manifest.json", std::ios::binary);
  if (!in) throw VolumeIoError(VolumeIoErrc::kIo, "no manifest.json under " + root.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  Dataset d;
  d.manifest_ = DatasetManifest::from_json(buf.str());
  d.root_ = root;
  return d;
}

const std::vector<std::uint64_t>& Dataset::seeds(std::string_view split) const {
  const auto it = manifest_.splits.find(std::string(split));
  if (it == manifest_.splits.end()) {
    throw std::out_of_range("dataset has no split '" + std::string(split) + "'");
  }
  return it->second;
}

VolumePair Dataset::load_pair(std::string_view split, std::uint64_t seed) const {
  VolumeFile src = read_volume(source_path(root_, split, seed));
  VolumeFile tgt = read_volume(target_path(root_, split, seed));
  if (!(src.volume.shape() == tgt.volume.shape())) {
    throw VolumeIoError(VolumeIoErrc::kPayloadMismatch,
                        "source/target shapes differ for seed " + std::to_string(seed));
  }
  return {std::move(src.volume), std::move(tgt.volume), seed};
}

std::vector<VolumePair> Dataset::load_split(std::string_view split) const {
  std::vector<VolumePair> out;
  for (auto seed : seeds(split)) out.push_back(load_pair(split, seed));
  return out;
}

}  // namespace pcsa::data
