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
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "pcsa/data/synth.hpp"

namespace pcsa::data {

inline constexpr std::string_view kSourceModality = "sMRI-surrogate";
inline constexpr std::string_view kTargetModality = "PET-surrogate";

class OverlappingSplitError : public std::invalid_argument {
 public:
  explicit OverlappingSplitError(const std::string& what) : std::invalid_argument(what) {}
};

/// Split name -> seed list. Standard splits are "train", "val" and "test".
struct DatasetManifest {
  SyntheticSpec spec;
  std::map<std::string, std::vector<std::uint64_t>> splits;

  /// Consecutive seeds base_seed, base_seed + 1, ... assigned train, val, test.
  static DatasetManifest from_counts(const SyntheticSpec& spec, std::size_t train, std::size_t val,
                                     std::size_t test, std::uint64_t base_seed);

  /// Throws OverlappingSplitError if a seed appears twice anywhere.
  void validate() const;
  std::size_t pair_count() const;

  std::string to_json() const;
  static DatasetManifest from_json(std::string_view text);
  bool operator==(const DatasetManifest&) const = default;
};

std::filesystem::path source_path(const std::filesystem::path& root, std::string_view split,
                                  std::uint64_t seed);
std::filesystem::path target_path(const std::filesystem::path& root, std::string_view split,
                                  std::uint64_t seed);

/// Writes every pair plus root/manifest.json. Existing files are overwritten.
void build_dataset(const DatasetManifest& manifest, const std::filesystem::path& root);

/// A materialised dataset on disk.
class Dataset {
 public:
  static Dataset open(const std::filesystem::path& root);

  const DatasetManifest& manifest() const { return manifest_; }
  const std::filesystem::path& root() const { return root_; }
  /// Seeds of a split; throws std::out_of_range for unknown names.
  const std::vector<std::uint64_t>& seeds(std::string_view split) const;
  VolumePair load_pair(std::string_view split, std::uint64_t seed) const;
  std::vector<VolumePair> load_split(std::string_view split) const;

 private:
  DatasetManifest manifest_;
  std::filesystem::path root_;
};

}  // namespace pcsa::data
