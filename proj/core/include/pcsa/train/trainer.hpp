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

#include <filesystem>
#include <memory>
#include <optional>
#include <vector>

#include "pcsa/net/generator.hpp"
#include "pcsa/train/adam.hpp"
#include "pcsa/train/run_config.hpp"

namespace pcsa::train {

struct StepLosses {
  double loss_d = 0.0;
  double loss_adv_g = 0.0;
  double loss_l1 = 0.0;
  double loss_structural = 0.0;
};

struct ValMetrics {
  double mae = 0.0;
  double psnr = 0.0;
  double ssim = 0.0;
};

struct HistoryRow {
  std::uint64_t step = 0;
  StepLosses losses;
  std::optional<ValMetrics> val;
};

/// A loss went NaN/Inf. Carries the step and the seeds of the batch.
class NumericAbort : public NumericError {
 public:
  NumericAbort(std::uint64_t step, std::vector<std::uint64_t> seeds, const std::string& what);
  std::uint64_t step() const { return step_; }
  const std::vector<std::uint64_t>& batch_seeds() const { return seeds_; }

 private:
  std::uint64_t step_;
  std::vector<std::uint64_t> seeds_;
};

class FingerprintMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Corrupt or unreadable checkpoint.
class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Pair indices for a step: a per-epoch Fisher-Yates permutation keyed by
/// (seed, epoch), consumed batch_size at a time and wrapping modulo n.
std::vector<std::size_t> batch_indices(std::uint64_t seed, std::uint64_t step, std::size_t n,
                                       std::size_t batch_size);

/// Header row of metrics.csv.
inline constexpr std::string_view kMetricsHeader =
    "step,loss_d,loss_adv_g,loss_l1,loss_msssim,val_mae,val_psnr,val_ssim";
std::string metrics_row(const HistoryRow& row);

/// Owns both networks, their optimisers and the run history.
class Trainer {
 public:
  explicit Trainer(RunConfig config);

  /// One D-then-G step on a batch. Increments step(); appends to history()
  /// without validation metrics.
  StepLosses train_step(const Volume<float>& source, const Volume<float>& target,
                        std::span<const std::uint64_t> batch_seeds = {});

  /// Generator output without gradient tracking, processed in chunks of
  /// batch_size items.
  Volume<float> generate(const Volume<float>& source) const;
  ValMetrics validate(std::span<const data::VolumePair> pairs) const;

  const RunConfig& config() const { return config_; }
  std::uint64_t step() const { return step_; }
  std::vector<HistoryRow>& history() { return history_; }
  const std::vector<HistoryRow>& history() const { return history_; }
  net::Generator<float>& generator() { return *generator_; }
  const net::Generator<float>& generator() const { return *generator_; }
  net::Discriminator<float>& discriminator() { return *discriminator_; }
  const net::Discriminator<float>& discriminator() const { return *discriminator_; }
  Adam& adam_generator() { return *adam_g_; }
  Adam& adam_discriminator() { return *adam_d_; }

  /// Hash over both architectures' descriptions and parameter manifests.
  std::uint64_t fingerprint() const;

  /// Single-file checkpoint: magic "PCSACKPT", u64 manifest length, JSON
  /// manifest (fingerprint, resolved config, step, history, tensor table),
  /// then each tensor as little-endian f32 in table order.
  std::string encode_checkpoint() const;
  void save_checkpoint(const std::filesystem::path& path) const;

  /// Rebuilds the trainer from a checkpoint using its embedded config.
  static Trainer load(const std::filesystem::path& path);
  /// Rebuilds with `config`; throws FingerprintMismatch when its architecture
  /// differs from the checkpoint's.
  static Trainer load(const std::filesystem::path& path, const RunConfig& config);
  /// Resolved config stored in a checkpoint.
  static RunConfig checkpoint_config(const std::filesystem::path& path);

 private:
  void restore(std::string_view payload, std::size_t offset, const std::string& manifest_json);

  RunConfig config_;
  std::unique_ptr<net::Generator<float>> generator_;
  std::unique_ptr<net::Discriminator<float>> discriminator_;
  std::unique_ptr<Adam> adam_g_;
  std::unique_ptr<Adam> adam_d_;
  std::uint64_t step_ = 0;
  std::vector<HistoryRow> history_;
};

struct LoopOptions {
  /// Run directory; receives metrics.csv and checkpoints/.
  std::filesystem::path out_dir;
  /// Print one progress line per validation to this stream when set.
  std::ostream* progress = nullptr;
};

/// Trains from trainer.step() up to config.train.steps, validating and
/// checkpointing on schedule, then writes checkpoints/final.ckpt and the full
/// metrics.csv (history included, so resumed runs produce the same file).
void train_loop(Trainer& trainer, std::span<const data::VolumePair> train_pairs,
                std::span<const data::VolumePair> val_pairs, const LoopOptions& options);

}  // namespace pcsa::train
