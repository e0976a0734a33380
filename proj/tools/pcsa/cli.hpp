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
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pcsa::cli {

/// Process exit codes. Stable; documented in the README.
enum ExitCode : int {
  kExitOk = 0,
  kExitSelfcheckFailed = 1,
  kExitConfigError = 2,
  kExitIoError = 3,
  kExitNumericAbort = 4,
  kExitFingerprintMismatch = 5,
  kExitPartialAblation = 6,
};

/// Filesystem trouble the command cannot recover from (exit 3).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unusable input file or argument (exit 2).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct SynthDataOptions {
  std::optional<std::filesystem::path> config;
  std::filesystem::path out;
  bool force = false;
};

struct TrainOptions {
  std::optional<std::filesystem::path> config;
  std::filesystem::path data;
  std::filesystem::path out;
  std::optional<std::filesystem::path> resume;
  /// Overrides train.steps.
  std::optional<std::uint64_t> steps;
};

struct EvalOptions {
  std::filesystem::path checkpoint;
  std::filesystem::path data;
  std::filesystem::path out;
  std::string split = "test";
  /// When given, its architecture must match the checkpoint.
  std::optional<std::filesystem::path> config;
};

struct InferOptions {
  std::filesystem::path checkpoint;
  std::filesystem::path in;
  std::filesystem::path out;
  std::optional<std::filesystem::path> config;
};

struct AblateOptions {
  std::filesystem::path plan;
  std::optional<std::filesystem::path> config;
  std::filesystem::path data;
  std::filesystem::path out;
};

struct SelfcheckOptions {
  /// Test hook: "conv_backward" scales conv3d weight gradients so the
  /// gradient suite must fail.
  std::string inject_fault;
};

// Each command returns an exit code for outcomes it reports itself (selfcheck
// failures, partial ablations) and throws for everything else; run() maps
// exceptions to codes.
int cmd_synth_data(const SynthDataOptions& o, std::ostream& out);
int cmd_train(const TrainOptions& o, std::ostream& out);
int cmd_eval(const EvalOptions& o, std::ostream& out);
int cmd_infer(const InferOptions& o, std::ostream& out);
int cmd_ablate(const AblateOptions& o, std::ostream& out);
int cmd_selfcheck(const SelfcheckOptions& o, std::ostream& out);

/// Full command line including argv[0]. Never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pcsa::cli
