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


#include <algorithm>
#include <ostream>

#include "CLI11.hpp"
#include "cli.hpp"
#include "pcsa/data/volume_io.hpp"
#include "pcsa/train/trainer.hpp"

namespace pcsa::cli {
namespace {

// Optional path flag: CLI11 fills the string, the command sees an optional.
struct OptPath {
  std::string text;
  std::optional<std::filesystem::path> get() const {
    return text.empty() ? std::nullopt : std::optional<std::filesystem::path>(text);
  }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"PCSA-GAN: sMRI-to-PET surrogate volume translation", "pcsa"};
  app.require_subcommand(1);

  SynthDataOptions synth;
  OptPath synth_config;
  std::string synth_out;
  auto* sc_synth = app.add_subcommand("synth-data", "Generate a synthetic paired dataset");
  sc_synth->add_option("--config", synth_config.text, "Run config (JSON)");
  sc_synth->add_option("--out", synth_out, "Dataset directory")->required();
  sc_synth->add_flag("--force", synth.force, "Overwrite a non-empty output directory");

  TrainOptions train;
  OptPath train_config, train_resume;
  std::string train_data, train_out;
  std::uint64_t train_steps = 0;
  auto* sc_train = app.add_subcommand("train", "Train the GAN on a dataset");
  sc_train->add_option("--config", train_config.text, "Run config (JSON)");
  sc_train->add_option("--data", train_data, "Dataset directory")->required();
  sc_train->add_option("--out", train_out, "Run directory")->required();
  sc_train->add_option("--resume", train_resume.text, "Checkpoint to continue from");
  auto* steps_opt = sc_train->add_option("--steps", train_steps, "Override train.steps");

  EvalOptions eval;
  OptPath eval_config;
  std::string eval_ckpt, eval_data, eval_out;
  auto* sc_eval = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset split");
  sc_eval->add_option("--checkpoint", eval_ckpt, "Checkpoint file")->required();
  sc_eval->add_option("--data", eval_data, "Dataset directory")->required();
  sc_eval->add_option("--out", eval_out, "Report directory")->required();
  sc_eval->add_option("--split", eval.split, "Split to evaluate")->capture_default_str();
  sc_eval->add_option("--config", eval_config.text, "Config whose architecture must match the checkpoint");

  InferOptions infer;
  OptPath infer_config;
  std::string infer_ckpt, infer_in, infer_out;
  auto* sc_infer = app.add_subcommand("infer", "Generate a PET surrogate from one sMRI surrogate volume");
  sc_infer->add_option("--checkpoint", infer_ckpt, "Checkpoint file")->required();
  sc_infer->add_option("--in", infer_in, "Input volume file")->required();
  sc_infer->add_option("--out", infer_out, "Output volume file")->required();
  sc_infer->add_option("--config", infer_config.text, "Config whose architecture must match the checkpoint");

  AblateOptions ablate;
  OptPath ablate_config;
  std::string ablate_plan, ablate_data, ablate_out;
  auto* sc_ablate = app.add_subcommand("ablate", "Train and evaluate every variant of an ablation plan");
  sc_ablate->add_option("--plan", ablate_plan, "Ablation plan (JSON)")->required();
  sc_ablate->add_option("--config", ablate_config.text, "Base run config (JSON)");
  sc_ablate->add_option("--data", ablate_data, "Dataset directory")->required();
  sc_ablate->add_option("--out", ablate_out, "Output directory")->required();

  SelfcheckOptions selfcheck;
  auto* sc_self = app.add_subcommand("selfcheck", "Gradient, SSIM oracle and shape checks");
  // Hidden: an empty group name keeps the option out of --help.
  sc_self->add_option("--inject-fault", selfcheck.inject_fault)->group("");

  std::vector<std::string> argv(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
  std::reverse(argv.begin(), argv.end());
  try {
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    // Help and version requests carry exit code 0.
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    app.exit(e, err, err);
    return kExitConfigError;
  }

  try {
    if (sc_synth->parsed()) {
      synth.config = synth_config.get();
      synth.out = synth_out;
      return cmd_synth_data(synth, out);
    }
    if (sc_train->parsed()) {
      train.config = train_config.get();
      train.resume = train_resume.get();
      train.data = train_data;
      train.out = train_out;
      if (steps_opt->count()) train.steps = train_steps;
      return cmd_train(train, out);
    }
    if (sc_eval->parsed()) {
      eval.config = eval_config.get();
      eval.checkpoint = eval_ckpt;
      eval.data = eval_data;
      eval.out = eval_out;
      return cmd_eval(eval, out);
    }
    if (sc_infer->parsed()) {
      infer.config = infer_config.get();
      infer.checkpoint = infer_ckpt;
      infer.in = infer_in;
      infer.out = infer_out;
      return cmd_infer(infer, out);
    }
    if (sc_ablate->parsed()) {
      ablate.config = ablate_config.get();
      ablate.plan = ablate_plan;
      ablate.data = ablate_data;
      ablate.out = ablate_out;
      return cmd_ablate(ablate, out);
    }
    return cmd_selfcheck(selfcheck, out);
  } catch (const train::NumericAbort& e) {
    err << "numeric abort at step " << e.step() << " (batch seeds";
    for (auto s : e.batch_seeds()) err << " " << s;
    err << "): " << e.what() << "\n";
    return kExitNumericAbort;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << "\n";
    return kExitNumericAbort;
  } catch (const train::FingerprintMismatch& e) {
    err << "fingerprint mismatch: " << e.what() << "\n";
    return kExitFingerprintMismatch;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const data::VolumeIoError& e) {
    err << "volume file error: " << e.what() << "\n";
    return e.code() == data::VolumeIoErrc::kIo ? kExitIoError : kExitConfigError;
  } catch (const std::exception& e) {
    // IoError, CheckpointError, filesystem errors and anything unexpected.
    err << "error: " << e.what() << "\n";
    return kExitIoError;
  }
}

}  // namespace pcsa::cli
