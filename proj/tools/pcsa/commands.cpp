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
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "ablation.hpp"
#include "cli.hpp"
#include "pcsa/data/volume_io.hpp"
#include "pcsa/metrics/metrics.hpp"
#include "pcsa/tensor/ops.hpp"
#include "pcsa/train/trainer.hpp"
#include "pcsa/verify/conformance.hpp"
#include "pcsa/verify/gradient_suite.hpp"

namespace pcsa::cli {
namespace {

namespace fs = std::filesystem;
using metrics::format_number;

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw IoError("cannot write " + path.string());
}

void make_dirs(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

struct LoadedConfig {
  train::RunConfig config;
  std::optional<std::string> raw;
};

LoadedConfig load_config(const std::optional<fs::path>& path) {
  if (!path) return {};
  std::string raw = read_text(*path);
  return {train::RunConfig::parse(raw), std::move(raw)};
}

// config.json holds the fully resolved document; config.input.json the text
// exactly as given, when there was one.
void echo_config(const fs::path& dir, const train::RunConfig& cfg, const std::optional<std::string>& raw) {
  write_text(dir / "config.json", cfg.to_json() + "\n");
  if (raw) write_text(dir / "config.input.json", *raw);
}

data::Dataset open_dataset(const fs::path& root) {
  try {
    return data::Dataset::open(root);
  } catch (const data::VolumeIoError& e) {
    if (e.code() == data::VolumeIoErrc::kIo) throw IoError(e.what());
    throw;
  }
}

std::vector<data::VolumePair> load_split(const data::Dataset& ds, const std::string& split) {
  try {
    if (ds.seeds(split).empty()) throw InputError("dataset split '" + split + "' is empty");
  } catch (const std::out_of_range&) {
    throw InputError("dataset at " + ds.root().string() + " has no split '" + split + "'");
  }
  return ds.load_split(split);
}

// "1000-1019,1030" style listing.
std::string seed_ranges(const std::vector<std::uint64_t>& seeds) {
  std::ostringstream os;
  for (std::size_t i = 0; i < seeds.size();) {
    std::size_t j = i;
    while (j + 1 < seeds.size() && seeds[j + 1] == seeds[j] + 1) ++j;
    if (i) os << ",";
    os << seeds[i];
    if (j > i) os << "-" << seeds[j];
    i = j + 1;
  }
  return os.str();
}

train::Trainer load_trainer(const fs::path& checkpoint, const std::optional<fs::path>& config) {
  if (config) return train::Trainer::load(checkpoint, load_config(config).config);
  return train::Trainer::load(checkpoint);
}

metrics::MetricReport evaluate_split(const train::Trainer& trainer, const std::vector<data::VolumePair>& pairs,
                                     const std::string& id_prefix) {
  std::vector<Volume<float>> generated;
  generated.reserve(pairs.size());
  for (const auto& p : pairs) generated.push_back(trainer.generate(p.source));
  std::vector<metrics::EvalPair> eval;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    eval.push_back({id_prefix + std::to_string(pairs[i].seed), &generated[i], &pairs[i].target});
  }
  return metrics::evaluate_pairs(eval, trainer.config().eval_ssim);
}

void print_summary(std::ostream& out, const metrics::MetricReport& r) {
  out << "pairs " << r.count() << "\n"
      << "mae   " << format_number(r.mae.mean) << " +/- " << format_number(r.mae.std) << "\n"
      << "psnr  " << format_number(r.psnr_db.mean) << " +/- " << format_number(r.psnr_db.std) << " dB\n"
      << "ssim  " << format_number(r.ssim.mean) << " +/- " << format_number(r.ssim.std) << "\n";
}

// Restores the conv backward perturbation when selfcheck returns or throws.
struct FaultGuard {
  double saved = debug::conv_backward_perturbation();
  ~FaultGuard() { debug::set_conv_backward_perturbation(saved); }
};

void print_check(std::ostream& out, const std::string& group, const verify::CheckResult& r) {
  std::ostringstream err, tol;
  err << std::scientific << std::setprecision(2) << r.max_error;
  tol << std::scientific << std::setprecision(0) << r.tolerance;
  out << (r.passed ? "PASS" : "FAIL") << "  " << group << "/" << r.name << "  max_err=" << err.str()
      << "  tol=" << tol.str() << "  " << r.detail << "\n";
}

}  // namespace

int cmd_synth_data(const SynthDataOptions& o, std::ostream& out) {
  const LoadedConfig lc = load_config(o.config);
  const data::DatasetManifest manifest = lc.config.dataset.manifest(lc.config.synthetic);
  manifest.validate();
  if (fs::exists(o.out) && !(fs::is_directory(o.out) && fs::is_empty(o.out)) && !o.force) {
    throw IoError("refusing to overwrite " + o.out.string() + " (pass --force to replace it)");
  }
  make_dirs(o.out);
  data::build_dataset(manifest, o.out);
  echo_config(o.out, lc.config, lc.raw);
  auto count = [&](const char* split) {
    const auto it = manifest.splits.find(split);
    return it == manifest.splits.end() ? std::size_t{0} : it->second.size();
  };
  out << "generated " << count("train") << " train / " << count("val") << " val / " << count("test")
      << " test pairs\n";
  for (const auto& [split, seeds] : manifest.splits) {
    out << "  " << split << " seeds: " << (seeds.empty() ? "-" : seed_ranges(seeds)) << "\n";
  }
  return kExitOk;
}

int cmd_train(const TrainOptions& o, std::ostream& out) {
  LoadedConfig lc = load_config(o.config);
  if (o.steps) lc.config.train.steps = *o.steps;
  lc.config.validate();
  const data::Dataset ds = open_dataset(o.data);
  const auto train_pairs = load_split(ds, "train");
  std::vector<data::VolumePair> val_pairs;
  if (ds.manifest().splits.count("val")) val_pairs = ds.load_split("val");

  make_dirs(o.out);
  echo_config(o.out, lc.config, lc.raw);
  train::Trainer trainer = o.resume ? train::Trainer::load(*o.resume, lc.config) : train::Trainer(lc.config);
  if (o.resume) out << "resumed from " << o.resume->string() << " at step " << trainer.step() << "\n";
  train::train_loop(trainer, train_pairs, val_pairs, {o.out, &out});
  out << "wrote " << (o.out / "checkpoints" / "final.ckpt").string() << " and "
      << (o.out / "metrics.csv").string() << " (" << trainer.step() << " steps)\n";
  return kExitOk;
}

int cmd_eval(const EvalOptions& o, std::ostream& out) {
  const train::Trainer trainer = load_trainer(o.checkpoint, o.config);
  const data::Dataset ds = open_dataset(o.data);
  const auto pairs = load_split(ds, o.split);
  const metrics::MetricReport report = evaluate_split(trainer, pairs, o.split + "/");
  make_dirs(o.out);
  write_text(o.out / "report.csv", report.to_csv());
  echo_config(o.out, trainer.config(), std::nullopt);
  print_summary(out, report);
  out << "wrote " << (o.out / "report.csv").string() << "\n";
  return kExitOk;
}

int cmd_infer(const InferOptions& o, std::ostream& out) {
  const train::Trainer trainer = load_trainer(o.checkpoint, o.config);
  data::VolumeFile input;
  try {
    input = data::read_volume(o.in);
  } catch (const data::VolumeIoError& e) {
    throw InputError(std::string("bad input volume: ") + e.what());
  }
  const Shape& s = input.volume.shape();
  if (s.channels != 1 || s.depth % 8 || s.height % 8 || s.width % 8) {
    throw InputError("input volume " + s.str() + " needs one channel and extents divisible by 8");
  }
  const Volume<float> generated = trainer.generate(input.volume);
  if (o.out.has_parent_path()) make_dirs(o.out.parent_path());
  data::write_volume(o.out, generated, data::kTargetModality, input.header.seed);
  fs::path echo = o.out;
  echo += ".config.json";
  write_text(echo, trainer.config().to_json() + "\n");
  out << "wrote " << o.out.string() << " " << generated.shape().str() << " " << data::kTargetModality << "\n";
  return kExitOk;
}

int cmd_ablate(const AblateOptions& o, std::ostream& out) {
  const std::string plan_text = read_text(o.plan);
  const AblationPlan plan = AblationPlan::parse(plan_text);
  if (plan.config_json && o.config) {
    throw ConfigError("config", "the plan embeds a config; do not also pass --config");
  }
  LoadedConfig base;
  if (plan.config_json) {
    base = {train::RunConfig::parse(*plan.config_json), plan.config_json};
  } else {
    base = load_config(o.config);
  }
  if (base.config.variant != net::Variant::kFull) {
    throw ConfigError("generator.variant", "the ablation base config must use the full variant");
  }
  const data::Dataset ds = open_dataset(o.data);
  const auto train_pairs = load_split(ds, "train");
  std::vector<data::VolumePair> val_pairs;
  if (ds.manifest().splits.count("val")) val_pairs = ds.load_split("val");
  const auto eval_pairs = load_split(ds, plan.eval_split);
  const std::vector<std::uint64_t> seeds =
      plan.seeds.empty() ? std::vector<std::uint64_t>{base.config.train.seed} : plan.seeds;

  make_dirs(o.out);
  echo_config(o.out, base.config, base.raw);
  write_text(o.out / "plan.json", plan_text);

  std::ostringstream table;
  table << "variant,generator,sa_stage,sa_patch_edge,losses,loss_label,runs,pairs,mae_mean,mae_std,"
           "psnr_mean,psnr_std,ssim_mean,ssim_std,status\n";
  std::size_t failed = 0;
  for (const auto& v : plan.variants) {
    const fs::path vdir = o.out / v.name;
    std::vector<metrics::PairMetrics> pooled;
    std::string status = "ok";
    std::optional<net::GeneratorConfig> gen;
    try {
      for (std::uint64_t seed : seeds) {
        const train::RunConfig resolved = plan.resolve(v, base.config, seed);
        gen = resolved.generator;
        const fs::path run_dir = vdir / ("seed_" + std::to_string(seed));
        make_dirs(run_dir);
        echo_config(run_dir, resolved, std::nullopt);
        out << "[" << v.name << " seed " << seed << "]\n";
        train::Trainer trainer(resolved);
        train::train_loop(trainer, train_pairs, val_pairs, {run_dir, &out});
        const auto report = evaluate_split(trainer, eval_pairs, "seed" + std::to_string(seed) + "/");
        write_text(run_dir / "report.csv", report.to_csv());
        pooled.insert(pooled.end(), report.pairs.begin(), report.pairs.end());
      }
    } catch (const std::exception& e) {
      ++failed;
      std::string what = e.what();
      std::replace_if(what.begin(), what.end(), [](char c) { return c == ',' || c == '\n' || c == '"'; }, ';');
      status = "failed: " + what;
      out << "variant " << v.name << " failed: " << e.what() << "\n";
    }
    const auto summary = metrics::MetricReport::from_pairs(pooled);
    // SA columns stay empty when the variant has no self-attention.
    const bool sa = gen && gen->self_attention;
    table << v.name << "," << net::to_string(v.generator) << "," << (sa ? std::to_string(gen->sa_stage) : "")
          << "," << (sa ? std::to_string(gen->sa_patch_edge) : "") << "," << to_string(v.losses)
          << "," << table_label(v.losses) << "," << seeds.size() << "," << pooled.size() << ",";
    if (pooled.empty()) {
      table << ",,,,,,";
    } else {
      table << format_number(summary.mae.mean) << "," << format_number(summary.mae.std) << ","
            << format_number(summary.psnr_db.mean) << "," << format_number(summary.psnr_db.std) << ","
            << format_number(summary.ssim.mean) << "," << format_number(summary.ssim.std) << ",";
    }
    table << status << "\n";
  }
  write_text(o.out / "ablation.csv", table.str());
  out << "wrote " << (o.out / "ablation.csv").string() << " (" << plan.variants.size() << " variants, " << failed
      << " failed)\n";
  return failed ? kExitPartialAblation : kExitOk;
}

int cmd_selfcheck(const SelfcheckOptions& o, std::ostream& out) {
  FaultGuard guard;
  if (o.inject_fault == "conv_backward") {
    debug::set_conv_backward_perturbation(0.05);
    out << "fault injected: conv3d weight gradients scaled by 1.05\n";
  } else if (!o.inject_fault.empty()) {
    throw ConfigError("inject-fault", "unknown fault '" + o.inject_fault + "' (known: conv_backward)");
  }
  std::vector<std::string> failed;
  auto report = [&](const std::string& group, const verify::CheckResult& r) {
    print_check(out, group, r);
    if (!r.passed) failed.push_back(group + "/" + r.name);
  };
  for (const auto& r : verify::run_gradient_suite()) report("gradient", r);
  report("oracle", verify::ssim_oracle_sweep("ssim", metrics::SSIMConfig::single_scale()));
  report("oracle", verify::ssim_oracle_sweep("ms_ssim", metrics::SSIMConfig::multi_scale()));
  for (const auto& r : verify::run_conformance_checks()) report("shape", r);
  if (failed.empty()) {
    out << "selfcheck: all checks passed\n";
    return kExitOk;
  }
  out << "selfcheck: " << failed.size() << " failed:";
  for (const auto& name : failed) out << " " << name;
  out << "\n";
  return kExitSelfcheckFailed;
}

}  // namespace pcsa::cli
