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

#include "pcsa/train/trainer.hpp"

#include <bit>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "common/json_fields.hpp"
#include "pcsa/metrics/metrics.hpp"
#include "pcsa/tensor/rng.hpp"

namespace pcsa::train {

using detail::Json;

namespace {

constexpr std::string_view kCheckpointMagic = "PCSACKPT";

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, v);
  return buf;
}

std::string join_seeds(std::span<const std::uint64_t> seeds) {
  std::string out;
  for (auto s : seeds) out += (out.empty() ? "" : " ") + std::to_string(s);
  return out;
}

Volume<float> stack(std::span<const data::VolumePair> pairs, std::span<const std::size_t> idx, bool source) {
  std::vector<Volume<float>> items;
  items.reserve(idx.size());
  for (auto i : idx) items.push_back(source ? pairs[i].source : pairs[i].target);
  return stack_batch<float>(items);
}

Json number_json(double v) {
  if (std::isfinite(v)) return v;
  return metrics::format_number(v);
}

double number_from_json(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw CheckpointError("checkpoint history holds a non-numeric value");
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint64_t get_u64(const char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  return v;
}

/// Every tensor of the checkpoint in table order.
std::vector<std::pair<std::string, Volume<float>*>> tensor_table(Trainer& t) {
  std::vector<std::pair<std::string, Volume<float>*>> out;
  const auto add_model = [&](ParameterStore<float>& store, AdamState& adam) {
    for (auto& p : store) out.emplace_back(p.name, &p.value);
    std::size_t i = 0;
    for (auto& p : store) out.emplace_back("adam_m/" + p.name, &adam.m[i++]);
    i = 0;
    for (auto& p : store) out.emplace_back("adam_v/" + p.name, &adam.v[i++]);
  };
  add_model(t.generator().params(), t.adam_generator().state());
  add_model(t.discriminator().params(), t.adam_discriminator().state());
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct ParsedCheckpoint {
  Json manifest;
  std::size_t payload_offset = 0;
};

ParsedCheckpoint parse_checkpoint(std::string_view bytes) {
  if (bytes.size() < 16 || bytes.substr(0, 8) != kCheckpointMagic) {
    throw CheckpointError("not a checkpoint (missing PCSACKPT magic)");
  }
  const std::uint64_t len = get_u64(bytes.data() + 8);
  if (len > bytes.size() - 16) throw CheckpointError("checkpoint manifest is truncated");
  ParsedCheckpoint out;
  try {
    out.manifest = Json::parse(bytes.substr(16, len));
  } catch (const Json::parse_error& e) {
    throw CheckpointError(std::string("checkpoint manifest is corrupt: ") + e.what());
  }
  if (out.manifest.value("format", "") != "pcsa-checkpoint") {
    throw CheckpointError("checkpoint manifest has the wrong format tag");
  }
  out.payload_offset = 16 + len;
  return out;
}

}  // namespace

NumericAbort::NumericAbort(std::uint64_t step, std::vector<std::uint64_t> seeds, const std::string& what)
    : NumericError(what + " at step " + std::to_string(step) + " (batch seeds: " + join_seeds(seeds) + ")"),
      step_(step),
      seeds_(std::move(seeds)) {}

std::vector<std::size_t> batch_indices(std::uint64_t seed, std::uint64_t step, std::size_t n,
                                       std::size_t batch_size) {
  if (n == 0) throw std::invalid_argument("batch_indices: empty training set");
  const std::uint64_t steps_per_epoch = std::max<std::uint64_t>(1, n / batch_size);
  const std::uint64_t epoch = step / steps_per_epoch;
  const std::uint64_t pos = step % steps_per_epoch;
  const CounterRng rng = CounterRng(seed).stream("shuffle").stream(epoch);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t i = n - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(i, 0, static_cast<std::int64_t>(i)));
    std::swap(perm[i], perm[j]);
  }
  std::vector<std::size_t> out(batch_size);
  for (std::size_t i = 0; i < batch_size; ++i) out[i] = perm[(pos * batch_size + i) % n];
  return out;
}

std::string metrics_row(const HistoryRow& row) {
  using metrics::format_number;
  std::string out = std::to_string(row.step) + "," + format_number(row.losses.loss_d) + "," +
                    format_number(row.losses.loss_adv_g) + "," + format_number(row.losses.loss_l1) + "," +
                    format_number(row.losses.loss_structural) + ",";
  if (row.val) {
    out += format_number(row.val->mae) + "," + format_number(row.val->psnr) + "," + format_number(row.val->ssim);
  } else {
    out += ",,";
  }
  return out;
}

Trainer::Trainer(RunConfig config) : config_(std::move(config)) {
  config_.validate();
  const CounterRng seeds(config_.train.seed);
  generator_ = std::make_unique<net::Generator<float>>(config_.generator, seeds.stream("generator").bits(0));
  discriminator_ =
      std::make_unique<net::Discriminator<float>>(config_.discriminator, seeds.stream("discriminator").bits(0));
  const auto& t = config_.train;
  adam_g_ = std::make_unique<Adam>(generator_->params(), AdamHyper{t.lr_generator, t.beta1, t.beta2, t.epsilon});
  adam_d_ =
      std::make_unique<Adam>(discriminator_->params(), AdamHyper{t.lr_discriminator, t.beta1, t.beta2, t.epsilon});
}

std::uint64_t Trainer::fingerprint() const {
  return CounterRng::hash(std::to_string(generator_->fingerprint()) + "|" +
                          std::to_string(discriminator_->fingerprint()));
}

StepLosses Trainer::train_step(const Volume<float>& source, const Volume<float>& target,
                               std::span<const std::uint64_t> batch_seeds) {
  using namespace pcsa::ops;
  if (!(source.shape() == target.shape())) {
    throw ShapeError("train_step: source " + source.shape().str() + " vs target " + target.shape().str());
  }
  const std::uint64_t step_no = step_ + 1;
  const std::vector<std::uint64_t> seeds(batch_seeds.begin(), batch_seeds.end());
  const auto check = [&](double v, const char* name) {
    if (!std::isfinite(v)) throw NumericAbort(step_no, seeds, std::string("non-finite ") + name);
  };
  const bool conditional = config_.discriminator.conditional;
  StepLosses out;

  Tape<float> tape;
  const Var<float> x = tape.constant(source);
  const Var<float> real = tape.constant(target);
  const Var<float> fake = generator_->forward(x, true);

  for (std::size_t k = 0; k < config_.train.d_steps_per_g_step; ++k) {
    discriminator_->params().zero_grad();
    Tape<float> dt;
    const Var<float> dx = dt.constant(source);
    Var<float> d_real_in = dt.constant(target);
    Var<float> d_fake_in = dt.constant(fake.value());
    if (conditional) {
      const std::array<Var<float>, 2> r = {dx, d_real_in};
      const std::array<Var<float>, 2> f = {dx, d_fake_in};
      d_real_in = concat_channels<float>(r);
      d_fake_in = concat_channels<float>(f);
    }
    const Var<float> loss_d =
        metrics::discriminator_loss(discriminator_->forward(d_real_in), discriminator_->forward(d_fake_in));
    out.loss_d = loss_d.value()[0];
    check(out.loss_d, "discriminator loss");
    dt.backward(loss_d);
    adam_d_->step();
  }

  generator_->params().zero_grad();
  Var<float> g_in = fake;
  if (conditional) {
    const std::array<Var<float>, 2> parts = {x, fake};
    g_in = concat_channels<float>(parts);
  }
  const Var<float> adv = metrics::generator_adversarial_loss(discriminator_->forward(g_in, false));
  const Var<float> l1 = metrics::l1_loss(fake, real);
  const Var<float> structural = metrics::msssim_loss(fake, real, config_.ssim);
  const Var<float> joint = metrics::joint_generator_loss(config_.loss_weights, adv, l1, structural);
  out.loss_adv_g = adv.value()[0];
  out.loss_l1 = l1.value()[0];
  out.loss_structural = structural.value()[0];
  check(out.loss_adv_g, "generator adversarial loss");
  check(out.loss_l1, "L1 loss");
  check(out.loss_structural, "structural loss");
  check(joint.value()[0], "joint generator loss");
  tape.backward(joint);
  adam_g_->step();

  step_ = step_no;
  history_.push_back({step_, out, std::nullopt});
  return out;
}

Volume<float> Trainer::generate(const Volume<float>& source) const {
  const Shape s = source.shape();
  const std::size_t chunk = config_.train.batch_size;
  std::vector<float> out;
  out.reserve(s.numel());
  for (std::size_t begin = 0; begin < s.batch; begin += chunk) {
    const std::size_t count = std::min(chunk, s.batch - begin);
    Shape cs = s;
    cs.batch = count;
    const auto first = source.data().begin() + static_cast<std::ptrdiff_t>(begin * s.item_size());
    Volume<float> part(cs, std::vector<float>(first, first + static_cast<std::ptrdiff_t>(cs.numel())));
    Tape<float> tape;
    const Var<float> y = generator_->forward(tape.constant(std::move(part)), false);
    out.insert(out.end(), y.value().data().begin(), y.value().data().end());
  }
  return Volume<float>(s, std::move(out));
}

ValMetrics Trainer::validate(std::span<const data::VolumePair> pairs) const {
  if (config_.train.val_limit > 0 && pairs.size() > config_.train.val_limit) {
    pairs = pairs.first(config_.train.val_limit);
  }
  if (pairs.empty()) throw std::invalid_argument("validate: no validation pairs");
  std::vector<double> mae, psnr, ssim;
  const std::size_t chunk = config_.train.batch_size;
  for (std::size_t begin = 0; begin < pairs.size(); begin += chunk) {
    std::vector<std::size_t> idx(std::min(chunk, pairs.size() - begin));
    std::iota(idx.begin(), idx.end(), begin);
    const Volume<float> generated = generate(stack(pairs, idx, true));
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const Volume<float> g = generated.item(i);
      const Volume<float>& t = pairs[idx[i]].target;
      mae.push_back(metrics::mae(g, t));
      psnr.push_back(metrics::psnr(g, t, config_.eval_ssim.data_range));
      ssim.push_back(metrics::ssim(g, t, config_.eval_ssim));
    }
  }
  return {metrics::summarize(mae).mean, metrics::summarize(psnr).mean, metrics::summarize(ssim).mean};
}

std::string Trainer::encode_checkpoint() const {
  auto& self = const_cast<Trainer&>(*this);
  const auto table = tensor_table(self);
  Json tensors = Json::array();
  std::size_t floats = 0;
  for (const auto& [name, v] : table) {
    tensors.push_back({{"name", name}, {"shape", v->shape().dims()}});
    floats += v->size();
  }
  Json history = Json::array();
  for (const auto& row : history_) {
    Json r{{"step", row.step},
           {"loss_d", number_json(row.losses.loss_d)},
           {"loss_adv_g", number_json(row.losses.loss_adv_g)},
           {"loss_l1", number_json(row.losses.loss_l1)},
           {"loss_structural", number_json(row.losses.loss_structural)},
           {"val", nullptr}};
    if (row.val) {
      r["val"] = {{"mae", number_json(row.val->mae)},
                  {"psnr", number_json(row.val->psnr)},
                  {"ssim", number_json(row.val->ssim)}};
    }
    history.push_back(std::move(r));
  }
  const Json manifest{{"format", "pcsa-checkpoint"},
                      {"version", 1},
                      {"fingerprint", hex64(fingerprint())},
                      {"step", step_},
                      {"config", Json::parse(config_.to_json())},
                      {"history", history},
                      {"adam_t", {{"generator", adam_g_->state().t}, {"discriminator", adam_d_->state().t}}},
                      {"tensors", tensors}};
  const std::string text = manifest.dump(1);
  std::string out;
  out.reserve(16 + text.size() + 4 * floats);
  out.append(kCheckpointMagic);
  put_u64(out, text.size());
  out.append(text);
  for (const auto& [name, v] : table) {
    for (float f : v->data()) {
      const auto bits = std::bit_cast<std::uint32_t>(f);
      for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
    }
  }
  return out;
}

void Trainer::save_checkpoint(const std::filesystem::path& path) const {
  const std::string bytes = encode_checkpoint();
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot write checkpoint " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw CheckpointError("write failed for checkpoint " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw CheckpointError("cannot move checkpoint into place: " + ec.message());
}

RunConfig Trainer::checkpoint_config(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  const ParsedCheckpoint parsed = parse_checkpoint(bytes);
  if (!parsed.manifest.contains("config")) throw CheckpointError("checkpoint manifest has no config");
  return RunConfig::parse(parsed.manifest["config"].dump());
}

Trainer Trainer::load(const std::filesystem::path& path) { return load(path, checkpoint_config(path)); }

Trainer Trainer::load(const std::filesystem::path& path, const RunConfig& config) {
  const std::string bytes = read_file(path);
  const ParsedCheckpoint parsed = parse_checkpoint(bytes);
  Trainer t(config);
  const std::string stored = parsed.manifest.value("fingerprint", "");
  if (stored != hex64(t.fingerprint())) {
    throw FingerprintMismatch("checkpoint " + path.string() + " has architecture fingerprint " + stored +
                              " but the config builds " + hex64(t.fingerprint()));
  }
  t.restore(bytes, parsed.payload_offset, parsed.manifest.dump());
  return t;
}

void Trainer::restore(std::string_view bytes, std::size_t offset, const std::string& manifest_json) {
  const Json m = Json::parse(manifest_json);
  const auto table = tensor_table(*this);
  const Json& tensors = m.at("tensors");
  if (tensors.size() != table.size()) throw CheckpointError("checkpoint tensor count does not match the model");
  std::size_t pos = offset;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& [name, v] = table[i];
    if (tensors[i].at("name").get<std::string>() != name ||
        tensors[i].at("shape").get<std::array<std::size_t, 5>>() != v->shape().dims()) {
      throw CheckpointError("checkpoint tensor " + std::to_string(i) + " does not match " + name);
    }
    const std::size_t need = 4 * v->size();
    if (bytes.size() < pos + need) throw CheckpointError("checkpoint payload is truncated at " + name);
    for (std::size_t k = 0; k < v->size(); ++k) {
      std::uint32_t b = 0;
      for (int j = 0; j < 4; ++j) {
        b |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[pos + 4 * k + j])) << (8 * j);
      }
      (*v)[k] = std::bit_cast<float>(b);
    }
    pos += need;
  }
  if (pos != bytes.size()) throw CheckpointError("checkpoint has trailing bytes after the payload");
  step_ = m.at("step").get<std::uint64_t>();
  adam_g_->state().t = m.at("adam_t").at("generator").get<std::uint64_t>();
  adam_d_->state().t = m.at("adam_t").at("discriminator").get<std::uint64_t>();
  history_.clear();
  for (const auto& r : m.at("history")) {
    HistoryRow row;
    row.step = r.at("step").get<std::uint64_t>();
    row.losses = {number_from_json(r.at("loss_d")), number_from_json(r.at("loss_adv_g")),
                  number_from_json(r.at("loss_l1")), number_from_json(r.at("loss_structural"))};
    if (!r.at("val").is_null()) {
      const Json& v = r.at("val");
      row.val = ValMetrics{number_from_json(v.at("mae")), number_from_json(v.at("psnr")),
                           number_from_json(v.at("ssim"))};
    }
    history_.push_back(row);
  }
}

namespace {
void write_metrics(const Trainer& trainer, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << kMetricsHeader << '\n';
  for (const auto& row : trainer.history()) out << metrics_row(row) << '\n';
  if (!out) throw std::runtime_error("cannot write " + path.string());
}
}  // namespace

void train_loop(Trainer& trainer, std::span<const data::VolumePair> train_pairs,
                std::span<const data::VolumePair> val_pairs, const LoopOptions& options) {
  const TrainConfig& cfg = trainer.config().train;
  if (train_pairs.empty() && trainer.step() < cfg.steps) {
    throw std::invalid_argument("train_loop: the training split is empty");
  }
  const auto ckpt_dir = options.out_dir / "checkpoints";
  std::filesystem::create_directories(ckpt_dir);
  const auto metrics_path = options.out_dir / "metrics.csv";

  // A run cut short by a lower step count validated at its last step. When
  // continuing it, drop that off-schedule result so the history matches an
  // uninterrupted run.
  auto& history = trainer.history();
  if (!history.empty() && history.back().step < cfg.steps) {
    const std::uint64_t k = history.back().step;
    if (cfg.val_interval == 0 || k % cfg.val_interval != 0) history.back().val.reset();
  }

  try {
    while (trainer.step() < cfg.steps) {
      const auto idx = batch_indices(cfg.seed, trainer.step(), train_pairs.size(), cfg.batch_size);
      std::vector<std::uint64_t> seeds;
      for (auto i : idx) seeds.push_back(train_pairs[i].seed);
      trainer.train_step(stack(train_pairs, idx, true), stack(train_pairs, idx, false), seeds);
      const std::uint64_t k = trainer.step();
      const bool scheduled = cfg.val_interval > 0 && k % cfg.val_interval == 0;
      if (!val_pairs.empty() && (scheduled || k == cfg.steps)) {
        HistoryRow& row = trainer.history().back();
        row.val = trainer.validate(val_pairs);
        if (options.progress) {
          *options.progress << "step " << k << "/" << cfg.steps << "  loss_d " << row.losses.loss_d << "  l1 "
                            << row.losses.loss_l1 << "  val_mae " << row.val->mae << "  val_ssim " << row.val->ssim
                            << std::endl;
        }
      }
      if (cfg.checkpoint_interval > 0 && k % cfg.checkpoint_interval == 0) {
        char name[32];
        std::snprintf(name, sizeof(name), "step_%06" PRIu64 ".ckpt", k);
        trainer.save_checkpoint(ckpt_dir / name);
      }
    }
  } catch (const NumericAbort&) {
    write_metrics(trainer, metrics_path);
    throw;
  }
  trainer.save_checkpoint(ckpt_dir / "final.ckpt");
  write_metrics(trainer, metrics_path);
}

}  // namespace pcsa::train
