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


#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <vector>

#include "pcsa/data/synth.hpp"
#include "pcsa/metrics/metrics.hpp"
#include "pcsa/train/trainer.hpp"
#include "test_util.hpp"

namespace pcsa::train {
namespace {

using pcsa::testing::random_volume;
using pcsa::testing::read_file;
using pcsa::testing::TempDir;
using pcsa::testing::write_file;

// Narrow networks so multi-step loops stay fast.
RunConfig small_config() {
  RunConfig c;
  c.generator.pcca = {net::PyramidSpec{{{3, 2}, {1, 2}}, 1}, net::PyramidSpec{{{3, 4}}, 1}};
  c.generator.deep_stage = net::PyramidSpec{{{3, 8}}, 2};
  c.generator.head_channels = 2;
  c.discriminator.channel_ladder = {2, 3, 4, 5};
  c.train.batch_size = 2;
  c.train.steps = 6;
  c.train.val_interval = 3;
  c.train.checkpoint_interval = 3;
  return c;
}

std::vector<data::VolumePair> pairs(std::size_t n, std::uint64_t base) {
  std::vector<data::VolumePair> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(data::make_pair(data::SyntheticSpec{}, base + i));
  return out;
}

template <typename Store>
std::vector<Volume<float>> snapshot(const Store& store) {
  std::vector<Volume<float>> out;
  for (const auto& p : store) out.push_back(p.value);
  return out;
}

TEST(AdamUpdate, FirstStepClosedForm) {
  const AdamHyper h{1e-3, 0.9, 0.999, 1e-8};
  std::vector<float> theta = {0.5f, -0.25f, 1.0f, 0.0f};
  const std::vector<float> g = {0.3f, -2.0f, 1e-6f, 50.0f};
  std::vector<float> m(4, 0.0f), v(4, 0.0f);
  const auto before = theta;
  adam_update(theta, g, m, v, 1, h);
  for (std::size_t i = 0; i < 4; ++i) {
    const double gi = g[i];
    const double delta = -h.lr * gi / (std::fabs(gi) + h.epsilon);
    EXPECT_NEAR(theta[i], before[i] + delta, 1e-7) << i;
    EXPECT_LE(std::fabs(static_cast<double>(theta[i]) - before[i]), h.lr * (1 + 1e-4));
    EXPECT_FLOAT_EQ(m[i], static_cast<float>(0.1 * gi));
    EXPECT_FLOAT_EQ(v[i], static_cast<float>(0.001 * gi * gi));
  }
}

TEST(AdamUpdate, ZeroGradientLeavesParametersUnchanged) {
  std::vector<float> theta = {0.5f, -0.25f};
  const auto before = theta;
  std::vector<float> g(2, 0.0f), m(2, 0.0f), v(2, 0.0f);
  for (std::uint64_t t = 1; t <= 5; ++t) adam_update(theta, g, m, v, t, AdamHyper{});
  EXPECT_EQ(theta, before);
}

TEST(AdamUpdate, OppositeGradientsMoveSymmetrically) {
  std::vector<float> theta = {0.0f, 0.0f};
  std::vector<float> m(2, 0.0f), v(2, 0.0f);
  for (std::uint64_t t = 1; t <= 10; ++t) {
    const float g = 0.1f * static_cast<float>(t) - 0.35f;
    const std::vector<float> grad = {g, -g};
    adam_update(theta, grad, m, v, t, AdamHyper{});
    EXPECT_EQ(theta[0], -theta[1]);
  }
}

TEST(Adam, StateMatchesParameterShapes) {
  ParameterStore<float> store(1);
  store.add("a", {2, 1, 3, 3, 3}, Init::kHeNormal, 27);
  store.add("b", {1, 2, 1, 1, 1}, Init::kZero);
  Adam adam(store, AdamHyper{});
  ASSERT_EQ(adam.state().m.size(), 2u);
  EXPECT_EQ(adam.state().m[0].shape(), (Shape{2, 1, 3, 3, 3}));
  EXPECT_EQ(adam.state().v[1].shape(), (Shape{1, 2, 1, 1, 1}));
  EXPECT_EQ(adam.state().t, 0u);
  adam.step();
  EXPECT_EQ(adam.state().t, 1u);
}

TEST(BatchIndices, EpochIsAPermutation) {
  const std::size_t n = 12, b = 4;
  std::multiset<std::size_t> seen;
  for (std::uint64_t step = 0; step < n / b; ++step) {
    const auto idx = batch_indices(7, step, n, b);
    EXPECT_EQ(idx, batch_indices(7, step, n, b));
    seen.insert(idx.begin(), idx.end());
  }
  std::multiset<std::size_t> all;
  for (std::size_t i = 0; i < n; ++i) all.insert(i);
  EXPECT_EQ(seen, all);
  EXPECT_NE(batch_indices(7, 0, n, b), batch_indices(7, 3, n, b));
  EXPECT_NE(batch_indices(7, 0, n, b), batch_indices(8, 0, n, b));
  EXPECT_EQ(batch_indices(1, 0, 3, 5).size(), 5u);
  EXPECT_THROW(batch_indices(1, 0, 0, 1), std::invalid_argument);
}

TEST(TrainStep, DiscriminatorUpdateLeavesGeneratorUntouched) {
  Trainer t(small_config());
  const auto p = pairs(2, 10);
  const std::vector<Volume<float>> src = {p[0].source, p[1].source}, tgt = {p[0].target, p[1].target};
  const auto x = stack_batch<float>(src), y = stack_batch<float>(tgt);
  const auto g_before = snapshot(t.generator().params());
  const auto d_before = snapshot(t.discriminator().params());

  // The discriminator phase of a step: fake is detached before D sees it.
  t.generator().params().zero_grad();
  t.discriminator().params().zero_grad();
  Tape<float> tape;
  const auto fake = t.generator().forward(tape.constant(x), true);
  const auto loss = metrics::discriminator_loss(t.discriminator().forward(tape.constant(y)),
                                                t.discriminator().forward(ops::detach(fake)));
  tape.backward(loss);
  t.adam_discriminator().step();
  EXPECT_EQ(snapshot(t.generator().params()), g_before);
  for (const auto& q : t.generator().params())
    for (float g : q.grad.data()) ASSERT_EQ(g, 0.0f) << q.name;
  EXPECT_NE(snapshot(t.discriminator().params()), d_before);

  // The generator phase binds D as frozen, so D stays put.
  const auto d_mid = snapshot(t.discriminator().params());
  t.discriminator().params().zero_grad();
  Tape<float> gt;
  const auto fake2 = t.generator().forward(gt.constant(x), true);
  gt.backward(metrics::generator_adversarial_loss(t.discriminator().forward(fake2, false)));
  t.adam_generator().step();
  EXPECT_EQ(snapshot(t.discriminator().params()), d_mid);
  EXPECT_NE(snapshot(t.generator().params()), g_before);
}

TEST(TrainStep, LossesFiniteAndHistoryGrows) {
  Trainer t(small_config());
  const auto p = pairs(1, 20);
  for (int i = 0; i < 3; ++i) {
    const auto l = t.train_step(p[0].source, p[0].target);
    for (double v : {l.loss_d, l.loss_adv_g, l.loss_l1, l.loss_structural}) EXPECT_TRUE(std::isfinite(v));
  }
  EXPECT_EQ(t.step(), 3u);
  ASSERT_EQ(t.history().size(), 3u);
  EXPECT_EQ(t.history().back().step, 3u);
  EXPECT_THROW(t.train_step(p[0].source, Volume<float>({1, 1, 8, 8, 8})), ShapeError);
}

TEST(TrainStep, PureL1IsNonIncreasingOnARepeatedBatch) {
  RunConfig cfg;
  cfg.loss_weights = {0, 1, 0};
  cfg.train.batch_size = 1;
  Trainer t(cfg);
  const auto p = data::make_pair(cfg.synthetic, 1000);
  double previous = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 10; ++i) {
    const double l1 = t.train_step(p.source, p.target).loss_l1;
    EXPECT_LE(l1, previous) << "step " << i;
    previous = l1;
  }
}

TEST(TrainStep, OverfitsOnePair) {
  RunConfig cfg;
  cfg.loss_weights = {0, 1, 0};
  cfg.train.batch_size = 1;
  cfg.train.lr_generator = 1e-3;
  Trainer t(cfg);
  const auto p = data::make_pair(cfg.synthetic, 1000);
  // Adam at this rate oscillates near the optimum, so the bound applies to
  // the lowest training L1 reached rather than to the last step.
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 200; ++i) best = std::min(best, t.train_step(p.source, p.target).loss_l1);
  EXPECT_LT(best, 0.01);
}

TEST(TrainStep, NonFiniteLossAborts) {
  Trainer t(small_config());
  auto p = data::make_pair(data::SyntheticSpec{}, 30);
  p.target[17] = std::numeric_limits<float>::quiet_NaN();
  const std::vector<std::uint64_t> seeds = {30};
  try {
    t.train_step(p.source, p.target, seeds);
    FAIL() << "expected NumericAbort";
  } catch (const NumericAbort& e) {
    EXPECT_EQ(e.step(), 1u);
    EXPECT_EQ(e.batch_seeds(), seeds);
  }
}

TEST(TrainLoop, ZeroStepsWritesInitialCheckpointAndHeader) {
  TempDir dir("loop0");
  RunConfig cfg = small_config();
  cfg.train.steps = 0;
  Trainer t(cfg);
  train_loop(t, {}, {}, {dir.path()});
  EXPECT_EQ(read_file(dir / "metrics.csv"), std::string(kMetricsHeader) + "\n");
  ASSERT_TRUE(std::filesystem::exists(dir.path() / "checkpoints" / "final.ckpt"));
  EXPECT_EQ(read_file(dir.path() / "checkpoints" / "final.ckpt"), t.encode_checkpoint());
}

TEST(TrainLoop, SeededRunsAreBitIdentical) {
  TempDir a("loop_a"), b("loop_b");
  const auto train = pairs(4, 100), val = pairs(2, 200);
  for (const auto* dir : {&a, &b}) {
    Trainer t(small_config());
    train_loop(t, train, val, {dir->path()});
  }
  const std::string csv = read_file(a / "metrics.csv");
  EXPECT_EQ(csv, read_file(b / "metrics.csv"));
  EXPECT_EQ(read_file(a.path() / "checkpoints" / "final.ckpt"), read_file(b.path() / "checkpoints" / "final.ckpt"));
  EXPECT_TRUE(std::filesystem::exists(a.path() / "checkpoints" / "step_000003.ckpt"));
  // Header plus six step rows; validation at steps 3 and 6 only.
  std::vector<std::string> lines;
  std::istringstream in(csv);
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  ASSERT_EQ(lines.size(), 7u);
  EXPECT_EQ(lines[0], kMetricsHeader);
  EXPECT_EQ(lines[1].substr(lines[1].size() - 3), ",,,");
  EXPECT_NE(lines[3].substr(lines[3].size() - 3), ",,,");
  EXPECT_NE(lines[6].substr(lines[6].size() - 3), ",,,");
}

TEST(Checkpoint, SaveLoadSaveIsByteIdentical) {
  TempDir dir("ckpt");
  Trainer t(small_config());
  const auto p = pairs(1, 40);
  t.train_step(p[0].source, p[0].target);
  t.save_checkpoint(dir / "a.ckpt");
  const Trainer back = Trainer::load(dir / "a.ckpt");
  back.save_checkpoint(dir / "b.ckpt");
  EXPECT_EQ(read_file(dir / "a.ckpt"), read_file(dir / "b.ckpt"));
  EXPECT_EQ(back.step(), 1u);
  EXPECT_EQ(back.config(), t.config());
  EXPECT_EQ(Trainer::checkpoint_config(dir / "a.ckpt"), t.config());
  EXPECT_EQ(read_file(dir / "a.ckpt").substr(0, 8), "PCSACKPT");
}

TEST(Checkpoint, ResumeMatchesUninterruptedRun) {
  TempDir dir("resume");
  const auto train = pairs(6, 300);
  RunConfig cfg = small_config();
  cfg.train.checkpoint_interval = 0;
  cfg.train.val_interval = 0;
  cfg.train.steps = 100;
  Trainer straight(cfg);
  train_loop(straight, train, {}, {dir / "straight"});

  RunConfig half = cfg;
  half.train.steps = 50;
  Trainer first(half);
  train_loop(first, train, {}, {dir / "first"});
  Trainer resumed = Trainer::load(dir.path() / "first" / "checkpoints" / "final.ckpt", cfg);
  EXPECT_EQ(resumed.step(), 50u);
  train_loop(resumed, train, {}, {dir / "resumed"});

  EXPECT_EQ(snapshot(resumed.generator().params()), snapshot(straight.generator().params()));
  EXPECT_EQ(snapshot(resumed.discriminator().params()), snapshot(straight.discriminator().params()));
  EXPECT_EQ(read_file(dir.path() / "resumed" / "metrics.csv"), read_file(dir.path() / "straight" / "metrics.csv"));
}

TEST(Checkpoint, ResumeDropsEndOfRunValidationOffSchedule) {
  TempDir dir("resume_val");
  const auto train = pairs(4, 300), val = pairs(2, 400);
  RunConfig cfg = small_config();
  cfg.train.steps = 6;
  cfg.train.val_interval = 2;
  cfg.train.checkpoint_interval = 0;
  Trainer straight(cfg);
  train_loop(straight, train, val, {dir / "straight"});

  // The 3-step run validates at step 3, which the 6-step schedule skips.
  RunConfig half = cfg;
  half.train.steps = 3;
  Trainer first(half);
  train_loop(first, train, val, {dir / "first"});
  ASSERT_TRUE(first.history().back().val.has_value());
  Trainer resumed = Trainer::load(dir.path() / "first" / "checkpoints" / "final.ckpt", cfg);
  train_loop(resumed, train, val, {dir / "resumed"});

  EXPECT_EQ(read_file(dir.path() / "resumed" / "metrics.csv"), read_file(dir.path() / "straight" / "metrics.csv"));
  EXPECT_EQ(resumed.encode_checkpoint(), straight.encode_checkpoint());
}

TEST(Checkpoint, FingerprintMismatchAndCorruption) {
  TempDir dir("ckpt_bad");
  Trainer t(small_config());
  t.save_checkpoint(dir / "a.ckpt");
  RunConfig other = small_config();
  other.generator.head_channels = 3;
  EXPECT_THROW(Trainer::load(dir / "a.ckpt", other), FingerprintMismatch);
  RunConfig disc = small_config();
  disc.discriminator.conditional = true;
  EXPECT_THROW(Trainer::load(dir / "a.ckpt", disc), FingerprintMismatch);
  // Training-only settings are not part of the architecture.
  RunConfig lr = small_config();
  lr.train.lr_generator = 5e-4;
  EXPECT_NO_THROW(Trainer::load(dir / "a.ckpt", lr));

  const std::string bytes = read_file(dir / "a.ckpt");
  write_file(dir / "short.ckpt", bytes.substr(0, bytes.size() - 3));
  EXPECT_THROW(Trainer::load(dir / "short.ckpt"), CheckpointError);
  write_file(dir / "magic.ckpt", "NOTACKPT" + bytes.substr(8));
  EXPECT_THROW(Trainer::load(dir / "magic.ckpt"), CheckpointError);
}

TEST(RunConfig, StrictParseAndRoundTrip) {
  const RunConfig defaults;
  EXPECT_EQ(RunConfig::parse("{}"), defaults);
  EXPECT_EQ(RunConfig::parse(defaults.to_json()), defaults);
  const RunConfig small = small_config();
  EXPECT_EQ(RunConfig::parse(small.to_json()), small);

  const auto parsed = RunConfig::parse(R"({"train": {"batch_size": 2, "seed": 9}, "loss_weights": {"alpha": 0}})");
  EXPECT_EQ(parsed.train.batch_size, 2u);
  EXPECT_EQ(parsed.train.seed, 9u);
  EXPECT_EQ(parsed.loss_weights.alpha, 0.0);
  EXPECT_EQ(parsed.loss_weights.beta, 10.0);

  auto key_of = [](const char* text) {
    try {
      RunConfig::parse(text);
    } catch (const ConfigError& e) {
      return e.key();
    }
    return std::string("<accepted>");
  };
  EXPECT_EQ(key_of(R"({"train": {"bogus": 1}})"), "train.bogus");
  EXPECT_EQ(key_of(R"({"extra": {}})"), "extra");
  EXPECT_EQ(key_of(R"({"train": {"batch_size": 0}})"), "train.batch_size");
  EXPECT_EQ(key_of(R"({"train": {"batch_size": "four"}})"), "train.batch_size");
  EXPECT_EQ(key_of("[1, 2"), "");
}

}  // namespace
}  // namespace pcsa::train
