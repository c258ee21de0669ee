// Copyright 2026 The HRT Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "hrt/data/synthetic.hpp"
#include "hrt/decoding/decode.hpp"
#include "hrt/training/distill.hpp"
#include "hrt/training/trainer.hpp"

namespace hrt {
namespace {

ModelConfig tiny_config(const Corpus& c) {
  ModelConfig m;
  m.d_model = 16;
  m.d_ff = 32;
  m.n_heads = 2;
  m.enc_layers = 1;
  m.dec_layers = 1;
  m.vocab_size = c.vocab.size();
  m.chunk_sizes = c.vocab.chunk_sizes();
  m.max_len = 20;
  return m;
}

Corpus copy_corpus(std::size_t n, std::uint64_t seed = 1) {
  SyntheticSpec s;
  s.n_pairs = n;
  s.min_len = 2;
  s.max_len = 6;
  s.vocab_size = 15;
  s.seed = seed;
  s.length_cap = 20;
  return generate_synthetic(s);
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("hrt_train_" + name)).string();
}

TEST(Trainer, ZeroStepsLeavesModelUnchanged) {
  const Corpus c = copy_corpus(10);
  Model m(tiny_config(c), 3);
  const Model before(tiny_config(c), 3);
  TrainConfig tc;
  tc.steps = 0;
  const TrainResult r = train(m, c, tc);
  EXPECT_TRUE(r.trace.empty());
  const auto a = m.parameters();
  const auto b = before.parameters();
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i]->value, b[i]->value);
}

TEST(Trainer, LossDecreasesAndTraceIsWellFormed) {
  const Corpus c = copy_corpus(400);
  Model m(tiny_config(c), 4);
  TrainConfig tc;
  tc.steps = 120;
  tc.batch_pairs = 8;
  tc.warmup_steps = 30;
  tc.peak_lr = 3e-3;
  std::size_t callbacks = 0;
  const TrainResult r = train(m, c, tc, [&](const LossRecord&) { ++callbacks; });
  ASSERT_EQ(r.trace.size(), 120u);
  EXPECT_EQ(callbacks, 120u);
  double first = 0.0, last = 0.0;
  for (std::size_t i = 0; i < 12; ++i) first += r.trace[i].loss;
  for (std::size_t i = 108; i < 120; ++i) last += r.trace[i].loss;
  EXPECT_LT(last, first);
  double prev = -1.0;
  for (const LossRecord& rec : r.trace) {
    EXPECT_GE(rec.p_k, prev);
    prev = rec.p_k;
    std::size_t samples = 0;
    for (auto n : rec.task_samples) samples += n;
    EXPECT_EQ(samples, 16u);
  }
  EXPECT_EQ(r.trace.back().p_k, 1.0);

  const std::string path = temp_path("trace.csv");
  save_loss_trace(r.trace, path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "step,p_k,lr,loss,primary_fraction,at,cmlm,skip_at,skip_cmlm");
  std::size_t lines = 0;
  for (std::string l; std::getline(in, l);) ++lines;
  EXPECT_EQ(lines, 120u);
  std::filesystem::remove(path);
}

TEST(Trainer, AtOnlyModeUsesOnlyAtSamples) {
  const Corpus c = copy_corpus(50);
  Model m(tiny_config(c), 5);
  TrainConfig tc;
  tc.mode = TrainMode::at_only;
  tc.steps = 5;
  tc.batch_pairs = 4;
  for (const LossRecord& rec : train(m, c, tc).trace) {
    EXPECT_EQ(rec.p_k, 0.0);
    EXPECT_EQ(rec.task_samples[static_cast<std::size_t>(Task::at)], 4u);
    EXPECT_EQ(rec.task_samples[static_cast<std::size_t>(Task::cmlm)], 0u);
    EXPECT_TRUE(std::isnan(rec.task_loss[static_cast<std::size_t>(Task::cmlm)]));
  }
}

TEST(Trainer, DeterministicGivenSeed) {
  const Corpus c = copy_corpus(40);
  TrainConfig tc;
  tc.steps = 4;
  tc.batch_pairs = 4;
  Model a(tiny_config(c), 6), b(tiny_config(c), 6);
  const auto ra = train(a, c, tc), rb = train(b, c, tc);
  for (std::size_t i = 0; i < ra.trace.size(); ++i) EXPECT_EQ(ra.trace[i].loss, rb.trace[i].loss) << std::hexfloat << ra.trace[i].loss - rb.trace[i].loss << " step " << i;
}

TEST(Trainer, DivergenceIsReported) {
  const Corpus c = copy_corpus(40);
  Model m(tiny_config(c), 7);
  TrainConfig tc;
  tc.steps = 20;
  tc.batch_pairs = 4;
  tc.peak_lr = 1e200;
  tc.warmup_steps = 1;
  EXPECT_THROW(train(m, c, tc), TrainingDiverged);
}

TEST(Trainer, RejectsIncompatibleInputs) {
  const Corpus c = copy_corpus(10);
  ModelConfig mc = tiny_config(c);
  mc.vocab_size += 1;
  Model m(mc, 1);
  TrainConfig tc;
  tc.steps = 1;
  EXPECT_THROW(train(m, c, tc), std::invalid_argument);
  Model ok(tiny_config(c), 1);
  tc.k = 5;
  EXPECT_THROW(train(ok, c, tc), std::invalid_argument);
}

TEST(Trainer, FullLengthTargetsFitEveryChunk) {
  // N = L puts a grid [EOS] at k * ceil((L + 1) / k), up to L + k.
  Corpus c = copy_corpus(8);
  for (auto& p : c.pairs) p.source = p.target = std::vector<TokenId>(6, c.vocab.first_regular());
  ModelConfig mc = tiny_config(c);
  mc.max_len = 6;
  for (int k : {2, 3, 4}) {
    Model m(mc, 10);
    TrainConfig tc;
    tc.k = k;
    tc.steps = 2;
    tc.batch_pairs = 4;
    tc.curriculum_steps = 1;
    EXPECT_NO_THROW(train(m, c, tc)) << "k=" << k;
  }
}

TEST(Trainer, ConfigKeys) {
  TrainConfig tc;
  tc.apply(KeyValueConfig::parse("mode=at\nk=3\nsteps=7\nlr=0.5\nwarmup_steps=9\nskip_cmlm_eos=natural\nseed=4\n"));
  EXPECT_EQ(tc.mode, TrainMode::at_only);
  EXPECT_EQ(tc.k, 3);
  EXPECT_EQ(tc.steps, 7u);
  EXPECT_EQ(tc.peak_lr, 0.5);
  EXPECT_EQ(tc.warmup_steps, 9u);
  EXPECT_EQ(tc.skip_cmlm_eos, EosPlacement::natural);
  EXPECT_EQ(tc.seed, 4u);
  EXPECT_THROW(tc.apply(KeyValueConfig::parse("steps=-1\n")), ConfigError);
}

TEST(Finetune, ZeroStepsReproducesCheckpoint) {
  const Corpus c = copy_corpus(10);
  Model at(tiny_config(c), 8);
  const std::string path = temp_path("at.ckpt");
  at.save(path);
  TrainConfig tc;
  tc.steps = 0;
  const Model hrt_model = finetune_from_at(path, c, tc);
  const auto a = at.parameters();
  const auto b = hrt_model.parameters();
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i]->value, b[i]->value);
  EXPECT_THROW(finetune_from_at("/nonexistent/at.ckpt", c, tc), std::runtime_error);
  std::filesystem::remove(path);
}

TEST(Distill, TargetsAreRegularTokensAndSourcesKept) {
  const Corpus c = copy_corpus(20);
  const Model teacher(tiny_config(c), 9);
  const DistillResult r = distill_corpus(teacher, c, 3);
  ASSERT_EQ(r.corpus.size(), c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    EXPECT_EQ(r.corpus.pairs[i].source, c.pairs[i].source);
    EXPECT_FALSE(r.corpus.pairs[i].target.empty());
    for (TokenId t : r.corpus.pairs[i].target) EXPECT_TRUE(c.vocab.is_regular(t));
  }
}

}  // namespace
}  // namespace hrt
