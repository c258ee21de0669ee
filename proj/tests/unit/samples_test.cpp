// Copyright 2026 The HRT Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "hrt/training/curriculum.hpp"
#include "hrt/training/samples.hpp"

namespace hrt {
namespace {

using V = std::vector<TokenId>;
using P = std::vector<std::int32_t>;
using M = std::vector<std::uint8_t>;

const Vocabulary kVocab = Vocabulary::synthetic(20);
constexpr TokenId y1 = 7, y2 = 8, y3 = 9, y4 = 10, y5 = 11;

SentencePair pair_of(V target) { return {{12, 13}, std::move(target)}; }

TEST(AtSample, WorkedExample) {
  const TrainingSample s = build_at_sample(pair_of({y1, y2, y3, y4}));
  EXPECT_EQ(s.task, Task::at);
  EXPECT_EQ(s.input.tokens, (V{kBos, y1, y2, y3, y4}));
  EXPECT_EQ(s.input.positions, (P{0, 1, 2, 3, 4}));
  EXPECT_EQ(s.target, (V{y1, y2, y3, y4, kEos}));
  EXPECT_EQ(s.loss_mask, (M{1, 1, 1, 1, 1}));
  EXPECT_EQ(s.source, (V{12, 13}));
}

TEST(AtSample, MinimalAndEmpty) {
  const TrainingSample s = build_at_sample(pair_of({y1}));
  EXPECT_EQ(s.input.tokens, (V{kBos, y1}));
  EXPECT_EQ(s.target, (V{y1, kEos}));
  EXPECT_THROW(build_at_sample(pair_of({})), std::invalid_argument);
}

TEST(CmlmSample, WorkedExample) {
  const std::vector<std::int32_t> masked = {2, 3};
  const TrainingSample s = build_cmlm_sample(pair_of({y1, y2, y3, y4}), masked);
  EXPECT_EQ(s.task, Task::cmlm);
  EXPECT_EQ(s.input.tokens, (V{y1, kMask, kMask, y4, kEos}));
  EXPECT_EQ(s.input.positions, (P{1, 2, 3, 4, 5}));
  EXPECT_EQ(s.target, (V{kPad, y2, y3, kPad, kPad}));
  EXPECT_EQ(s.loss_mask, (M{0, 1, 1, 0, 0}));
}

TEST(CmlmSample, ExtremesAndRandomRatio) {
  const std::vector<std::int32_t> all = {1, 2, 3};
  const TrainingSample s = build_cmlm_sample(pair_of({y1, y2, y3}), all);
  EXPECT_EQ(s.input.tokens, (V{kMask, kMask, kMask, kEos}));
  EXPECT_EQ(s.loss_count(), 3u);
  const std::vector<std::int32_t> one = {1};
  const TrainingSample t = build_cmlm_sample(pair_of({y1}), one);
  EXPECT_EQ(t.input.tokens, (V{kMask, kEos}));
  EXPECT_EQ(t.loss_mask, (M{1, 0}));

  std::mt19937_64 rng(3);
  std::set<std::size_t> counts;
  for (int i = 0; i < 500; ++i) {
    const TrainingSample r = build_cmlm_sample(pair_of({y1, y2, y3, y4, y5}), rng);
    EXPECT_GE(r.loss_count(), 1u);
    EXPECT_EQ(r.input.tokens.back(), kEos);
    EXPECT_EQ(r.loss_mask.back(), 0);
    for (std::size_t j = 0; j < r.input.size(); ++j) EXPECT_EQ(r.loss_mask[j] != 0, r.input.tokens[j] == kMask);
    counts.insert(r.loss_count());
  }
  EXPECT_EQ(counts, (std::set<std::size_t>{1, 2, 3, 4, 5}));
}

TEST(SkipAnchors, RuleExamples) {
  SkipAnchors a = skip_anchor_positions(V{y1, y2, y3, y4}, 2);
  EXPECT_EQ(a.positions, (P{2, 4, 6}));
  EXPECT_EQ(a.tokens, (V{y2, y4, kEos}));
  a = skip_anchor_positions(V{y1, y2, y3, y4, y5}, 3);
  EXPECT_EQ(a.positions, (P{3, 6}));
  EXPECT_EQ(a.tokens, (V{y3, kEos}));
  a = skip_anchor_positions(V{y1}, 2);
  EXPECT_EQ(a.positions, (P{2}));
  EXPECT_EQ(a.tokens, (V{kEos}));
}

TEST(SkipAtSample, WorkedExample) {
  const TrainingSample s = build_skip_at_sample(pair_of({y1, y2, y3, y4}), 2, kVocab);
  EXPECT_EQ(s.task, Task::skip_at);
  EXPECT_EQ(s.input.tokens, (V{kVocab.bos_for(2), y2, y4}));
  EXPECT_EQ(s.input.positions, (P{0, 2, 4}));
  EXPECT_EQ(s.target, (V{y2, y4, kEos}));
  EXPECT_EQ(s.loss_mask, (M{1, 1, 1}));
}

TEST(SkipAtSample, OtherChunks) {
  TrainingSample s = build_skip_at_sample(pair_of({y1, y2, y3, y4}), 4, kVocab);
  EXPECT_EQ(s.input.tokens, (V{kVocab.bos_for(4), y4}));
  EXPECT_EQ(s.input.positions, (P{0, 4}));
  EXPECT_EQ(s.target, (V{y4, kEos}));
  s = build_skip_at_sample(pair_of({y1}), 2, kVocab);
  EXPECT_EQ(s.input.tokens, (V{kVocab.bos_for(2)}));
  EXPECT_EQ(s.input.positions, (P{0}));
  EXPECT_EQ(s.target, (V{kEos}));
}

TEST(SkipCmlmSample, WorkedExample) {
  const TrainingSample s = build_skip_cmlm_sample(pair_of({y1, y2, y3, y4}), 2);
  EXPECT_EQ(s.task, Task::skip_cmlm);
  EXPECT_EQ(s.input.tokens, (V{kMask, y2, kMask, y4, kEos}));
  EXPECT_EQ(s.input.positions, (P{1, 2, 3, 4, 5}));
  EXPECT_EQ(s.target, (V{y1, kPad, y3, kPad, kPad}));
  EXPECT_EQ(s.loss_mask, (M{1, 0, 1, 0, 0}));
}

TEST(SkipCmlmSample, OddLengthAndLargeChunk) {
  TrainingSample s = build_skip_cmlm_sample(pair_of({y1, y2, y3}), 2);
  EXPECT_EQ(s.input.tokens, (V{kMask, y2, kMask, kEos}));
  EXPECT_EQ(s.loss_mask, (M{1, 0, 1, 0}));
  EXPECT_EQ(s.target[0], y1);
  EXPECT_EQ(s.target[2], y3);
  s = build_skip_cmlm_sample(pair_of({y1, y2}), 4);
  EXPECT_EQ(s.input.tokens, (V{kMask, kMask, kEos}));
  EXPECT_EQ(s.loss_count(), 2u);
}

TEST(SkipCmlmSample, GridPlacementMatchesStageTwoLayout) {
  // N=3, k=2: anchors at 2 and 4, [EOS] on the grid at 4, slot 3 must predict y3.
  TrainingSample s = build_skip_cmlm_sample(pair_of({y1, y2, y3}), 2, EosPlacement::grid);
  EXPECT_EQ(s.input.tokens, (V{kMask, y2, kMask, kEos}));
  EXPECT_EQ(s.input.positions, (P{1, 2, 3, 4}));
  EXPECT_EQ(s.loss_mask, (M{1, 0, 1, 0}));
  // N=4, k=2: [EOS] at 6 and the mask at 5 (past N) targets [EOS].
  s = build_skip_cmlm_sample(pair_of({y1, y2, y3, y4}), 2, EosPlacement::grid);
  EXPECT_EQ(s.input.tokens, (V{kMask, y2, kMask, y4, kMask, kEos}));
  EXPECT_EQ(s.target, (V{y1, kPad, y3, kPad, kEos, kPad}));
  // N=2, k=4: one anchor, three masks, the one past N targets [EOS].
  s = build_skip_cmlm_sample(pair_of({y1, y2}), 4, EosPlacement::grid);
  EXPECT_EQ(s.input.tokens, (V{kMask, kMask, kMask, kEos}));
  EXPECT_EQ(s.target, (V{y1, y2, kEos, kPad}));
  EXPECT_EQ(parse_eos_placement("grid"), EosPlacement::grid);
  EXPECT_THROW(parse_eos_placement("middle"), std::invalid_argument);
}

std::vector<SentencePair> random_pairs(std::mt19937_64& rng, std::size_t n, std::size_t max_len) {
  std::uniform_int_distribution<std::size_t> len(1, max_len);
  std::uniform_int_distribution<TokenId> tok(kVocab.first_regular(), static_cast<TokenId>(kVocab.size()) - 1);
  std::vector<SentencePair> out(n);
  for (auto& p : out) {
    p.source.resize(len(rng));
    p.target.resize(len(rng));
    for (auto& t : p.source) t = tok(rng);
    for (auto& t : p.target) t = tok(rng);
  }
  return out;
}

TEST(SampleProperties, SkipPositionsAndAnchorConsistency) {
  std::mt19937_64 rng(21);
  for (const SentencePair& p : random_pairs(rng, 300, 17)) {
    for (int k : {2, 3, 4}) {
      const TrainingSample at = build_skip_at_sample(p, k, kVocab);
      for (std::size_t i = 0; i < at.input.size(); ++i) EXPECT_EQ(at.input.positions[i], static_cast<int>(i) * k);
      for (EosPlacement e : {EosPlacement::natural, EosPlacement::grid}) {
        const TrainingSample cm = build_skip_cmlm_sample(p, k, e);
        ASSERT_NO_THROW(cm.validate());
        // Anchors observed by SKIP-CMLM are exactly the SKIP-AT targets at p <= N.
        for (std::size_t j = 0; j < at.target.size(); ++j) {
          const auto pos = static_cast<std::size_t>(k) * (j + 1);
          if (pos > p.target.size()) continue;
          EXPECT_EQ(cm.input.tokens[pos - 1], at.target[j]);
          EXPECT_EQ(cm.loss_mask[pos - 1], 0);
        }
        for (std::size_t j = 0; j < cm.input.size(); ++j) EXPECT_EQ(cm.loss_mask[j] != 0, cm.input.tokens[j] == kMask);
      }
    }
  }
}

TEST(SampleProperties, CoverageOfDecoderInputs) {
  std::mt19937_64 rng(22);
  for (const SentencePair& p : random_pairs(rng, 100, 12)) {
    const int k = 2;
    std::vector<int> seen(p.target.size() + 1, 0);
    const TrainingSample at = build_at_sample(p);
    for (std::size_t i = 1; i < at.input.size(); ++i) seen[static_cast<std::size_t>(at.input.positions[i])] = 1;
    for (std::size_t i = 1; i <= p.target.size(); ++i) EXPECT_TRUE(seen[i]);
    // SKIP-* never shows tokens at positions off the k grid.
    const TrainingSample sa = build_skip_at_sample(p, k, kVocab);
    const TrainingSample sc = build_skip_cmlm_sample(p, k);
    for (const TrainingSample* s : {&sa, &sc}) {
      for (std::size_t i = 0; i < s->input.size(); ++i) {
        const auto pos = s->input.positions[i];
        const TokenId t = s->input.tokens[i];
        if (kVocab.is_regular(t)) EXPECT_EQ(pos % k, 0);
      }
    }
  }
}

TEST(Curriculum, Endpoints) {
  EXPECT_EQ(schedule_pk(0, 100), 0.0);
  EXPECT_EQ(schedule_pk(100, 100), 1.0);
  EXPECT_EQ(schedule_pk(50, 100), 0.5);
  EXPECT_NEAR(schedule_pk(50, 100, 2.0), 0.25, 1e-15);
  EXPECT_THROW(schedule_pk(1, 0), std::invalid_argument);
  EXPECT_THROW(schedule_pk(1, 10, 0.0), std::invalid_argument);
  EXPECT_THROW(schedule_pk(11, 10), std::invalid_argument);
  const CurriculumSchedule s{10, 1};
  EXPECT_EQ(s.at(20), 1.0);
  double prev = 0.0;
  for (int t = 0; t <= 10; ++t) {
    EXPECT_GE(s.at(t), prev);
    prev = s.at(t);
  }
}

TEST(Curriculum, BatchComposition) {
  std::mt19937_64 rng(23);
  const auto pairs = random_pairs(rng, 200, 9);
  const SampleOptions opt;
  for (const auto& s : assemble_batch(pairs, 0.0, kVocab, opt, rng))
    EXPECT_TRUE(s.task == Task::at || s.task == Task::cmlm);
  for (const auto& s : assemble_batch(pairs, 1.0, kVocab, opt, rng))
    EXPECT_TRUE(s.task == Task::skip_at || s.task == Task::skip_cmlm);
  // Samples come in pairs from the same sentence and branch.
  const auto mixed = assemble_batch(pairs, 0.5, kVocab, opt, rng);
  ASSERT_EQ(mixed.size(), 2 * pairs.size());
  for (std::size_t i = 0; i < mixed.size(); i += 2) {
    const bool primary = mixed[i].task == Task::skip_at;
    EXPECT_EQ(mixed[i + 1].task, primary ? Task::skip_cmlm : Task::cmlm);
    EXPECT_EQ(mixed[i].source, mixed[i + 1].source);
  }
  SampleOptions at_only;
  at_only.with_cmlm = false;
  const auto plain = assemble_batch(pairs, 0.0, kVocab, at_only, rng);
  ASSERT_EQ(plain.size(), pairs.size());
  for (const auto& s : plain) EXPECT_EQ(s.task, Task::at);
}

TEST(Curriculum, PrimaryFractionWithinBinomialBound) {
  std::mt19937_64 rng(24);
  const auto pairs = random_pairs(rng, 10000, 4);
  const auto samples = assemble_batch(pairs, 0.5, kVocab, SampleOptions{}, rng);
  std::size_t primary = 0;
  for (std::size_t i = 0; i < samples.size(); i += 2) primary += samples[i].task == Task::skip_at;
  const double frac = static_cast<double>(primary) / 10000.0;
  // 3 sigma of Binomial(10000, 0.5) is 0.015.
  EXPECT_GE(frac, 0.47);
  EXPECT_LE(frac, 0.53);
}

}  // namespace
}  // namespace hrt
