// Copyright 2026 The HRT Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <random>

#include "hrt/decoding/decode.hpp"
#include "support/alloc_counter.hpp"

namespace hrt {
namespace {

using testing::AllocationCounter;

ModelConfig small_config() {
  ModelConfig c;
  c.d_model = 16;
  c.d_ff = 32;
  c.n_heads = 4;
  c.enc_layers = 2;
  c.dec_layers = 1;
  c.chunk_sizes = {2, 3, 4};
  c.vocab_size = 7 + 12;
  c.max_len = 24;
  return c;
}

std::vector<std::vector<TokenId>> random_sources(std::size_t n, std::size_t max_len, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> len(1, max_len);
  std::uniform_int_distribution<TokenId> tok(7, 18);
  std::vector<std::vector<TokenId>> out(n);
  for (auto& s : out) {
    s.resize(len(rng));
    for (auto& t : s) t = tok(rng);
  }
  return out;
}

TEST(AllocationCounter, SeesHeapAllocations) {
  AllocationCounter counter;
  auto* v = new std::vector<int>(100);
  delete v;
  EXPECT_GE(counter.count(), 2u);
}

TEST(Allocation, DecodersDoNotTouchTheHeapAfterSetup) {
  const ModelConfig cfg = small_config();
  const Model model(cfg, 11);
  DecodeWorkspace ws(cfg, cfg.max_len, 4, 3);
  const auto sources = random_sources(30, 40, 5);
  DecodeOptions at;
  at.b_at = 4;
  std::vector<DecodeOptions> hrt;
  for (int k : {2, 3, 4}) {
    DecodeOptions o;
    o.k = k;
    o.b_at = 4;
    o.b_nat = 3;
    hrt.push_back(o);
  }
  at_decode(model, sources[0], at, ws);
  AllocationCounter counter;
  std::size_t words = 0;
  for (const auto& s : sources) {
    words += at_decode(model, s, at, ws).tokens.size();
    for (const DecodeOptions& o : hrt) words += hrt_decode(model, s, o, ws).tokens.size();
  }
  EXPECT_EQ(counter.count(), 0u) << counter.bytes() << " bytes";
  EXPECT_GT(words, 0u);
}

TEST(Allocation, HighWaterStaysWithinEstimate) {
  const ModelConfig cfg = small_config();
  const Model model(cfg, 12);
  for (int k : {2, 3, 4}) {
    for (std::size_t b : {1, 3}) {
      const MemoryEstimate est = estimate_max_bytes(cfg, cfg.max_len, k, b, b);
      DecodeWorkspace ws(est);
      DecodeOptions o;
      o.k = k;
      o.b_at = b;
      o.b_nat = b;
      for (const auto& s : random_sources(20, 30, 7 + static_cast<std::uint64_t>(k))) {
        hrt_decode(model, s, o, ws);
        at_decode(model, s, o, ws);
      }
      EXPECT_LE(ws.sentence().high_water(), est.sentence);
      EXPECT_LE(ws.phase().high_water(), est.max_phase());
      for (auto p : {bench::Phase::encoder, bench::Phase::at, bench::Phase::skip_at, bench::Phase::skip_cmlm})
        EXPECT_LE(ws.phase().phase_high_water(p), est.phase(p)) << bench::to_string(p);
    }
  }
}

}  // namespace
}  // namespace hrt
