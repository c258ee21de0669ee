// Copyright 2026 The HRT Authors
// SPDX-License-Identifier: Apache-2.0

// Autoregressive beam search and the two-stage hybrid decode. The *_decode
// entry points run entirely inside a DecodeWorkspace and return views into
// it; the *_translate wrappers copy the result out.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hrt/bench/arena.hpp"
#include "hrt/model/inference.hpp"

namespace hrt {

// Per-phase and per-sentence arena sizes for one decode configuration.
struct MemoryEstimate {
  std::size_t encoder = 0;
  std::size_t at = 0;
  std::size_t skip_at = 0;
  std::size_t skip_cmlm = 0;
  std::size_t sentence = 0;  // buffers that live across phases

  // Capacity of the phase arena: the largest single phase.
  std::size_t max_phase() const;
  std::size_t total() const { return sentence + max_phase(); }
  std::size_t phase(bench::Phase p) const;
};

// Worst case at source and target length L. The AT phase assumes beam b_at.
MemoryEstimate estimate_max_bytes(const ModelConfig& config, std::size_t max_len, int k, std::size_t b_at,
                                  std::size_t b_nat);

// Elementwise maximum, for a workspace shared by several configurations.
MemoryEstimate merge(const MemoryEstimate& a, const MemoryEstimate& b);

// A finished beam entry. Tokens exclude the start token and end with [EOS].
struct HypothesisView {
  std::span<const TokenId> tokens;
  std::span<const double> log_probs;
  double score = 0.0;  // sum of log_probs
  bool forced = false;
};

// Result of one decode, valid until the workspace decodes the next sentence.
struct DecodeOutcome {
  std::span<const TokenId> tokens;  // truncated at [EOS] and capped at L
  double skip_at_score = 0.0;       // AT: the whole log-prob
  double skip_cmlm_score = 0.0;
  double score = 0.0;  // length-penalized ranking score
  std::size_t decoder_calls = 0;
  std::size_t ar_steps = 0;
  std::size_t candidates = 0;
  std::size_t best_index = 0;  // rank of the winner among stage-I survivors
  bool forced_finish = false;
  std::span<const HypothesisView> stage1;  // sorted by score, best first
};

// Two arenas reserved once: `sentence` is reset per sentence, `phase` per phase.
class DecodeWorkspace {
 public:
  explicit DecodeWorkspace(const MemoryEstimate& estimate);
  // Large enough for AT with beam b_at and HRT with every supported k.
  DecodeWorkspace(const ModelConfig& config, std::size_t max_len, std::size_t b_at, std::size_t b_nat);

  bench::Arena& sentence() { return sentence_; }
  bench::Arena& phase() { return phase_; }
  const MemoryEstimate& estimate() const { return estimate_; }
  DecodeOutcome& outcome() { return outcome_; }

 private:
  MemoryEstimate estimate_;
  DecodeOutcome outcome_;
  bench::Arena sentence_;
  bench::Arena phase_;
};

struct DecodeOptions {
  int k = 2;
  std::size_t b_at = 1;  // beam of AT search and of the Skip-AT stage
  std::size_t b_nat = 1;
  double length_penalty = 0.6;
  std::size_t max_len = 0;  // L; 0 takes the model's max_len
};

const DecodeOutcome& at_decode(const Model& model, std::span<const TokenId> source, const DecodeOptions& options,
                               DecodeWorkspace& ws);
const DecodeOutcome& hrt_decode(const Model& model, std::span<const TokenId> source, const DecodeOptions& options,
                                DecodeWorkspace& ws);

struct Hypothesis {
  std::vector<TokenId> tokens;
  std::vector<std::int32_t> positions;
  std::vector<double> log_probs;
  double score = 0.0;
  bool finished = false;
  bool forced = false;
};

struct Translation {
  std::vector<TokenId> tokens;
  double skip_at_score = 0.0;
  double skip_cmlm_score = 0.0;
  double score = 0.0;
  std::size_t decoder_calls = 0;
  std::size_t ar_steps = 0;
  std::vector<TokenId> anchors;  // HRT only
  bool forced_finish = false;
  double seconds = 0.0;
};

// Standard beam search from [BOS]; beam 1 is greedy.
Translation at_translate(const Model& model, std::span<const TokenId> source, std::size_t beam, double length_penalty,
                         std::size_t max_len = 0);

// Stage I: beam search over anchors at positions k, 2k, ... with at most
// max_steps decoder calls. Every returned hypothesis ends with [EOS].
std::vector<Hypothesis> skip_at_stage(const Model& model, const EncoderMemory& memory, int k, std::size_t b_at,
                                      std::size_t max_steps, bench::Arena& scratch);

// k-1 [MASK]s before every anchor; positions 1..k*m.
PositionedSequence build_stage2_input(std::span<const TokenId> anchors, int k);

struct FillResult {
  std::vector<TokenId> tokens;
  std::vector<std::int32_t> mask_positions;
  std::vector<double> mask_log_probs;
  std::size_t decoder_calls = 0;
};

// One full-mode decoder call; every [MASK] takes its argmax token.
FillResult skip_cmlm_fill(const Model& model, const EncoderMemory& memory, const PositionedSequence& input,
                          bench::Arena& scratch);

// (skip_at_score + sum(fill_log_probs)) / length^alpha.
double combined_score(double skip_at_score, std::span<const double> fill_log_probs, std::size_t length, double alpha);

std::vector<TokenId> truncate_at_eos(std::span<const TokenId> tokens);

// Requires b_at >= b_nat >= 1.
Translation hrt_translate(const Model& model, std::span<const TokenId> source, const DecodeOptions& options);

// Argmax candidates exclude [PAD], [BOS], [MASK] and every [BOS_k].
bool is_output_token(const ModelConfig& config, TokenId id);

}  // namespace hrt
