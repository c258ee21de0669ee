// Copyright 2026 The HRT Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "hrt/data/corpus.hpp"
#include "hrt/model/positional.hpp"
#include "hrt/numerics/attention_mask.hpp"

namespace hrt {

enum class Task { at, cmlm, skip_at, skip_cmlm };
inline constexpr std::size_t kTaskCount = 4;

const char* to_string(Task task);
// Causal for at / skip_at, full otherwise.
MaskMode mask_mode(Task task);

// Targets at positions outside the loss mask hold kPad.
struct TrainingSample {
  Task task = Task::at;
  std::vector<TokenId> source;
  PositionedSequence input;
  std::vector<TokenId> target;
  std::vector<std::uint8_t> loss_mask;

  // Throws std::invalid_argument when lengths disagree or positions do not increase.
  void validate() const;
  std::size_t loss_count() const;
};

// Where a Skip-CMLM training sample puts [EOS].
//   natural: at N+1, the input covering positions 1..N+1.
//   grid:    at the last anchor slot m*k, as stage II sees it at inference;
//            masked slots in (N, m*k) then target [EOS].
enum class EosPlacement { natural, grid };

EosPlacement parse_eos_placement(const std::string& name);
const char* to_string(EosPlacement placement);

// ([BOS], y1..yN) at positions 0..N -> (y1..yN, [EOS]).
TrainingSample build_at_sample(const SentencePair& pair);

// y1..yN,[EOS] at positions 1..N+1 with ceil(r*N) of the y slots masked,
// r ~ Uniform(0, 1].
TrainingSample build_cmlm_sample(const SentencePair& pair, std::mt19937_64& rng);
// Same with an explicit set of 1-based masked positions (each in 1..N).
TrainingSample build_cmlm_sample(const SentencePair& pair, std::span<const std::int32_t> masked_positions);

struct SkipAnchors {
  std::vector<std::int32_t> positions;  // k, 2k, ..., m*k
  std::vector<TokenId> tokens;          // y_p, or [EOS] past N
};

// m = ceil((N+1)/k) anchors.
SkipAnchors skip_anchor_positions(std::span<const TokenId> target, int k);

// ([BOS_k], a1..a_{m-1}) at positions (0, k, ..., (m-1)k) -> (a1..a_m).
TrainingSample build_skip_at_sample(const SentencePair& pair, int k, const Vocabulary& vocab);

TrainingSample build_skip_cmlm_sample(const SentencePair& pair, int k, EosPlacement eos = EosPlacement::natural);

}  // namespace hrt
