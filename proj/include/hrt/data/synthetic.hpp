// Copyright 2026 The HRT Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hrt/data/corpus.hpp"

namespace hrt {

enum class SyntheticTask { copy, reverse, mapped_swap };

SyntheticTask parse_synthetic_task(const std::string& name);
const char* to_string(SyntheticTask task);

// Token-level rule of the mapped-swap task. The target is the source passed
// through a bijection over regular tokens, after which each adjacent pair
// (2i, 2i+1) is swapped when the token at 2i belongs to the trigger set. Each
// regular token is a trigger with probability swap_prob, so a pair swaps with
// that probability under uniform sampling while the target stays a
// deterministic function of the source.
struct MappedSwapRule {
  std::vector<TokenId> map;            // indexed by id, identity on specials
  std::vector<std::uint8_t> triggers;  // indexed by id

  static MappedSwapRule draw(const Vocabulary& vocab, double swap_prob, bool identity_map, std::uint64_t seed);
  static MappedSwapRule identity(const Vocabulary& vocab);

  std::vector<TokenId> apply(std::span<const TokenId> source) const;
};

struct SyntheticSpec {
  SyntheticTask task = SyntheticTask::copy;
  std::size_t n_pairs = 1000;
  std::size_t min_len = 5;
  std::size_t max_len = 40;
  std::size_t vocab_size = 71;  // total, specials included
  std::uint64_t seed = 1;
  // Fixes the mapped-swap bijection and trigger set independently of the
  // sampling seed, so train and held-out corpora share one task.
  std::uint64_t task_seed = 7;
  double swap_prob = 0.3;
  bool identity_map = false;
  std::size_t length_cap = kDefaultMaxLen;  // L
  std::vector<int> chunk_sizes = {2, 3, 4};
};

// Throws std::invalid_argument if vocab_size leaves fewer than 2 regular
// tokens or the length range is outside [1, L].
Corpus generate_synthetic(const SyntheticSpec& spec);

}  // namespace hrt
