// Copyright 2026 The HRT Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hrt/data/vocabulary.hpp"

namespace hrt {

// Sinusoidal encoding at an explicit integer position:
//   pe[2i] = sin(pos / 10000^(2i/d)), pe[2i+1] = cos(pos / 10000^(2i/d)).
std::vector<double> positional_encoding(std::int64_t position, std::size_t d_model);

// Precomputed rows for positions [0, limit).
class PositionalTable {
 public:
  PositionalTable() = default;
  PositionalTable(std::size_t limit, std::size_t d_model);

  std::size_t limit() const { return limit_; }
  // Throws std::out_of_range outside [0, limit).
  std::span<const double> row(std::int64_t position) const;

 private:
  std::size_t limit_ = 0;
  std::size_t d_model_ = 0;
  std::vector<double> table_;
};

// Token ids with explicit, strictly increasing positions. Skip-AT inputs keep
// their original-sequence positions, e.g. (0, 2, 4).
struct PositionedSequence {
  std::vector<TokenId> tokens;
  std::vector<std::int32_t> positions;

  std::size_t size() const { return tokens.size(); }
  // Throws std::invalid_argument on length mismatch or non-increasing positions.
  void validate() const;

  static PositionedSequence contiguous(std::vector<TokenId> tokens, std::int32_t first_position);

  friend bool operator==(const PositionedSequence&, const PositionedSequence&) = default;
};

}  // namespace hrt
