// Copyright 2026 The HRT Authors
// SPDX-License-Identifier: Apache-2.0

#include "hrt/model/positional.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace hrt {

std::vector<double> positional_encoding(std::int64_t position, std::size_t d_model) {
  std::vector<double> pe(d_model);
  const double pos = static_cast<double>(position);
  for (std::size_t i = 0; i < d_model; i += 2) {
    const double freq = std::pow(10000.0, -static_cast<double>(i) / static_cast<double>(d_model));
    pe[i] = std::sin(pos * freq);
    if (i + 1 < d_model) pe[i + 1] = std::cos(pos * freq);
  }
  return pe;
}

PositionalTable::PositionalTable(std::size_t limit, std::size_t d_model)
    : limit_(limit), d_model_(d_model), table_(limit * d_model) {
  for (std::size_t p = 0; p < limit; ++p) {
    const auto pe = positional_encoding(static_cast<std::int64_t>(p), d_model);
    std::copy(pe.begin(), pe.end(), table_.begin() + static_cast<std::ptrdiff_t>(p * d_model));
  }
}

std::span<const double> PositionalTable::row(std::int64_t position) const {
  if (position < 0 || static_cast<std::size_t>(position) >= limit_) {
    throw std::out_of_range("position " + std::to_string(position) + " outside [0, " + std::to_string(limit_) + ")");
  }
  return {table_.data() + static_cast<std::size_t>(position) * d_model_, d_model_};
}

void PositionedSequence::validate() const {
  if (tokens.size() != positions.size()) throw std::invalid_argument("tokens and positions differ in length");
  for (std::size_t i = 1; i < positions.size(); ++i) {
    if (positions[i] <= positions[i - 1]) throw std::invalid_argument("positions must be strictly increasing");
  }
}

PositionedSequence PositionedSequence::contiguous(std::vector<TokenId> tokens, std::int32_t first_position) {
  PositionedSequence s;
  s.positions.resize(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) s.positions[i] = first_position + static_cast<std::int32_t>(i);
  s.tokens = std::move(tokens);
  return s;
}

}  // namespace hrt
