// Copyright 2026 The HRT Authors
// SPDX-License-Identifier: Apache-2.0

#include "hrt/training/samples.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace hrt {
namespace {

void require_target(const SentencePair& pair) {
  if (pair.target.empty()) throw std::invalid_argument("empty target sentence");
}

void require_chunk(int k) {
  if (k < 2) throw std::invalid_argument("chunk size k must be at least 2");
}

}  // namespace

const char* to_string(Task task) {
  switch (task) {
    case Task::at:
      return "at";
    case Task::cmlm:
      return "cmlm";
    case Task::skip_at:
      return "skip_at";
    case Task::skip_cmlm:
      return "skip_cmlm";
  }
  return "?";
}

MaskMode mask_mode(Task task) {
  return task == Task::at || task == Task::skip_at ? MaskMode::causal : MaskMode::full;
}

EosPlacement parse_eos_placement(const std::string& name) {
  if (name == "natural") return EosPlacement::natural;
  if (name == "grid") return EosPlacement::grid;
  throw std::invalid_argument("unknown EOS placement '" + name + "' (expected natural or grid)");
}

const char* to_string(EosPlacement placement) { return placement == EosPlacement::natural ? "natural" : "grid"; }

void TrainingSample::validate() const {
  input.validate();
  if (target.size() != input.size() || loss_mask.size() != input.size()) {
    throw std::invalid_argument("sample input, target and loss mask differ in length");
  }
}

std::size_t TrainingSample::loss_count() const {
  return static_cast<std::size_t>(std::count(loss_mask.begin(), loss_mask.end(), std::uint8_t{1}));
}

TrainingSample build_at_sample(const SentencePair& pair) {
  require_target(pair);
  const std::size_t n = pair.target.size();
  TrainingSample s;
  s.task = Task::at;
  s.source = pair.source;
  std::vector<TokenId> in;
  in.reserve(n + 1);
  in.push_back(kBos);
  in.insert(in.end(), pair.target.begin(), pair.target.end());
  s.input = PositionedSequence::contiguous(std::move(in), 0);
  s.target = pair.target;
  s.target.push_back(kEos);
  s.loss_mask.assign(n + 1, 1);
  return s;
}

TrainingSample build_cmlm_sample(const SentencePair& pair, std::span<const std::int32_t> masked_positions) {
  require_target(pair);
  const std::size_t n = pair.target.size();
  TrainingSample s;
  s.task = Task::cmlm;
  s.source = pair.source;
  std::vector<TokenId> in(pair.target);
  in.push_back(kEos);
  s.target.assign(n + 1, kPad);
  s.loss_mask.assign(n + 1, 0);
  for (std::int32_t p : masked_positions) {
    if (p < 1 || static_cast<std::size_t>(p) > n) throw std::out_of_range("CMLM mask position outside 1..N");
    const std::size_t i = static_cast<std::size_t>(p - 1);
    in[i] = kMask;
    s.target[i] = pair.target[i];
    s.loss_mask[i] = 1;
  }
  s.input = PositionedSequence::contiguous(std::move(in), 1);
  return s;
}

TrainingSample build_cmlm_sample(const SentencePair& pair, std::mt19937_64& rng) {
  require_target(pair);
  const std::size_t n = pair.target.size();
  // r in (0, 1]: 1 - U[0, 1).
  const double r = 1.0 - std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  const std::size_t count = std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(r * static_cast<double>(n))), 1, n);
  std::vector<std::int32_t> positions(n);
  std::iota(positions.begin(), positions.end(), 1);
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(positions[i], positions[pick(rng)]);
  }
  positions.resize(count);
  std::sort(positions.begin(), positions.end());
  return build_cmlm_sample(pair, positions);
}

SkipAnchors skip_anchor_positions(std::span<const TokenId> target, int k) {
  if (target.empty()) throw std::invalid_argument("empty target sentence");
  require_chunk(k);
  const std::size_t n = target.size();
  const std::size_t kk = static_cast<std::size_t>(k);
  const std::size_t m = (n + 1 + kk - 1) / kk;
  SkipAnchors a;
  for (std::size_t i = 1; i <= m; ++i) {
    const std::size_t p = i * kk;
    a.positions.push_back(static_cast<std::int32_t>(p));
    a.tokens.push_back(p <= n ? target[p - 1] : kEos);
  }
  return a;
}

TrainingSample build_skip_at_sample(const SentencePair& pair, int k, const Vocabulary& vocab) {
  const SkipAnchors a = skip_anchor_positions(pair.target, k);
  const std::size_t m = a.tokens.size();
  TrainingSample s;
  s.task = Task::skip_at;
  s.source = pair.source;
  s.input.tokens.push_back(vocab.bos_for(k));
  s.input.positions.push_back(0);
  for (std::size_t i = 0; i + 1 < m; ++i) {
    s.input.tokens.push_back(a.tokens[i]);
    s.input.positions.push_back(a.positions[i]);
  }
  s.target = a.tokens;
  s.loss_mask.assign(m, 1);
  return s;
}

TrainingSample build_skip_cmlm_sample(const SentencePair& pair, int k, EosPlacement eos) {
  require_target(pair);
  require_chunk(k);
  const std::size_t n = pair.target.size();
  const std::size_t kk = static_cast<std::size_t>(k);
  const std::size_t last = eos == EosPlacement::natural ? n + 1 : (n + 1 + kk - 1) / kk * kk;
  TrainingSample s;
  s.task = Task::skip_cmlm;
  s.source = pair.source;
  std::vector<TokenId> in(last, kMask);
  s.target.assign(last, kPad);
  s.loss_mask.assign(last, 0);
  for (std::size_t p = 1; p <= last; ++p) {
    const std::size_t i = p - 1;
    if (p == last) {
      in[i] = kEos;
    } else if (p <= n && p % kk == 0) {
      in[i] = pair.target[i];
    } else {
      s.target[i] = p <= n ? pair.target[i] : kEos;
      s.loss_mask[i] = 1;
    }
  }
  s.input = PositionedSequence::contiguous(std::move(in), 1);
  return s;
}

}  // namespace hrt
