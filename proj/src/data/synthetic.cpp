// Copyright 2026 The HRT Authors
// SPDX-License-Identifier: Apache-2.0

#include "hrt/data/synthetic.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>

namespace hrt {

SyntheticTask parse_synthetic_task(const std::string& name) {
  if (name == "copy") return SyntheticTask::copy;
  if (name == "reverse") return SyntheticTask::reverse;
  if (name == "mapped-swap" || name == "mapped_swap") return SyntheticTask::mapped_swap;
  throw std::invalid_argument("unknown synthetic task '" + name + "' (copy|reverse|mapped-swap)");
}

const char* to_string(SyntheticTask task) {
  switch (task) {
    case SyntheticTask::copy: return "copy";
    case SyntheticTask::reverse: return "reverse";
    case SyntheticTask::mapped_swap: return "mapped-swap";
  }
  return "?";
}

MappedSwapRule MappedSwapRule::identity(const Vocabulary& vocab) {
  MappedSwapRule rule;
  rule.map.resize(vocab.size());
  std::iota(rule.map.begin(), rule.map.end(), TokenId{0});
  rule.triggers.assign(vocab.size(), 0);
  return rule;
}

MappedSwapRule MappedSwapRule::draw(const Vocabulary& vocab, double swap_prob, bool identity_map, std::uint64_t seed) {
  if (swap_prob < 0.0 || swap_prob > 1.0) throw std::invalid_argument("swap_prob must lie in [0, 1]");
  MappedSwapRule rule = identity(vocab);
  std::mt19937_64 rng(seed);
  if (!identity_map) {
    std::shuffle(rule.map.begin() + vocab.first_regular(), rule.map.end(), rng);
  }
  std::bernoulli_distribution trig(swap_prob);
  for (std::size_t id = static_cast<std::size_t>(vocab.first_regular()); id < vocab.size(); ++id) {
    rule.triggers[id] = trig(rng) ? 1 : 0;
  }
  return rule;
}

std::vector<TokenId> MappedSwapRule::apply(std::span<const TokenId> source) const {
  std::vector<TokenId> out(source.size());
  for (std::size_t i = 0; i < source.size(); ++i) out[i] = map.at(static_cast<std::size_t>(source[i]));
  for (std::size_t i = 0; i + 1 < source.size(); i += 2) {
    if (triggers.at(static_cast<std::size_t>(source[i]))) std::swap(out[i], out[i + 1]);
  }
  return out;
}

Corpus generate_synthetic(const SyntheticSpec& spec) {
  Vocabulary probe(spec.chunk_sizes);
  const std::size_t specials = static_cast<std::size_t>(probe.first_regular());
  if (spec.vocab_size < specials + 2) {
    throw std::invalid_argument("vocab_size " + std::to_string(spec.vocab_size) + " leaves fewer than 2 regular tokens (" +
                                std::to_string(specials) + " reserved)");
  }
  if (spec.min_len < 1 || spec.min_len > spec.max_len || spec.max_len > spec.length_cap) {
    throw std::invalid_argument("length range must satisfy 1 <= min_len <= max_len <= L");
  }
  Corpus corpus{Vocabulary::synthetic(spec.vocab_size - specials, spec.chunk_sizes), {}};
  const MappedSwapRule rule = spec.task == SyntheticTask::mapped_swap
                                  ? MappedSwapRule::draw(corpus.vocab, spec.swap_prob, spec.identity_map, spec.task_seed)
                                  : MappedSwapRule::identity(corpus.vocab);
  std::mt19937_64 rng(spec.seed);
  std::uniform_int_distribution<std::size_t> len(spec.min_len, spec.max_len);
  std::uniform_int_distribution<TokenId> tok(corpus.vocab.first_regular(), static_cast<TokenId>(spec.vocab_size - 1));
  corpus.pairs.reserve(spec.n_pairs);
  for (std::size_t i = 0; i < spec.n_pairs; ++i) {
    SentencePair p;
    p.source.resize(len(rng));
    for (auto& t : p.source) t = tok(rng);
    switch (spec.task) {
      case SyntheticTask::copy: p.target = p.source; break;
      case SyntheticTask::reverse: p.target.assign(p.source.rbegin(), p.source.rend()); break;
      case SyntheticTask::mapped_swap: p.target = rule.apply(p.source); break;
    }
    corpus.pairs.push_back(std::move(p));
  }
  return corpus;
}

}  // namespace hrt
