// Copyright 2026 The HRT Authors
// SPDX-License-Identifier: Apache-2.0

#include "hrt/bench/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace hrt::bench {
namespace {

template <typename T>
void check_lists(const std::vector<std::vector<T>>& c, const std::vector<std::vector<T>>& r) {
  if (c.size() != r.size()) throw std::invalid_argument("candidate and reference counts differ");
  if (c.empty()) throw std::invalid_argument("empty corpus");
}

template <typename T>
std::map<std::vector<T>, std::size_t> ngrams(const std::vector<T>& s, std::size_t n) {
  std::map<std::vector<T>, std::size_t> out;
  for (std::size_t i = 0; i + n <= s.size(); ++i) ++out[std::vector<T>(s.begin() + i, s.begin() + i + n)];
  return out;
}

template <typename T>
BleuResult corpus_bleu(const std::vector<std::vector<T>>& cands, const std::vector<std::vector<T>>& refs, int max_n) {
  check_lists(cands, refs);
  if (max_n < 1 || max_n > 4) throw std::invalid_argument("max_n must be in [1, 4]");
  std::array<std::size_t, 4> match{}, total{};
  BleuResult r;
  for (std::size_t s = 0; s < cands.size(); ++s) {
    r.candidate_length += cands[s].size();
    r.reference_length += refs[s].size();
    for (int n = 1; n <= max_n; ++n) {
      const auto cn = ngrams(cands[s], static_cast<std::size_t>(n));
      const auto rn = ngrams(refs[s], static_cast<std::size_t>(n));
      for (const auto& [g, count] : cn) {
        total[n - 1] += count;
        const auto it = rn.find(g);
        if (it != rn.end()) match[n - 1] += std::min(count, it->second);
      }
    }
  }
  double log_sum = 0.0;
  bool zero = false;
  for (int n = 1; n <= max_n; ++n) {
    double p;
    if (n == 1) {
      p = total[0] ? static_cast<double>(match[0]) / static_cast<double>(total[0]) : 0.0;
    } else {
      p = (static_cast<double>(match[n - 1]) + 1.0) / (static_cast<double>(total[n - 1]) + 1.0);
    }
    r.precisions[n - 1] = p;
    if (p == 0.0) zero = true;
    else log_sum += std::log(p);
  }
  const double c = static_cast<double>(r.candidate_length), ref = static_cast<double>(r.reference_length);
  r.brevity_penalty = c == 0.0 ? 0.0 : (c > ref ? 1.0 : std::exp(1.0 - ref / c));
  r.score = zero || c == 0.0 ? 0.0 : 100.0 * r.brevity_penalty * std::exp(log_sum / max_n);
  return r;
}

}  // namespace

BleuResult bleu(const std::vector<std::vector<std::string>>& candidates,
                const std::vector<std::vector<std::string>>& references, int max_n) {
  return corpus_bleu(candidates, references, max_n);
}

BleuResult bleu(const std::vector<std::vector<TokenId>>& candidates, const std::vector<std::vector<TokenId>>& references,
                int max_n) {
  return corpus_bleu(candidates, references, max_n);
}

double sequence_accuracy(const std::vector<std::vector<TokenId>>& candidates,
                         const std::vector<std::vector<TokenId>>& references) {
  check_lists(candidates, references);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) hits += candidates[i] == references[i];
  return static_cast<double>(hits) / static_cast<double>(candidates.size());
}

double token_accuracy(const std::vector<std::vector<TokenId>>& candidates,
                      const std::vector<std::vector<TokenId>>& references) {
  check_lists(candidates, references);
  std::size_t hits = 0, total = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& c = candidates[i];
    const auto& r = references[i];
    total += std::max(c.size(), r.size());
    for (std::size_t j = 0; j < std::min(c.size(), r.size()); ++j) hits += c[j] == r[j];
  }
  return total ? static_cast<double>(hits) / static_cast<double>(total) : 1.0;
}

}  // namespace hrt::bench
