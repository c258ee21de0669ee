// Copyright 2026 The HRT Authors
// SPDX-License-Identifier: Apache-2.0

#include "hrt/training/curriculum.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hrt {

double schedule_pk(double t, double total, double lambda) {
  if (!(total > 0.0)) throw std::invalid_argument("curriculum length T must be positive");
  if (!(lambda > 0.0)) throw std::invalid_argument("curriculum exponent lambda must be positive");
  if (t < 0.0 || t > total) throw std::invalid_argument("curriculum step outside [0, T]");
  if (t == total) return 1.0;
  return std::pow(t / total, lambda);
}

double CurriculumSchedule::at(double step) const { return schedule_pk(std::min(step, total_steps), total_steps, lambda); }

std::vector<TrainingSample> assemble_batch(std::span<const SentencePair> pairs, double p_k, const Vocabulary& vocab,
                                           const SampleOptions& options, std::mt19937_64& rng) {
  if (p_k < 0.0 || p_k > 1.0) throw std::invalid_argument("p_k outside [0, 1]");
  std::vector<TrainingSample> out;
  out.reserve(2 * pairs.size());
  std::bernoulli_distribution primary(p_k);
  for (const SentencePair& pair : pairs) {
    if (primary(rng)) {
      out.push_back(build_skip_at_sample(pair, options.k, vocab));
      out.push_back(build_skip_cmlm_sample(pair, options.k, options.skip_cmlm_eos));
    } else {
      out.push_back(build_at_sample(pair));
      if (options.with_cmlm) out.push_back(build_cmlm_sample(pair, rng));
    }
  }
  return out;
}

}  // namespace hrt
