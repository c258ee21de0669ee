// Copyright 2026 The HRT Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <random>
#include <span>
#include <vector>

#include "hrt/training/samples.hpp"

namespace hrt {

// p_k = (t/T)^lambda. Throws std::invalid_argument for T <= 0, lambda <= 0 or
// t outside [0, T].
double schedule_pk(double t, double total, double lambda = 1.0);

struct CurriculumSchedule {
  double total_steps = 1.0;
  double lambda = 1.0;

  // Steps past the end of the schedule stay at p_k = 1.
  double at(double step) const;
};

struct SampleOptions {
  int k = 2;
  EosPlacement skip_cmlm_eos = EosPlacement::natural;
  bool with_cmlm = true;  // false: auxiliary pairs yield AT samples only
};

// Each pair is primary with probability p_k and yields (SKIP-AT, SKIP-CMLM);
// otherwise it yields (AT, CMLM). Samples come out pair by pair.
std::vector<TrainingSample> assemble_batch(std::span<const SentencePair> pairs, double p_k, const Vocabulary& vocab,
                                           const SampleOptions& options, std::mt19937_64& rng);

}  // namespace hrt
