// Copyright 2026 The HRT Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "hrt/data/corpus.hpp"
#include "hrt/model/transformer.hpp"

namespace hrt {

struct DistillResult {
  Corpus corpus;
  // Sentences where the teacher produced nothing and the source was copied.
  std::size_t fallbacks = 0;
};

// Replaces every target by the teacher's beam-search output; sources unchanged.
DistillResult distill_corpus(const Model& teacher, const Corpus& corpus, std::size_t beam = 5,
                             double length_penalty = 0.6);

}  // namespace hrt
