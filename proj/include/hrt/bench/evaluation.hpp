// Copyright 2026 The HRT Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <string>
#include <vector>

#include "hrt/data/vocabulary.hpp"

namespace hrt::bench {

struct BleuResult {
  double score = 0.0;  // [0, 100]
  std::array<double, 4> precisions{};
  double brevity_penalty = 0.0;
  std::size_t candidate_length = 0;
  std::size_t reference_length = 0;
};

// Corpus-level BLEU with clipped n-gram counts, brevity penalty and add-one
// smoothing on the n > 1 precisions. Throws std::invalid_argument for an empty
// corpus, mismatched list lengths or max_n outside [1, 4].
BleuResult bleu(const std::vector<std::vector<std::string>>& candidates,
                const std::vector<std::vector<std::string>>& references, int max_n = 4);
BleuResult bleu(const std::vector<std::vector<TokenId>>& candidates,
                const std::vector<std::vector<TokenId>>& references, int max_n = 4);

// Fraction of exact sequence matches.
double sequence_accuracy(const std::vector<std::vector<TokenId>>& candidates,
                         const std::vector<std::vector<TokenId>>& references);
// Position-wise matches over the longer of each candidate/reference pair.
double token_accuracy(const std::vector<std::vector<TokenId>>& candidates,
                      const std::vector<std::vector<TokenId>>& references);

}  // namespace hrt::bench
