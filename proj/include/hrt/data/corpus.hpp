// Copyright 2026 The HRT Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hrt/data/vocabulary.hpp"

namespace hrt {

inline constexpr std::size_t kDefaultMaxLen = 200;

class CorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Source and target without [BOS]/[EOS]; both non-empty.
struct SentencePair {
  std::vector<TokenId> source;
  std::vector<TokenId> target;

  friend bool operator==(const SentencePair&, const SentencePair&) = default;
};

struct Corpus {
  Vocabulary vocab;
  std::vector<SentencePair> pairs;

  std::size_t size() const { return pairs.size(); }

  // Checks ids are regular tokens of vocab and sides are non-empty.
  void validate() const;

  friend bool operator==(const Corpus&, const Corpus&) = default;
};

// Keeps the first max_len tokens.
std::vector<TokenId> truncate(std::span<const TokenId> seq, std::size_t max_len);

// One pair per line: source tokens, a single tab, target tokens.
Corpus load_corpus(const std::string& path, const Vocabulary& vocab);
void save_corpus(const Corpus& corpus, const std::string& path);

// Corpus file plus its vocabulary sidecar.
Corpus load_corpus(const std::string& path, const std::string& vocab_path);

// One sentence per line (no tab), for translate input/output files.
std::vector<std::vector<TokenId>> load_sentences(const std::string& path, const Vocabulary& vocab);

}  // namespace hrt
