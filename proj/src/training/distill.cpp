// Copyright 2026 The HRT Authors
// SPDX-License-Identifier: Apache-2.0

#include "hrt/training/distill.hpp"

#include "hrt/decoding/decode.hpp"

namespace hrt {

DistillResult distill_corpus(const Model& teacher, const Corpus& corpus, std::size_t beam, double length_penalty) {
  if (corpus.vocab.size() != teacher.config().vocab_size) {
    throw std::invalid_argument("teacher and corpus vocabularies differ");
  }
  DecodeOptions o;
  o.b_at = beam;
  o.b_nat = 1;
  o.length_penalty = length_penalty;
  const ModelConfig& cfg = teacher.config();
  DecodeWorkspace ws(estimate_max_bytes(cfg, cfg.max_len, cfg.chunk_sizes.front(), beam, 1));
  DistillResult r;
  r.corpus.vocab = corpus.vocab;
  r.corpus.pairs.reserve(corpus.pairs.size());
  for (const SentencePair& p : corpus.pairs) {
    const DecodeOutcome& out = at_decode(teacher, p.source, o, ws);
    SentencePair q{p.source, {out.tokens.begin(), out.tokens.end()}};
    if (q.target.empty()) {
      q.target = truncate(p.source, cfg.max_len);
      ++r.fallbacks;
    }
    r.corpus.pairs.push_back(std::move(q));
  }
  return r;
}

}  // namespace hrt
