// Copyright 2026 The HRT Authors
// SPDX-License-Identifier: Apache-2.0

#include "hrt/data/corpus.hpp"

#include <algorithm>
#include <fstream>

namespace hrt {
namespace {

std::vector<TokenId> encode_side(const Vocabulary& vocab, std::string_view text, const std::string& where) {
  std::vector<TokenId> ids;
  try {
    ids = vocab.encode(text);
  } catch (const UnknownTokenError& e) {
    throw CorpusError(where + ": " + e.what());
  }
  if (ids.empty()) throw CorpusError(where + ": empty side");
  for (TokenId id : ids) {
    if (vocab.is_special(id)) throw CorpusError(where + ": special token '" + vocab.token(id) + "' inside a sentence");
  }
  return ids;
}

}  // namespace

void Corpus::validate() const {
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    for (const auto* side : {&pairs[i].source, &pairs[i].target}) {
      if (side->empty()) throw CorpusError("pair " + std::to_string(i) + " has an empty side");
      for (TokenId id : *side) {
        if (!vocab.is_regular(id)) throw CorpusError("pair " + std::to_string(i) + " holds non-regular id " + std::to_string(id));
      }
    }
  }
}

std::vector<TokenId> truncate(std::span<const TokenId> seq, std::size_t max_len) {
  const std::size_t n = std::min(seq.size(), max_len);
  return {seq.begin(), seq.begin() + static_cast<std::ptrdiff_t>(n)};
}

Corpus load_corpus(const std::string& path, const Vocabulary& vocab) {
  std::ifstream is(path);
  if (!is) throw CorpusError("cannot open corpus: " + path);
  Corpus corpus{vocab, {}};
  std::size_t lineno = 0;
  for (std::string line; std::getline(is, line);) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string where = path + ":" + std::to_string(lineno);
    const auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
      throw CorpusError(where + ": expected exactly one tab");
    }
    SentencePair p;
    p.source = encode_side(vocab, std::string_view(line).substr(0, tab), where);
    p.target = encode_side(vocab, std::string_view(line).substr(tab + 1), where);
    corpus.pairs.push_back(std::move(p));
  }
  return corpus;
}

Corpus load_corpus(const std::string& path, const std::string& vocab_path) {
  return load_corpus(path, Vocabulary::load(vocab_path));
}

void save_corpus(const Corpus& corpus, const std::string& path) {
  corpus.validate();
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw CorpusError("cannot write corpus: " + path);
  for (const auto& p : corpus.pairs) {
    os << corpus.vocab.decode(p.source) << '\t' << corpus.vocab.decode(p.target) << '\n';
  }
  if (!os) throw CorpusError("write failed: " + path);
}

std::vector<std::vector<TokenId>> load_sentences(const std::string& path, const Vocabulary& vocab) {
  std::ifstream is(path);
  if (!is) throw CorpusError("cannot open input: " + path);
  std::vector<std::vector<TokenId>> out;
  std::size_t lineno = 0;
  for (std::string line; std::getline(is, line);) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find('\t') != std::string::npos) throw CorpusError(path + ":" + std::to_string(lineno) + ": unexpected tab");
    out.push_back(encode_side(vocab, line, path + ":" + std::to_string(lineno)));
  }
  return out;
}

}  // namespace hrt
