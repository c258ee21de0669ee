// Copyright 2026 The HRT Authors
// SPDX-License-Identifier: Apache-2.0

#include "hrt/data/vocabulary.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace hrt {

std::string bos_token_name(int k) { return "[BOS_" + std::to_string(k) + "]"; }

Vocabulary::Vocabulary(std::vector<int> chunk_sizes) : chunk_sizes_(std::move(chunk_sizes)) {
  std::sort(chunk_sizes_.begin(), chunk_sizes_.end());
  if (std::adjacent_find(chunk_sizes_.begin(), chunk_sizes_.end()) != chunk_sizes_.end()) {
    throw std::invalid_argument("duplicate chunk size");
  }
  for (int k : chunk_sizes_) {
    if (k < 2) throw std::invalid_argument("chunk sizes must be >= 2");
  }
  for (const char* s : {"[PAD]", "[BOS]", "[EOS]", "[MASK]"}) add(s);
  for (int k : chunk_sizes_) add(bos_token_name(k));
  first_regular_ = static_cast<TokenId>(tokens_.size());
}

Vocabulary Vocabulary::synthetic(std::size_t regular_tokens, std::vector<int> chunk_sizes) {
  Vocabulary v(std::move(chunk_sizes));
  for (std::size_t i = 0; i < regular_tokens; ++i) v.add("w" + std::to_string(i));
  return v;
}

TokenId Vocabulary::add(const std::string& token) {
  if (token.empty() || token.find_first_of(" \t\r\n") != std::string::npos) {
    throw std::invalid_argument("vocabulary tokens must be non-empty and contain no whitespace");
  }
  if (auto it = index_.find(token); it != index_.end()) return it->second;
  const auto id = static_cast<TokenId>(tokens_.size());
  tokens_.push_back(token);
  index_.emplace(token, id);
  return id;
}

bool Vocabulary::supports_chunk(int k) const {
  return std::find(chunk_sizes_.begin(), chunk_sizes_.end(), k) != chunk_sizes_.end();
}

TokenId Vocabulary::bos_for(int k) const {
  auto it = std::find(chunk_sizes_.begin(), chunk_sizes_.end(), k);
  if (it == chunk_sizes_.end()) throw std::invalid_argument("unsupported chunk size k=" + std::to_string(k));
  return static_cast<TokenId>(4 + (it - chunk_sizes_.begin()));
}

std::optional<TokenId> Vocabulary::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

TokenId Vocabulary::id(std::string_view token) const {
  if (auto id = find(token)) return *id;
  throw UnknownTokenError("unknown token '" + std::string(token) + "'");
}

const std::string& Vocabulary::token(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) throw std::out_of_range("token id out of range");
  return tokens_[static_cast<std::size_t>(id)];
}

std::vector<TokenId> Vocabulary::encode(std::string_view text) const {
  std::vector<TokenId> out;
  std::istringstream is{std::string(text)};
  std::string tok;
  while (is >> tok) out.push_back(id(tok));
  return out;
}

std::string Vocabulary::decode(std::span<const TokenId> ids) const {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ' ';
    out += token(ids[i]);
  }
  return out;
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write vocabulary: " + path);
  for (const auto& t : tokens_) os << t << '\n';
  if (!os) throw std::runtime_error("write failed: " + path);
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open vocabulary: " + path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(is, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    lines.push_back(line);
  }
  const char* fixed[] = {"[PAD]", "[BOS]", "[EOS]", "[MASK]"};
  if (lines.size() < 4 || !std::equal(std::begin(fixed), std::end(fixed), lines.begin())) {
    throw std::runtime_error("vocabulary " + path + " does not start with [PAD] [BOS] [EOS] [MASK]");
  }
  std::vector<int> ks;
  std::size_t i = 4;
  for (; i < lines.size() && lines[i].rfind("[BOS_", 0) == 0; ++i) {
    ks.push_back(std::stoi(lines[i].substr(5, lines[i].size() - 6)));
  }
  Vocabulary v(ks);
  for (std::size_t j = 4; j < i; ++j) {
    if (v.token(static_cast<TokenId>(j)) != lines[j]) throw std::runtime_error("chunk-size tokens out of order in " + path);
  }
  for (; i < lines.size(); ++i) {
    if (v.find(lines[i])) throw std::runtime_error("duplicate token '" + lines[i] + "' in " + path);
    v.add(lines[i]);
  }
  return v;
}

}  // namespace hrt
