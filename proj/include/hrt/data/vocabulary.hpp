// Copyright 2026 The HRT Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace hrt {

using TokenId = std::int32_t;

inline constexpr TokenId kPad = 0;
inline constexpr TokenId kBos = 1;
inline constexpr TokenId kEos = 2;
inline constexpr TokenId kMask = 3;

class UnknownTokenError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Token <-> id table. Layout: [PAD]=0 [BOS]=1 [EOS]=2 [MASK]=3, then one
// [BOS_k] per supported chunk size in ascending order, then regular tokens.
class Vocabulary {
 public:
  explicit Vocabulary(std::vector<int> chunk_sizes = {2, 3, 4});

  // Regular tokens named w0 .. w{n-1}.
  static Vocabulary synthetic(std::size_t regular_tokens, std::vector<int> chunk_sizes = {2, 3, 4});

  TokenId add(const std::string& token);

  std::size_t size() const { return tokens_.size(); }
  std::size_t regular_size() const { return tokens_.size() - static_cast<std::size_t>(first_regular_); }
  TokenId first_regular() const { return first_regular_; }
  bool is_special(TokenId id) const { return id >= 0 && id < first_regular_; }
  bool is_regular(TokenId id) const { return id >= first_regular_ && static_cast<std::size_t>(id) < tokens_.size(); }

  const std::vector<int>& chunk_sizes() const { return chunk_sizes_; }
  bool supports_chunk(int k) const;
  // [BOS_k]; throws std::invalid_argument for an unsupported k.
  TokenId bos_for(int k) const;

  std::optional<TokenId> find(std::string_view token) const;
  TokenId id(std::string_view token) const;  // throws UnknownTokenError
  const std::string& token(TokenId id) const;

  // Whitespace tokenization. encode throws UnknownTokenError on unseen tokens.
  std::vector<TokenId> encode(std::string_view text) const;
  std::string decode(std::span<const TokenId> ids) const;

  // Sidecar format: one token per line in id order.
  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.tokens_ == b.tokens_ && a.chunk_sizes_ == b.chunk_sizes_;
  }

 private:
  std::vector<int> chunk_sizes_;
  TokenId first_regular_ = 0;
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

std::string bos_token_name(int k);

}  // namespace hrt
