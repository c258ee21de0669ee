// Copyright 2026 The HRT Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <limits>
#include <vector>

namespace hrt {

enum class MaskMode { causal, full };

const char* to_string(MaskMode mode);

// Realized (query_len x key_len) allow-matrix. Keys at index >= key_valid are
// padding and never allowed.
class AttentionMask {
 public:
  static constexpr std::size_t all_keys = std::numeric_limits<std::size_t>::max();

  // Entry (i, j) allowed iff j <= i + query_offset. query_offset is the number
  // of keys that precede the first query (cached steps in incremental decoding).
  static AttentionMask causal(std::size_t query_len, std::size_t key_len, std::size_t query_offset = 0,
                              std::size_t key_valid = all_keys);
  static AttentionMask full(std::size_t query_len, std::size_t key_len, std::size_t key_valid = all_keys);

  MaskMode mode() const { return mode_; }
  std::size_t query_len() const { return query_len_; }
  std::size_t key_len() const { return key_len_; }
  bool allowed(std::size_t i, std::size_t j) const { return allowed_[i * key_len_ + j] != 0; }
  void exclude(std::size_t i, std::size_t j) { allowed_[i * key_len_ + j] = 0; }
  bool row_empty(std::size_t i) const;

 private:
  AttentionMask(MaskMode mode, std::size_t query_len, std::size_t key_len);

  MaskMode mode_;
  std::size_t query_len_;
  std::size_t key_len_;
  std::vector<unsigned char> allowed_;
};

}  // namespace hrt
