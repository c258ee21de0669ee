// Copyright 2026 The HRT Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "hrt/data/config_file.hpp"

namespace hrt {

struct ModelConfig {
  std::size_t d_model = 64;
  std::size_t d_ff = 256;
  std::size_t n_heads = 4;
  std::size_t enc_layers = 4;
  std::size_t dec_layers = 1;
  std::size_t vocab_size = 71;
  std::size_t max_len = 200;  // L
  std::vector<int> chunk_sizes = {2, 3, 4};
  double dropout = 0.0;

  // Throws std::invalid_argument on an inconsistent configuration.
  void validate() const;

  int max_chunk() const;
  // Positions in [0, position_limit()) are valid. A grid-placed [EOS] for a
  // length-L target sits at k * ceil((L + 1) / k) <= L + k.
  std::size_t position_limit() const { return max_len + static_cast<std::size_t>(max_chunk()) + 1; }
  std::size_t head_dim() const { return d_model / n_heads; }

  // key=value text stored in checkpoint headers.
  std::string serialize() const;
  static ModelConfig parse(const std::string& text);
  // Overrides the fields of `base` named in kv, then validates.
  static ModelConfig from(const KeyValueConfig& kv, ModelConfig base);
  static ModelConfig from(const KeyValueConfig& kv);

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

}  // namespace hrt
