// Copyright 2026 The HRT Authors
// SPDX-License-Identifier: Apache-2.0

#include "hrt/model/config.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "hrt/data/config_file.hpp"

namespace hrt {

void ModelConfig::validate() const {
  if (d_model == 0 || n_heads == 0 || d_model % n_heads != 0) {
    throw std::invalid_argument("d_model must be a positive multiple of n_heads");
  }
  if (d_ff == 0) throw std::invalid_argument("d_ff must be positive");
  if (enc_layers == 0) throw std::invalid_argument("enc_layers must be >= 1");
  if (dec_layers == 0) throw std::invalid_argument("dec_layers must be >= 1");
  if (max_len == 0) throw std::invalid_argument("max_len must be >= 1");
  if (chunk_sizes.empty()) throw std::invalid_argument("at least one chunk size is required");
  for (int k : chunk_sizes) {
    if (k < 2) throw std::invalid_argument("chunk sizes must be >= 2");
  }
  if (vocab_size < 4 + chunk_sizes.size() + 1) throw std::invalid_argument("vocab_size too small for the reserved ids");
  if (dropout < 0.0 || dropout >= 1.0) throw std::invalid_argument("dropout must lie in [0, 1)");
}

int ModelConfig::max_chunk() const {
  return chunk_sizes.empty() ? 1 : *std::max_element(chunk_sizes.begin(), chunk_sizes.end());
}

std::string ModelConfig::serialize() const {
  std::ostringstream os;
  os << "d_model=" << d_model << "\n"
     << "d_ff=" << d_ff << "\n"
     << "n_heads=" << n_heads << "\n"
     << "enc_layers=" << enc_layers << "\n"
     << "dec_layers=" << dec_layers << "\n"
     << "vocab_size=" << vocab_size << "\n"
     << "max_len=" << max_len << "\n"
     << "chunk_sizes=";
  for (std::size_t i = 0; i < chunk_sizes.size(); ++i) os << (i ? "," : "") << chunk_sizes[i];
  os.precision(17);
  os << "\n"
     << "dropout=" << dropout << "\n";
  return os.str();
}

ModelConfig ModelConfig::parse(const std::string& text) { return from(KeyValueConfig::parse(text)); }

ModelConfig ModelConfig::from(const KeyValueConfig& kv) { return from(kv, ModelConfig{}); }

ModelConfig ModelConfig::from(const KeyValueConfig& kv, ModelConfig c) {
  c.d_model = static_cast<std::size_t>(kv.get_int("d_model", static_cast<long long>(c.d_model)));
  c.d_ff = static_cast<std::size_t>(kv.get_int("d_ff", static_cast<long long>(c.d_ff)));
  c.n_heads = static_cast<std::size_t>(kv.get_int("n_heads", static_cast<long long>(c.n_heads)));
  c.enc_layers = static_cast<std::size_t>(kv.get_int("enc_layers", static_cast<long long>(c.enc_layers)));
  c.dec_layers = static_cast<std::size_t>(kv.get_int("dec_layers", static_cast<long long>(c.dec_layers)));
  c.vocab_size = static_cast<std::size_t>(kv.get_int("vocab_size", static_cast<long long>(c.vocab_size)));
  c.max_len = static_cast<std::size_t>(kv.get_int("max_len", static_cast<long long>(c.max_len)));
  c.dropout = kv.get_double("dropout", c.dropout);
  if (auto ks = kv.get("chunk_sizes")) {
    c.chunk_sizes.clear();
    std::istringstream is(*ks);
    for (std::string item; std::getline(is, item, ',');) c.chunk_sizes.push_back(std::stoi(item));
  }
  c.validate();
  return c;
}

}  // namespace hrt
