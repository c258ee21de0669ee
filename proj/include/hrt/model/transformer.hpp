// Copyright 2026 The HRT Authors
// SPDX-License-Identifier: Apache-2.0

// Pre-norm transformer with one encoder and one decoder stack. The decoder is
// shared between the causal (Skip-AT / AT) and full (Skip-CMLM / CMLM) modes:
// the modes differ only in the self-attention mask.

#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "hrt/model/config.hpp"
#include "hrt/model/positional.hpp"
#include "hrt/numerics/attention_mask.hpp"
#include "hrt/numerics/graph.hpp"
#include "hrt/numerics/parameter.hpp"

namespace hrt {

struct LayerNormParams {
  Parameter gain;
  Parameter bias;
};

struct AttentionParams {
  Parameter wq, bq, wk, bk, wv, bv, wo, bo;
};

struct FeedForwardParams {
  Parameter w1, b1, w2, b2;
};

struct EncoderLayer {
  LayerNormParams ln_attn;
  AttentionParams self_attn;
  LayerNormParams ln_ffn;
  FeedForwardParams ffn;
};

struct DecoderLayer {
  LayerNormParams ln_self;
  AttentionParams self_attn;
  LayerNormParams ln_cross;
  AttentionParams cross_attn;
  LayerNormParams ln_ffn;
  FeedForwardParams ffn;
};

struct EncoderStack {
  std::vector<EncoderLayer> layers;
  LayerNormParams final_ln;
};

struct DecoderStack {
  std::vector<DecoderLayer> layers;
  LayerNormParams final_ln;
};

// One decoder sequence of a training batch and the source it reads.
struct DecoderInput {
  PositionedSequence sequence;
  MaskMode mode = MaskMode::causal;
  std::size_t source_index = 0;
};

struct PackedBatch {
  std::vector<std::vector<TokenId>> sources;
  std::vector<DecoderInput> decoder_inputs;

  std::size_t decoder_rows() const;
};

class Model {
 public:
  explicit Model(ModelConfig config, std::uint64_t seed = 1);

  const ModelConfig& config() const { return config_; }
  const PositionalTable& positions() const { return pe_; }

  const Parameter& source_embedding() const { return src_embed_; }
  // Decoder input embedding, tied with the output projection.
  const Parameter& target_embedding() const { return tgt_embed_; }
  const EncoderStack& encoder() const { return encoder_; }
  // Both masking modes read this one stack.
  const DecoderStack& decoder(MaskMode) const { return decoder_; }

  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;
  std::size_t parameter_count() const;

  // Checkpoint with the config in its header. load() rebuilds the model from
  // the header; load_parameters() requires an identical config.
  void save(const std::string& path) const;
  static Model load(const std::string& path);
  void load_parameters(const std::string& path);

  // Training-path forward pass. Returns (decoder_rows, vocab) logits for all
  // decoder inputs packed in order. dropout_rng may be null when dropout is 0.
  Graph::Var forward(Graph& g, const PackedBatch& batch, std::mt19937_64* dropout_rng);

 private:
  Graph::Var encode_graph(Graph& g, const PackedBatch& batch, std::vector<std::size_t>& source_offsets,
                          std::mt19937_64* rng);

  ModelConfig config_;
  PositionalTable pe_;
  Parameter src_embed_;
  Parameter tgt_embed_;
  EncoderStack encoder_;
  DecoderStack decoder_;
};

}  // namespace hrt
