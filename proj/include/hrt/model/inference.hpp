// Copyright 2026 The HRT Authors
// SPDX-License-Identifier: Apache-2.0

// Arena-backed inference path. Nothing here allocates from the heap: every
// activation buffer comes from a caller-supplied bench::Arena, and scratch
// buffers are released when each call returns.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hrt/bench/arena.hpp"
#include "hrt/model/transformer.hpp"

namespace hrt {

// Encoder output for one sentence plus each decoder layer's cross-attention
// keys and values, projected once per sentence.
struct EncoderMemory {
  std::size_t length = 0;
  std::size_t d_model = 0;
  std::span<double> states;    // length x d
  std::span<double> cross_kv;  // dec_layers x {K, V} x length x d

  const double* cross_keys(std::size_t layer) const { return cross_kv.data() + (2 * layer) * length * d_model; }
  const double* cross_values(std::size_t layer) const { return cross_kv.data() + (2 * layer + 1) * length * d_model; }
};

// Self-attention keys/values of the causal decoder for one hypothesis.
class DecoderCache {
 public:
  DecoderCache() = default;
  DecoderCache(const ModelConfig& config, const EncoderMemory& memory, std::size_t capacity, bench::Arena& arena);

  std::size_t steps() const { return steps_; }
  std::size_t capacity() const { return capacity_; }
  std::int32_t last_position() const { return last_position_; }
  const EncoderMemory* memory() const { return memory_; }

  double* keys(std::size_t layer) { return kv_.data() + (2 * layer) * capacity_ * d_; }
  double* values(std::size_t layer) { return kv_.data() + (2 * layer + 1) * capacity_ * d_; }
  const double* keys(std::size_t layer) const { return kv_.data() + (2 * layer) * capacity_ * d_; }
  const double* values(std::size_t layer) const { return kv_.data() + (2 * layer + 1) * capacity_ * d_; }

  // Takes over another cache's history; both must share config and capacity.
  void copy_from(const DecoderCache& other);
  void clear();

  // Records `count` appended steps ending at `last_position`.
  void advance(std::size_t count, std::int32_t last_position);

  static std::size_t bytes(const ModelConfig& config, std::size_t capacity);

 private:
  const EncoderMemory* memory_ = nullptr;
  std::size_t layers_ = 0;
  std::size_t d_ = 0;
  std::size_t capacity_ = 0;
  std::size_t steps_ = 0;
  std::int32_t last_position_ = -1;
  std::span<double> kv_;
};

// Encodes one source. The memory lands in `keep`; temporaries use `scratch`.
EncoderMemory encode(const Model& model, std::span<const TokenId> source, bench::Arena& keep, bench::Arena& scratch);

// Encodes a padded batch in one pass; padding keys are masked out. Returns one
// memory per source.
std::vector<EncoderMemory> encode_padded(const Model& model, std::span<const std::vector<TokenId>> sources,
                                         bench::Arena& keep, bench::Arena& scratch);

struct ParallelItem {
  std::span<const TokenId> tokens;
  std::span<const std::int32_t> positions;
  const EncoderMemory* memory = nullptr;
  std::span<const std::uint8_t> outputs{};  // nonzero rows get logits; empty: every row
};

// One decoder pass over several independent sequences. logits_out holds one
// vocab-sized row per output row, in input order. Rows without output skip
// the query side of the last layer.
void decode_parallel(const Model& model, std::span<const ParallelItem> items, MaskMode mode, bench::Arena& scratch,
                     std::span<double> logits_out);

// One causal step for a batch of hypotheses, one new token each.
// logits_out holds caches.size() x vocab values.
void decode_step(const Model& model, std::span<DecoderCache* const> caches, std::span<const TokenId> tokens,
                 std::span<const std::int32_t> positions, bench::Arena& scratch, std::span<double> logits_out);

// Appends several tokens to one cache. New positions must exceed every cached
// position and increase strictly.
void decode_incremental(const Model& model, DecoderCache& cache, const PositionedSequence& new_tokens,
                        bench::Arena& scratch, std::span<double> logits_out);

// Tensor-returning conveniences for tools and tests.
Tensor decode_parallel(const Model& model, const PositionedSequence& input, const EncoderMemory& memory, MaskMode mode,
                       bench::Arena& scratch);
Tensor decode_incremental(const Model& model, DecoderCache& cache, const PositionedSequence& new_tokens,
                          bench::Arena& scratch);

// Arena bytes consumed by each entry point above; they mirror the allocations
// exactly so that workspaces can be sized in advance. For decode_parallel,
// out_rows counts the output rows when some item carries output flags.
std::size_t encode_keep_bytes(const ModelConfig& config, std::size_t length);
std::size_t encode_scratch_bytes(const ModelConfig& config, std::size_t length);
std::size_t step_scratch_bytes(const ModelConfig& config, std::size_t batch, std::size_t max_keys);
std::size_t parallel_scratch_bytes(const ModelConfig& config, std::size_t items, std::size_t rows,
                                   std::size_t max_item_rows, std::size_t max_keys, std::size_t out_rows = 0);

}  // namespace hrt
