// Copyright 2026 The HRT Authors
// SPDX-License-Identifier: Apache-2.0

#include "hrt/model/inference.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <string>

#include "hrt/numerics/eigen_view.hpp"
#include "hrt/numerics/ops.hpp"

namespace hrt {
namespace {

using bench::Arena;
using bench::ArenaScope;

// Rows [row_begin, row_begin + rows) of a decoder or encoder pass that attend
// to each other (or to a cache).
struct Group {
  std::size_t row_begin = 0;
  std::size_t rows = 0;
  MaskMode mode = MaskMode::full;
  std::size_t key_valid = 0;  // parallel groups: keys [0, key_valid) of the group
  DecoderCache* cache = nullptr;
  const EncoderMemory* memory = nullptr;
};

void layer_norm_rows(const double* x, const LayerNormParams& ln, double* out, std::size_t rows, std::size_t d) {
  const double* g = ln.gain.value.raw();
  const double* b = ln.bias.value.raw();
  double mean = 0.0, rstd = 0.0;
  for (std::size_t r = 0; r < rows; ++r) kernels::layer_norm_row(x + r * d, g, b, out + r * d, d, &mean, &rstd);
}

// out = x W + b, or out += x W + b when accumulate is set.
void linear_rows(const double* x, std::size_t rows, std::size_t in, const Parameter& w, const Parameter& b, double* out,
                 bool accumulate = false) {
  const std::size_t n = w.value.dim(1);
  auto X = ev::view(x, rows, in);
  auto W = ev::view(w.value.raw(), in, n);
  auto O = ev::view(out, rows, n);
  if (accumulate) {
    O.noalias() += X * W;
  } else {
    O.noalias() = X * W;
  }
  O.rowwise() += ev::row(b.value.raw(), n);
}

// Multi-head attention of r query rows over n key rows (all stride d). Query i
// sees keys [0, min(causal_base + i + 1, key_valid)) in causal mode and
// [0, key_valid) in full mode.
void attend_block(const double* q, const double* k, const double* v, double* out, std::size_t r, std::size_t n,
                  std::size_t d, std::size_t heads, MaskMode mode, std::size_t causal_base, std::size_t key_valid,
                  double* scores) {
  const std::size_t dh = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  for (std::size_t h = 0; h < heads; ++h) {
    const std::size_t off = h * dh;
    auto S = ev::view(scores, r, n);
    S.noalias() = ev::view(q + off, r, dh, d) * ev::view(k + off, n, dh, d).transpose();
    for (std::size_t i = 0; i < r; ++i) {
      std::size_t lim = key_valid;
      if (mode == MaskMode::causal) lim = std::min(causal_base + i + 1, key_valid);
      if (lim == 0) throw std::domain_error("attention row with no visible key");
      double* row = scores + i * n;
      for (std::size_t j = 0; j < lim; ++j) row[j] *= scale;
      kernels::softmax_row(row, lim);
      std::fill(row + lim, row + n, 0.0);
    }
    ev::view(out + off, r, dh, d).noalias() = S * ev::view(v + off, n, dh, d);
  }
}

void check_tokens(const ModelConfig& config, std::span<const TokenId> ids) {
  for (TokenId t : ids) {
    if (t < 0 || static_cast<std::size_t>(t) >= config.vocab_size) {
      throw std::out_of_range("token id " + std::to_string(t) + " outside the vocabulary");
    }
  }
}

void embed_rows(const Model& model, const Parameter& table, std::span<const TokenId> ids,
                std::span<const std::int32_t> positions, double* x) {
  const std::size_t d = model.config().d_model;
  const double scale = std::sqrt(static_cast<double>(d));
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const double* e = table.value.raw() + static_cast<std::size_t>(ids[i]) * d;
    const auto pe = model.positions().row(positions[i]);
    double* row = x + i * d;
    for (std::size_t c = 0; c < d; ++c) row[c] = e[c] * scale + pe[c];
  }
}

std::size_t doubles(std::size_t n) { return Arena::footprint(n * sizeof(double)); }

// Shared decoder pass. Fills logits for every row, or only for the sorted
// rows in `select` when it is non-empty (parallel groups only).
void run_decoder(const Model& model, std::span<const TokenId> ids, std::span<const std::int32_t> positions,
                 std::span<Group> groups, Arena& scratch, double* logits, std::span<const std::size_t> select = {}) {
  const ModelConfig& cfg = model.config();
  const std::size_t d = cfg.d_model;
  std::size_t rows = ids.size();
  check_tokens(cfg, ids);
  std::size_t max_group = 0, max_keys = 0;
  for (const Group& g : groups) {
    max_group = std::max(max_group, g.rows);
    const std::size_t self_keys = g.cache ? g.cache->steps() + g.rows : g.rows;
    max_keys = std::max({max_keys, self_keys, g.memory->length});
  }
  ArenaScope scope(scratch);
  double* x = scratch.alloc<double>(rows * d).data();
  double* h = scratch.alloc<double>(rows * d).data();
  double* q = scratch.alloc<double>(rows * d).data();
  double* k = scratch.alloc<double>(rows * d).data();
  double* v = scratch.alloc<double>(rows * d).data();
  double* a = scratch.alloc<double>(rows * d).data();
  double* f = scratch.alloc<double>(rows * cfg.d_ff).data();
  double* scores = scratch.alloc<double>(max_group * max_keys).data();

  const Parameter& table = model.target_embedding();
  embed_rows(model, table, ids, positions, x);
  const DecoderStack& dec = model.decoder(MaskMode::causal);
  bool compact = false;
  for (std::size_t l = 0; l < dec.layers.size(); ++l) {
    const DecoderLayer& layer = dec.layers[l];
    const AttentionParams& sa = layer.self_attn;
    layer_norm_rows(x, layer.ln_self, h, rows, d);
    linear_rows(h, rows, d, sa.wk, sa.bk, k);
    linear_rows(h, rows, d, sa.wv, sa.bv, v);
    if (!select.empty() && l + 1 == dec.layers.size()) {
      // Keys and values need every row; the rest of the layer only the output rows.
      const std::size_t n = select.size();
      for (std::size_t j = 0; j < n; ++j) std::memcpy(a + j * d, h + select[j] * d, d * sizeof(double));
      linear_rows(a, n, d, sa.wq, sa.bq, q);
      std::size_t j = 0;
      for (Group& g : groups) {
        const std::size_t off = g.row_begin * d, first = j;
        while (j < n && select[j] < g.row_begin + g.rows) ++j;
        if (g.mode == MaskMode::full) {
          if (j > first) {
            attend_block(q + first * d, k + off, v + off, a + first * d, j - first, g.rows, d, cfg.n_heads,
                         MaskMode::full, 0, g.key_valid, scores);
          }
        } else {
          for (std::size_t i = first; i < j; ++i) {
            attend_block(q + i * d, k + off, v + off, a + i * d, 1, g.rows, d, cfg.n_heads, MaskMode::causal,
                         select[i] - g.row_begin, g.key_valid, scores);
          }
        }
        g.row_begin = first;
        g.rows = j - first;
      }
      for (std::size_t i = 0; i < n; ++i) std::memmove(x + i * d, x + select[i] * d, d * sizeof(double));
      rows = n;
      compact = true;
    } else {
      linear_rows(h, rows, d, sa.wq, sa.bq, q);
      for (Group& g : groups) {
        const std::size_t off = g.row_begin * d;
        if (g.cache) {
          DecoderCache& c = *g.cache;
          const std::size_t base = c.steps();
          std::memcpy(c.keys(l) + base * d, k + off, g.rows * d * sizeof(double));
          std::memcpy(c.values(l) + base * d, v + off, g.rows * d * sizeof(double));
          attend_block(q + off, c.keys(l), c.values(l), a + off, g.rows, base + g.rows, d, cfg.n_heads,
                       MaskMode::causal, base, base + g.rows, scores);
        } else {
          attend_block(q + off, k + off, v + off, a + off, g.rows, g.rows, d, cfg.n_heads, g.mode, 0, g.key_valid,
                       scores);
        }
      }
    }
    linear_rows(a, rows, d, sa.wo, sa.bo, x, true);

    const AttentionParams& ca = layer.cross_attn;
    layer_norm_rows(x, layer.ln_cross, h, rows, d);
    linear_rows(h, rows, d, ca.wq, ca.bq, q);
    for (const Group& g : groups) {
      if (g.rows == 0) continue;
      const std::size_t off = g.row_begin * d;
      const EncoderMemory& m = *g.memory;
      attend_block(q + off, m.cross_keys(l), m.cross_values(l), a + off, g.rows, m.length, d, cfg.n_heads,
                   MaskMode::full, 0, m.length, scores);
    }
    linear_rows(a, rows, d, ca.wo, ca.bo, x, true);

    layer_norm_rows(x, layer.ln_ffn, h, rows, d);
    linear_rows(h, rows, d, layer.ffn.w1, layer.ffn.b1, f);
    ev::view(f, rows, cfg.d_ff) = ev::view(f, rows, cfg.d_ff).cwiseMax(0.0);
    linear_rows(f, rows, cfg.d_ff, layer.ffn.w2, layer.ffn.b2, x, true);
  }
  layer_norm_rows(x, dec.final_ln, h, rows, d);
  ev::view(logits, rows, cfg.vocab_size).noalias() =
      ev::view(h, rows, d) * ev::view(table.value.raw(), cfg.vocab_size, d).transpose();
  if (compact) return;
  for (Group& g : groups) {
    if (g.cache) g.cache->advance(g.rows, positions[g.row_begin + g.rows - 1]);
  }
}

// Encoder over packed rows; group g covers rows [g.row_begin, +g.rows) with
// keys [0, g.key_valid). Final states land in `out`.
void run_encoder(const Model& model, std::span<const TokenId> ids, std::span<const std::int32_t> positions,
                 std::span<const Group> groups, Arena& scratch, double* out) {
  const ModelConfig& cfg = model.config();
  const std::size_t d = cfg.d_model, rows = ids.size();
  check_tokens(cfg, ids);
  std::size_t max_group = 0;
  for (const Group& g : groups) max_group = std::max(max_group, g.rows);
  ArenaScope scope(scratch);
  double* x = scratch.alloc<double>(rows * d).data();
  double* h = scratch.alloc<double>(rows * d).data();
  double* q = scratch.alloc<double>(rows * d).data();
  double* k = scratch.alloc<double>(rows * d).data();
  double* v = scratch.alloc<double>(rows * d).data();
  double* a = scratch.alloc<double>(rows * d).data();
  double* f = scratch.alloc<double>(rows * cfg.d_ff).data();
  double* scores = scratch.alloc<double>(max_group * max_group).data();

  embed_rows(model, model.source_embedding(), ids, positions, x);
  const EncoderStack& enc = model.encoder();
  for (const EncoderLayer& layer : enc.layers) {
    const AttentionParams& sa = layer.self_attn;
    layer_norm_rows(x, layer.ln_attn, h, rows, d);
    linear_rows(h, rows, d, sa.wq, sa.bq, q);
    linear_rows(h, rows, d, sa.wk, sa.bk, k);
    linear_rows(h, rows, d, sa.wv, sa.bv, v);
    for (const Group& g : groups) {
      const std::size_t off = g.row_begin * d;
      attend_block(q + off, k + off, v + off, a + off, g.rows, g.rows, d, cfg.n_heads, MaskMode::full, 0, g.key_valid,
                   scores);
    }
    linear_rows(a, rows, d, sa.wo, sa.bo, x, true);
    layer_norm_rows(x, layer.ln_ffn, h, rows, d);
    linear_rows(h, rows, d, layer.ffn.w1, layer.ffn.b1, f);
    ev::view(f, rows, cfg.d_ff) = ev::view(f, rows, cfg.d_ff).cwiseMax(0.0);
    linear_rows(f, rows, cfg.d_ff, layer.ffn.w2, layer.ffn.b2, x, true);
  }
  layer_norm_rows(x, enc.final_ln, out, rows, d);
}

EncoderMemory make_memory(const Model& model, const double* states, std::size_t length, Arena& keep) {
  const ModelConfig& cfg = model.config();
  const std::size_t d = cfg.d_model;
  EncoderMemory m;
  m.length = length;
  m.d_model = d;
  m.states = keep.alloc<double>(length * d);
  m.cross_kv = keep.alloc<double>(cfg.dec_layers * 2 * length * d);
  std::memcpy(m.states.data(), states, length * d * sizeof(double));
  const DecoderStack& dec = model.decoder(MaskMode::causal);
  for (std::size_t l = 0; l < dec.layers.size(); ++l) {
    const AttentionParams& ca = dec.layers[l].cross_attn;
    linear_rows(states, length, d, ca.wk, ca.bk, const_cast<double*>(m.cross_keys(l)));
    linear_rows(states, length, d, ca.wv, ca.bv, const_cast<double*>(m.cross_values(l)));
  }
  return m;
}

void check_source(const ModelConfig& cfg, std::size_t n) {
  if (n == 0) throw std::invalid_argument("empty source sentence");
  if (n > cfg.max_len) throw std::invalid_argument("source longer than max_len");
}

}  // namespace

DecoderCache::DecoderCache(const ModelConfig& config, const EncoderMemory& memory, std::size_t capacity, Arena& arena)
    : memory_(&memory),
      layers_(config.dec_layers),
      d_(config.d_model),
      capacity_(capacity),
      kv_(arena.alloc<double>(config.dec_layers * 2 * capacity * config.d_model)) {}

std::size_t DecoderCache::bytes(const ModelConfig& config, std::size_t capacity) {
  return doubles(config.dec_layers * 2 * capacity * config.d_model);
}

void DecoderCache::copy_from(const DecoderCache& other) {
  if (&other == this) return;
  if (other.layers_ != layers_ || other.d_ != d_ || other.capacity_ != capacity_) {
    throw std::invalid_argument("decoder caches differ in shape");
  }
  for (std::size_t l = 0; l < layers_; ++l) {
    std::memcpy(keys(l), other.keys(l), other.steps_ * d_ * sizeof(double));
    std::memcpy(values(l), other.values(l), other.steps_ * d_ * sizeof(double));
  }
  memory_ = other.memory_;
  steps_ = other.steps_;
  last_position_ = other.last_position_;
}

void DecoderCache::clear() {
  steps_ = 0;
  last_position_ = -1;
}

void DecoderCache::advance(std::size_t count, std::int32_t last_position) {
  steps_ += count;
  last_position_ = last_position;
}

EncoderMemory encode(const Model& model, std::span<const TokenId> source, Arena& keep, Arena& scratch) {
  const ModelConfig& cfg = model.config();
  check_source(cfg, source.size());
  const std::size_t n = source.size();
  ArenaScope scope(scratch);
  auto pos = scratch.alloc<std::int32_t>(n);
  for (std::size_t i = 0; i < n; ++i) pos[i] = static_cast<std::int32_t>(i);
  double* states = scratch.alloc<double>(n * cfg.d_model).data();
  const Group g{0, n, MaskMode::full, n, nullptr, nullptr};
  run_encoder(model, source, pos, std::span<const Group>(&g, 1), scratch, states);
  return make_memory(model, states, n, keep);
}

std::vector<EncoderMemory> encode_padded(const Model& model, std::span<const std::vector<TokenId>> sources,
                                         Arena& keep, Arena& scratch) {
  const ModelConfig& cfg = model.config();
  std::size_t width = 0;
  for (const auto& s : sources) {
    check_source(cfg, s.size());
    width = std::max(width, s.size());
  }
  const std::size_t rows = width * sources.size();
  ArenaScope scope(scratch);
  auto ids = scratch.alloc<TokenId>(rows);
  auto pos = scratch.alloc<std::int32_t>(rows);
  auto groups = scratch.alloc<Group>(sources.size());
  for (std::size_t b = 0; b < sources.size(); ++b) {
    for (std::size_t i = 0; i < width; ++i) {
      ids[b * width + i] = i < sources[b].size() ? sources[b][i] : kPad;
      pos[b * width + i] = static_cast<std::int32_t>(i);
    }
    groups[b] = Group{b * width, width, MaskMode::full, sources[b].size(), nullptr, nullptr};
  }
  double* states = scratch.alloc<double>(rows * cfg.d_model).data();
  run_encoder(model, ids, pos, groups, scratch, states);
  std::vector<EncoderMemory> out;
  out.reserve(sources.size());
  for (std::size_t b = 0; b < sources.size(); ++b) {
    out.push_back(make_memory(model, states + b * width * cfg.d_model, sources[b].size(), keep));
  }
  return out;
}

void decode_parallel(const Model& model, std::span<const ParallelItem> items, MaskMode mode, Arena& scratch,
                     std::span<double> logits_out) {
  std::size_t rows = 0, out_rows = 0;
  bool subset = false;
  for (const auto& it : items) {
    if (it.tokens.size() != it.positions.size()) throw std::invalid_argument("tokens and positions differ in length");
    if (it.tokens.empty()) throw std::invalid_argument("empty decoder input");
    if (!it.memory) throw std::invalid_argument("decoder input without encoder memory");
    for (std::size_t i = 1; i < it.positions.size(); ++i) {
      if (it.positions[i] <= it.positions[i - 1]) throw std::invalid_argument("positions must be strictly increasing");
    }
    rows += it.tokens.size();
    if (it.outputs.empty()) {
      out_rows += it.tokens.size();
    } else {
      if (it.outputs.size() != it.tokens.size()) throw std::invalid_argument("output flags and tokens differ in length");
      subset = true;
      for (std::uint8_t o : it.outputs) out_rows += o != 0;
    }
  }
  if (logits_out.size() != out_rows * model.config().vocab_size) {
    throw std::invalid_argument("logits buffer size mismatch");
  }
  ArenaScope scope(scratch);
  auto ids = scratch.alloc<TokenId>(rows);
  auto pos = scratch.alloc<std::int32_t>(rows);
  auto groups = scratch.alloc<Group>(items.size());
  std::span<std::size_t> select;
  if (subset) select = scratch.alloc<std::size_t>(out_rows);
  std::size_t r = 0, s = 0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& it = items[i];
    groups[i] = Group{r, it.tokens.size(), mode, it.tokens.size(), nullptr, it.memory};
    std::copy(it.tokens.begin(), it.tokens.end(), ids.begin() + static_cast<std::ptrdiff_t>(r));
    std::copy(it.positions.begin(), it.positions.end(), pos.begin() + static_cast<std::ptrdiff_t>(r));
    if (subset) {
      for (std::size_t j = 0; j < it.tokens.size(); ++j) {
        if (it.outputs.empty() || it.outputs[j]) select[s++] = r + j;
      }
    }
    r += it.tokens.size();
  }
  if (subset && out_rows == 0) return;
  run_decoder(model, ids, pos, groups, scratch, logits_out.data(), select);
}

void decode_step(const Model& model, std::span<DecoderCache* const> caches, std::span<const TokenId> tokens,
                 std::span<const std::int32_t> positions, Arena& scratch, std::span<double> logits_out) {
  const std::size_t b = caches.size();
  if (tokens.size() != b || positions.size() != b) throw std::invalid_argument("one token per cache expected");
  if (logits_out.size() != b * model.config().vocab_size) throw std::invalid_argument("logits buffer size mismatch");
  for (std::size_t i = 0; i < b; ++i) {
    const DecoderCache& c = *caches[i];
    if (c.steps() + 1 > c.capacity()) throw std::length_error("decoder cache is full");
    if (positions[i] <= c.last_position()) throw std::invalid_argument("positions must be strictly increasing");
  }
  ArenaScope scope(scratch);
  auto groups = scratch.alloc<Group>(b);
  for (std::size_t i = 0; i < b; ++i) groups[i] = Group{i, 1, MaskMode::causal, 0, caches[i], caches[i]->memory()};
  run_decoder(model, tokens, positions, groups, scratch, logits_out.data());
}

void decode_incremental(const Model& model, DecoderCache& cache, const PositionedSequence& new_tokens, Arena& scratch,
                        std::span<double> logits_out) {
  new_tokens.validate();
  const std::size_t n = new_tokens.size();
  if (n == 0) throw std::invalid_argument("empty decoder input");
  if (cache.steps() + n > cache.capacity()) throw std::length_error("decoder cache is full");
  if (new_tokens.positions.front() <= cache.last_position()) {
    throw std::invalid_argument("positions must be strictly increasing");
  }
  if (logits_out.size() != n * model.config().vocab_size) throw std::invalid_argument("logits buffer size mismatch");
  Group g{0, n, MaskMode::causal, 0, &cache, cache.memory()};
  run_decoder(model, new_tokens.tokens, new_tokens.positions, std::span<Group>(&g, 1), scratch, logits_out.data());
}

Tensor decode_parallel(const Model& model, const PositionedSequence& input, const EncoderMemory& memory, MaskMode mode,
                       Arena& scratch) {
  Tensor out({input.size(), model.config().vocab_size});
  const ParallelItem item{input.tokens, input.positions, &memory};
  decode_parallel(model, std::span<const ParallelItem>(&item, 1), mode, scratch, out.data());
  return out;
}

Tensor decode_incremental(const Model& model, DecoderCache& cache, const PositionedSequence& new_tokens,
                          Arena& scratch) {
  Tensor out({new_tokens.size(), model.config().vocab_size});
  decode_incremental(model, cache, new_tokens, scratch, out.data());
  return out;
}

std::size_t encode_keep_bytes(const ModelConfig& config, std::size_t length) {
  return doubles(length * config.d_model) + doubles(config.dec_layers * 2 * length * config.d_model);
}

namespace {

// run_encoder / run_decoder buffers for `rows` rows.
std::size_t layer_bytes(const ModelConfig& config, std::size_t rows, std::size_t score_cells) {
  return 6 * doubles(rows * config.d_model) + doubles(rows * config.d_ff) + doubles(score_cells);
}

}  // namespace

std::size_t encode_scratch_bytes(const ModelConfig& config, std::size_t length) {
  return Arena::footprint(length * sizeof(std::int32_t)) + doubles(length * config.d_model) +
         layer_bytes(config, length, length * length);
}

std::size_t step_scratch_bytes(const ModelConfig& config, std::size_t batch, std::size_t max_keys) {
  return Arena::footprint(batch * sizeof(Group)) + layer_bytes(config, batch, max_keys);
}

std::size_t parallel_scratch_bytes(const ModelConfig& config, std::size_t items, std::size_t rows,
                                   std::size_t max_item_rows, std::size_t max_keys, std::size_t out_rows) {
  return Arena::footprint(rows * sizeof(TokenId)) + Arena::footprint(rows * sizeof(std::int32_t)) +
         Arena::footprint(items * sizeof(Group)) + Arena::footprint(out_rows * sizeof(std::size_t)) +
         layer_bytes(config, rows, max_item_rows * max_keys);
}

}  // namespace hrt
