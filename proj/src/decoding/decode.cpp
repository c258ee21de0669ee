// Copyright 2026 The HRT Authors
// SPDX-License-Identifier: Apache-2.0

#include "hrt/decoding/decode.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <new>
#include <stdexcept>
#include <string>

#include "hrt/numerics/ops.hpp"

namespace hrt {
namespace {

using bench::Arena;
using bench::ArenaScope;
using bench::Phase;

std::size_t fp(std::size_t bytes) { return Arena::footprint(bytes); }

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

TokenId first_regular(const ModelConfig& config) { return static_cast<TokenId>(4 + config.chunk_sizes.size()); }

TokenId bos_for(const ModelConfig& config, int k) {
  for (std::size_t i = 0; i < config.chunk_sizes.size(); ++i) {
    if (config.chunk_sizes[i] == k) return static_cast<TokenId>(4 + i);
  }
  throw std::invalid_argument("chunk size " + std::to_string(k) + " is not supported by the model");
}

std::size_t resolve_len(const ModelConfig& config, std::size_t max_len) {
  if (max_len == 0) return config.max_len;
  if (max_len > config.max_len) {
    throw std::invalid_argument("max_len " + std::to_string(max_len) + " exceeds the model limit " +
                                std::to_string(config.max_len));
  }
  return max_len;
}

// Sentence-arena and phase-arena bytes of one beam search (mirrors run_beam).
std::size_t beam_keep_bytes(std::size_t b, std::size_t steps) {
  return fp(b * sizeof(HypothesisView)) + fp(b * steps * sizeof(TokenId)) + fp(b * steps * sizeof(double));
}

std::size_t beam_phase_bytes(const ModelConfig& config, std::size_t b, std::size_t steps, std::size_t max_src) {
  std::size_t n = fp(2 * b * sizeof(DecoderCache)) + 2 * b * DecoderCache::bytes(config, steps);
  n += fp(2 * b * steps * sizeof(TokenId)) + fp(2 * b * steps * sizeof(double)) + fp(2 * b * sizeof(double)) +
       fp(2 * b * sizeof(DecoderCache*));
  // One step: inputs, logits, candidates, cache bookkeeping, then the decoder.
  std::size_t step = fp(b * sizeof(TokenId)) + fp(b * sizeof(std::int32_t)) +
                     fp(b * config.vocab_size * sizeof(double)) + fp(2 * b * sizeof(double)) +
                     fp(2 * b * sizeof(std::size_t)) + fp(2 * b * sizeof(TokenId)) + fp(b * sizeof(std::uint8_t)) +
                     fp(2 * b * sizeof(std::uint8_t)) + fp(b * sizeof(std::size_t));
  step += step_scratch_bytes(config, b, std::max(steps, max_src));
  return n + step;
}

// item_rows = k * steps; every k-th row is an anchor and needs no logits.
std::size_t fill_phase_bytes(const ModelConfig& config, std::size_t c, std::size_t k, std::size_t item_rows,
                             std::size_t max_src) {
  const std::size_t rows = c * item_rows, masked = rows - rows / k;
  std::size_t n = fp(c * sizeof(ParallelItem)) + fp(rows * sizeof(TokenId)) + fp(rows * sizeof(std::int32_t)) +
                  fp(rows * sizeof(std::uint8_t)) + fp(masked * config.vocab_size * sizeof(double)) +
                  fp(rows * sizeof(TokenId));
  n += parallel_scratch_bytes(config, c, rows, item_rows, std::max(item_rows, max_src), masked);
  return n;
}

struct BeamRun {
  std::span<HypothesisView> finished;
  std::size_t steps = 0;
  bool forced = false;
};

// Candidate list kept sorted by score, best first; ties keep insertion order,
// which visits hypotheses in rank order and tokens by ascending id.
struct Candidates {
  double* score;
  std::size_t* hyp;
  TokenId* token;
  std::size_t size = 0;
  std::size_t cap = 0;

  void offer(double s, std::size_t h, TokenId t) {
    if (size == cap && !(s > score[size - 1])) return;
    std::size_t i = size < cap ? size++ : size - 1;
    while (i > 0 && s > score[i - 1]) {
      score[i] = score[i - 1];
      hyp[i] = hyp[i - 1];
      token[i] = token[i - 1];
      --i;
    }
    score[i] = s;
    hyp[i] = h;
    token[i] = t;
  }
};

void log_softmax_rows(double* logits, std::size_t rows, std::size_t v) {
  for (std::size_t r = 0; r < rows; ++r) {
    double* row = logits + r * v;
    const double lse = kernels::log_sum_exp(row, v);
    for (std::size_t j = 0; j < v; ++j) row[j] -= lse;
  }
}

// Beam search over tokens at positions 0, stride, 2*stride, ... starting from
// `bos`. The last allowed step may only emit [EOS].
BeamRun run_beam(const Model& model, const EncoderMemory& memory, TokenId bos, std::int32_t stride, std::size_t b,
                 std::size_t max_steps, Arena& keep, Arena& scratch) {
  const ModelConfig& cfg = model.config();
  const std::size_t V = cfg.vocab_size, S = max_steps;
  const TokenId regular = first_regular(cfg);

  auto fin = keep.alloc<HypothesisView>(b);
  TokenId* fin_tok = keep.alloc<TokenId>(b * S).data();
  double* fin_lp = keep.alloc<double>(b * S).data();
  std::size_t n_fin = 0;

  auto pool = scratch.alloc<DecoderCache>(2 * b);
  for (std::size_t i = 0; i < 2 * b; ++i) new (&pool[i]) DecoderCache(cfg, memory, S, scratch);
  TokenId* tok = scratch.alloc<TokenId>(2 * b * S).data();
  double* lps = scratch.alloc<double>(2 * b * S).data();
  double* score = scratch.alloc<double>(2 * b).data();
  DecoderCache** slot_cache = scratch.alloc<DecoderCache*>(2 * b).data();

  std::size_t cur = 0, live = 1;  // slots [cur*b, cur*b + live)
  slot_cache[0] = &pool[0];
  score[0] = 0.0;
  BeamRun run;
  for (std::size_t step = 1; step <= S && live > 0 && n_fin < b; ++step) {
    ArenaScope step_scope(scratch);
    const std::size_t nxt = 1 - cur;
    TokenId* cur_tok = tok + cur * b * S;
    double* cur_lp = lps + cur * b * S;
    double* cur_score = score + cur * b;
    DecoderCache** cur_cache = slot_cache + cur * b;

    auto in_tok = scratch.alloc<TokenId>(b);
    auto in_pos = scratch.alloc<std::int32_t>(b);
    auto logits = scratch.alloc<double>(b * V);
    Candidates cand{scratch.alloc<double>(2 * b).data(), scratch.alloc<std::size_t>(2 * b).data(),
                    scratch.alloc<TokenId>(2 * b).data(), 0, 0};
    auto parent_taken = scratch.alloc<std::uint8_t>(b);
    auto pool_used = scratch.alloc<std::uint8_t>(2 * b);
    auto parent = scratch.alloc<std::size_t>(b);

    for (std::size_t i = 0; i < live; ++i) {
      in_tok[i] = step == 1 ? bos : cur_tok[i * S + step - 2];
      in_pos[i] = static_cast<std::int32_t>(step - 1) * stride;
    }
    decode_step(model, std::span<DecoderCache* const>(cur_cache, live), in_tok.first(live), in_pos.first(live), scratch,
                logits.first(live * V));
    ++run.steps;
    log_softmax_rows(logits.data(), live, V);

    const bool last = step == S;
    cand.cap = last ? live : std::min(2 * b, live * V);
    for (std::size_t i = 0; i < live; ++i) {
      const double* row = logits.data() + i * V;
      cand.offer(cur_score[i] + row[kEos], i, kEos);
      if (last) continue;
      for (TokenId t = regular; t < static_cast<TokenId>(V); ++t) cand.offer(cur_score[i] + row[t], i, t);
    }
    std::size_t next_live = 0;
    for (std::size_t r = 0; r < cand.size && n_fin < b; ++r) {
      const std::size_t p = cand.hyp[r];
      const TokenId t = cand.token[r];
      const double lp = logits[p * V + static_cast<std::size_t>(t)];
      if (t == kEos) {
        if (!last && r >= b) continue;
        TokenId* dst_tok = fin_tok + n_fin * S;
        double* dst_lp = fin_lp + n_fin * S;
        std::copy(cur_tok + p * S, cur_tok + p * S + step - 1, dst_tok);
        std::copy(cur_lp + p * S, cur_lp + p * S + step - 1, dst_lp);
        dst_tok[step - 1] = kEos;
        dst_lp[step - 1] = lp;
        fin[n_fin] = HypothesisView{{dst_tok, step}, {dst_lp, step}, cand.score[r], last};
        run.forced = run.forced || last;
        ++n_fin;
      } else if (next_live < b) {
        const std::size_t j = next_live++;
        TokenId* dst_tok = tok + (nxt * b + j) * S;
        double* dst_lp = lps + (nxt * b + j) * S;
        std::copy(cur_tok + p * S, cur_tok + p * S + step - 1, dst_tok);
        std::copy(cur_lp + p * S, cur_lp + p * S + step - 1, dst_lp);
        dst_tok[step - 1] = t;
        dst_lp[step - 1] = lp;
        score[nxt * b + j] = cand.score[r];
        parent[j] = p;
      }
    }
    if (n_fin >= b || next_live == 0) break;

    // Children take over their parent's cache; extra children of one parent
    // get a copy in a cache nobody needs any more.
    DecoderCache** next_cache = slot_cache + nxt * b;
    std::fill(parent_taken.begin(), parent_taken.end(), std::uint8_t{0});
    std::fill(pool_used.begin(), pool_used.end(), std::uint8_t{0});
    for (std::size_t j = 0; j < next_live; ++j) {
      if (!parent_taken[parent[j]]) {
        parent_taken[parent[j]] = 1;
        next_cache[j] = cur_cache[parent[j]];
        pool_used[static_cast<std::size_t>(next_cache[j] - pool.data())] = 1;
      } else {
        next_cache[j] = nullptr;
      }
    }
    std::size_t free_idx = 0;
    for (std::size_t j = 0; j < next_live; ++j) {
      if (next_cache[j]) continue;
      while (pool_used[free_idx]) ++free_idx;
      pool_used[free_idx] = 1;
      pool[free_idx].copy_from(*cur_cache[parent[j]]);
      next_cache[j] = &pool[free_idx];
    }
    cur = nxt;
    live = next_live;
  }
  run.finished = fin.first(n_fin);
  return run;
}

// Stable sort, best first, by score / length^alpha (alpha = 0: raw score).
void rank(std::span<HypothesisView> hyps, double alpha) {
  auto key = [alpha](const HypothesisView& h) {
    return alpha == 0.0 ? h.score : h.score / std::pow(static_cast<double>(h.tokens.size()), alpha);
  };
  for (std::size_t i = 1; i < hyps.size(); ++i) {
    HypothesisView h = hyps[i];
    const double s = key(h);
    std::size_t j = i;
    while (j > 0 && s > key(hyps[j - 1])) {
      hyps[j] = hyps[j - 1];
      --j;
    }
    hyps[j] = h;
  }
}

void check_beams(const DecodeOptions& o) {
  if (o.b_at == 0 || o.b_nat == 0) throw std::invalid_argument("beam sizes must be at least 1");
}

Translation to_translation(const DecodeOutcome& out, double seconds) {
  Translation t;
  t.tokens.assign(out.tokens.begin(), out.tokens.end());
  t.skip_at_score = out.skip_at_score;
  t.skip_cmlm_score = out.skip_cmlm_score;
  t.score = out.score;
  t.decoder_calls = out.decoder_calls;
  t.ar_steps = out.ar_steps;
  t.forced_finish = out.forced_finish;
  t.seconds = seconds;
  return t;
}

}  // namespace

bool is_output_token(const ModelConfig& config, TokenId id) {
  return id == kEos || (id >= first_regular(config) && static_cast<std::size_t>(id) < config.vocab_size);
}

std::size_t MemoryEstimate::max_phase() const { return std::max({encoder, at, skip_at, skip_cmlm}); }

std::size_t MemoryEstimate::phase(Phase p) const {
  switch (p) {
    case Phase::encoder:
      return encoder;
    case Phase::at:
      return at;
    case Phase::skip_at:
      return skip_at;
    case Phase::skip_cmlm:
      return skip_cmlm;
    case Phase::sentence:
      return sentence;
  }
  return 0;
}

MemoryEstimate estimate_max_bytes(const ModelConfig& config, std::size_t max_len, int k, std::size_t b_at,
                                  std::size_t b_nat) {
  config.validate();
  if (max_len == 0 || max_len > config.max_len) throw std::invalid_argument("L must be in [1, max_len]");
  if (k < 2) throw std::invalid_argument("chunk size k must be at least 2");
  if (b_at == 0 || b_nat == 0 || b_nat > b_at) throw std::invalid_argument("need b_at >= b_nat >= 1");
  const std::size_t L = max_len, kk = static_cast<std::size_t>(k);
  const std::size_t at_steps = L + 1, skip_steps = ceil_div(L, kk);
  MemoryEstimate e;
  e.encoder = encode_scratch_bytes(config, L);
  e.at = beam_phase_bytes(config, b_at, at_steps, L);
  e.skip_at = beam_phase_bytes(config, b_at, skip_steps, L);
  e.skip_cmlm = fill_phase_bytes(config, b_nat, kk, kk * skip_steps, L);
  const std::size_t at_keep = beam_keep_bytes(b_at, at_steps) + fp(at_steps * sizeof(TokenId));
  const std::size_t hrt_keep = beam_keep_bytes(b_at, skip_steps) + fp(kk * skip_steps * sizeof(TokenId));
  e.sentence = encode_keep_bytes(config, L) + std::max(at_keep, hrt_keep);
  return e;
}

MemoryEstimate merge(const MemoryEstimate& a, const MemoryEstimate& b) {
  return {std::max(a.encoder, b.encoder), std::max(a.at, b.at), std::max(a.skip_at, b.skip_at),
          std::max(a.skip_cmlm, b.skip_cmlm), std::max(a.sentence, b.sentence)};
}

DecodeWorkspace::DecodeWorkspace(const MemoryEstimate& estimate)
    : estimate_(estimate),
      sentence_(estimate.sentence, Phase::sentence),
      phase_(estimate.max_phase(), Phase::encoder) {}

namespace {

MemoryEstimate estimate_all(const ModelConfig& config, std::size_t max_len, std::size_t b_at, std::size_t b_nat) {
  MemoryEstimate e;
  for (int k : config.chunk_sizes) e = merge(e, estimate_max_bytes(config, resolve_len(config, max_len), k, b_at, b_nat));
  return e;
}

}  // namespace

DecodeWorkspace::DecodeWorkspace(const ModelConfig& config, std::size_t max_len, std::size_t b_at, std::size_t b_nat)
    : DecodeWorkspace(estimate_all(config, max_len, b_at, b_nat)) {}

const DecodeOutcome& at_decode(const Model& model, std::span<const TokenId> source, const DecodeOptions& options,
                               DecodeWorkspace& ws) {
  DecodeOutcome& out = ws.outcome();
  check_beams(options);
  const ModelConfig& cfg = model.config();
  const std::size_t L = resolve_len(cfg, options.max_len);
  const std::span<const TokenId> src = source.first(std::min(source.size(), L));
  const std::size_t S = L + 1;

  Arena& keep = ws.sentence();
  Arena& phase = ws.phase();
  keep.reset(Phase::sentence);
  phase.reset(Phase::encoder);
  const EncoderMemory memory = encode(model, src, keep, phase);
  phase.reset(Phase::at);
  BeamRun run = run_beam(model, memory, kBos, 1, options.b_at, S, keep, phase);
  rank(run.finished, options.length_penalty);
  const HypothesisView& best = run.finished.front();
  auto tokens = keep.alloc<TokenId>(S);
  const std::size_t n = std::min(best.tokens.size() - 1, L);
  std::copy(best.tokens.begin(), best.tokens.begin() + static_cast<std::ptrdiff_t>(n), tokens.begin());

  out = DecodeOutcome{};
  out.tokens = tokens.first(n);
  out.skip_at_score = best.score;
  out.score = best.score / std::pow(static_cast<double>(best.tokens.size()), options.length_penalty);
  out.decoder_calls = run.steps;
  out.ar_steps = run.steps;
  out.candidates = run.finished.size();
  out.forced_finish = best.forced;
  out.stage1 = run.finished;
  return out;
}

const DecodeOutcome& hrt_decode(const Model& model, std::span<const TokenId> source, const DecodeOptions& options,
                                DecodeWorkspace& ws) {
  DecodeOutcome& out = ws.outcome();
  check_beams(options);
  if (options.b_at < options.b_nat) throw std::invalid_argument("HRT decoding needs b_at >= b_nat");
  const ModelConfig& cfg = model.config();
  const TokenId bos_k = bos_for(cfg, options.k);
  const std::size_t L = resolve_len(cfg, options.max_len);
  const std::size_t k = static_cast<std::size_t>(options.k);
  const std::size_t V = cfg.vocab_size;
  const std::span<const TokenId> src = source.first(std::min(source.size(), L));
  const std::size_t S = ceil_div(L, k);

  Arena& keep = ws.sentence();
  Arena& phase = ws.phase();
  keep.reset(Phase::sentence);
  phase.reset(Phase::encoder);
  const EncoderMemory memory = encode(model, src, keep, phase);

  phase.reset(Phase::skip_at);
  BeamRun run = run_beam(model, memory, bos_k, options.k, options.b_at, S, keep, phase);
  rank(run.finished, 0.0);
  auto result = keep.alloc<TokenId>(k * S);

  phase.reset(Phase::skip_cmlm);
  const std::size_t c = std::min(options.b_nat, run.finished.size());
  auto items = phase.alloc<ParallelItem>(c);
  std::size_t rows = 0;
  for (std::size_t i = 0; i < c; ++i) rows += k * run.finished[i].tokens.size();
  const std::size_t masked = rows - rows / k;
  auto ids = phase.alloc<TokenId>(rows);
  auto pos = phase.alloc<std::int32_t>(rows);
  auto wanted = phase.alloc<std::uint8_t>(rows);
  auto logits = phase.alloc<double>(masked * V);
  auto filled = phase.alloc<TokenId>(rows);
  std::size_t r = 0;
  for (std::size_t i = 0; i < c; ++i) {
    const auto anchors = run.finished[i].tokens;
    const std::size_t len = k * anchors.size();
    for (std::size_t p = 1; p <= len; ++p) {
      ids[r + p - 1] = p % k == 0 ? anchors[p / k - 1] : kMask;
      pos[r + p - 1] = static_cast<std::int32_t>(p);
      wanted[r + p - 1] = p % k != 0;
    }
    new (&items[i]) ParallelItem{ids.subspan(r, len), pos.subspan(r, len), &memory, wanted.subspan(r, len)};
    r += len;
  }
  decode_parallel(model, items, MaskMode::full, phase, logits);
  log_softmax_rows(logits.data(), masked, V);

  const TokenId regular = first_regular(cfg);
  std::size_t best = 0;
  double best_score = 0.0, best_fill = 0.0;
  r = 0;
  const double* row = logits.data();
  for (std::size_t i = 0; i < c; ++i) {
    const std::size_t len = k * run.finished[i].tokens.size();
    double fill = 0.0;
    for (std::size_t p = 0; p < len; ++p) {
      filled[r + p] = ids[r + p];
      if (!wanted[r + p]) continue;
      TokenId arg = kEos;
      for (TokenId t = regular; t < static_cast<TokenId>(V); ++t) {
        if (row[t] > row[arg]) arg = t;
      }
      filled[r + p] = arg;
      fill += row[arg];
      row += V;
    }
    const double total = (run.finished[i].score + fill) / std::pow(static_cast<double>(len), options.length_penalty);
    if (i == 0 || total > best_score) {
      best = i;
      best_score = total;
      best_fill = fill;
      std::copy(filled.begin() + static_cast<std::ptrdiff_t>(r),
                filled.begin() + static_cast<std::ptrdiff_t>(r + len), result.begin());
    }
    r += len;
  }
  const std::size_t best_len = k * run.finished[best].tokens.size();
  std::size_t n = 0;
  while (n < best_len && result[n] != kEos) ++n;

  out = DecodeOutcome{};
  out.tokens = result.first(std::min(n, L));
  out.skip_at_score = run.finished[best].score;
  out.skip_cmlm_score = best_fill;
  out.score = best_score;
  out.decoder_calls = run.steps + 1;
  out.ar_steps = run.steps;
  out.candidates = c;
  out.best_index = best;
  out.forced_finish = run.finished[best].forced;
  out.stage1 = run.finished;
  return out;
}

Translation at_translate(const Model& model, std::span<const TokenId> source, std::size_t beam, double length_penalty,
                         std::size_t max_len) {
  DecodeOptions o;
  o.b_at = beam;
  o.b_nat = 1;
  o.length_penalty = length_penalty;
  o.max_len = max_len;
  const std::size_t L = resolve_len(model.config(), max_len);
  MemoryEstimate e = estimate_max_bytes(model.config(), L, model.config().chunk_sizes.front(), std::max<std::size_t>(beam, 1), 1);
  DecodeWorkspace ws(e);
  const auto t0 = std::chrono::steady_clock::now();
  const DecodeOutcome& out = at_decode(model, source, o, ws);
  return to_translation(out, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
}

Translation hrt_translate(const Model& model, std::span<const TokenId> source, const DecodeOptions& options) {
  check_beams(options);
  if (options.b_at < options.b_nat) throw std::invalid_argument("HRT decoding needs b_at >= b_nat");
  const std::size_t L = resolve_len(model.config(), options.max_len);
  DecodeWorkspace ws(estimate_max_bytes(model.config(), L, options.k, options.b_at, options.b_nat));
  const auto t0 = std::chrono::steady_clock::now();
  const DecodeOutcome& out = hrt_decode(model, source, options, ws);
  Translation t = to_translation(out, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  const auto anchors = out.stage1[out.best_index].tokens;
  t.anchors.assign(anchors.begin(), anchors.end());
  return t;
}

std::vector<Hypothesis> skip_at_stage(const Model& model, const EncoderMemory& memory, int k, std::size_t b_at,
                                      std::size_t max_steps, Arena& scratch) {
  if (b_at == 0) throw std::invalid_argument("beam size must be at least 1");
  if (max_steps == 0) throw std::invalid_argument("max_steps must be at least 1");
  const TokenId bos_k = bos_for(model.config(), k);
  ArenaScope scope(scratch);
  BeamRun run = run_beam(model, memory, bos_k, k, b_at, max_steps, scratch, scratch);
  rank(run.finished, 0.0);
  std::vector<Hypothesis> out;
  for (const HypothesisView& v : run.finished) {
    Hypothesis h;
    h.tokens.assign(v.tokens.begin(), v.tokens.end());
    h.log_probs.assign(v.log_probs.begin(), v.log_probs.end());
    for (std::size_t i = 1; i <= v.tokens.size(); ++i) h.positions.push_back(static_cast<std::int32_t>(i) * k);
    h.score = v.score;
    h.finished = true;
    h.forced = v.forced;
    out.push_back(std::move(h));
  }
  return out;
}

PositionedSequence build_stage2_input(std::span<const TokenId> anchors, int k) {
  if (k < 1) throw std::invalid_argument("chunk size k must be positive");
  if (anchors.empty() || anchors.back() != kEos) throw std::invalid_argument("anchors must be nonempty and end with [EOS]");
  const std::size_t kk = static_cast<std::size_t>(k);
  PositionedSequence s;
  for (std::size_t p = 1; p <= kk * anchors.size(); ++p) {
    s.tokens.push_back(p % kk == 0 ? anchors[p / kk - 1] : kMask);
    s.positions.push_back(static_cast<std::int32_t>(p));
  }
  return s;
}

FillResult skip_cmlm_fill(const Model& model, const EncoderMemory& memory, const PositionedSequence& input,
                          Arena& scratch) {
  const ModelConfig& cfg = model.config();
  const std::size_t V = cfg.vocab_size;
  Tensor logits = decode_parallel(model, input, memory, MaskMode::full, scratch);
  log_softmax_rows(logits.raw(), input.size(), V);
  FillResult out;
  out.tokens = input.tokens;
  out.decoder_calls = 1;
  const TokenId regular = first_regular(cfg);
  for (std::size_t p = 0; p < input.size(); ++p) {
    if (input.tokens[p] != kMask) continue;
    const double* row = logits.raw() + p * V;
    TokenId arg = kEos;
    for (TokenId t = regular; t < static_cast<TokenId>(V); ++t) {
      if (row[t] > row[arg]) arg = t;
    }
    out.tokens[p] = arg;
    out.mask_positions.push_back(input.positions[p]);
    out.mask_log_probs.push_back(row[arg]);
  }
  return out;
}

double combined_score(double skip_at_score, std::span<const double> fill_log_probs, std::size_t length, double alpha) {
  double total = skip_at_score;
  for (double v : fill_log_probs) total += v;
  if (alpha == 0.0) return total;
  if (length == 0) throw std::invalid_argument("length penalty needs a positive length");
  return total / std::pow(static_cast<double>(length), alpha);
}

std::vector<TokenId> truncate_at_eos(std::span<const TokenId> tokens) {
  const auto it = std::find(tokens.begin(), tokens.end(), kEos);
  return {tokens.begin(), it};
}

}  // namespace hrt
