// Copyright 2026 The HRT Authors
// SPDX-License-Identifier: Apache-2.0

#include "hrt/model/transformer.hpp"

#include <cmath>
#include <stdexcept>

#include "hrt/numerics/checkpoint.hpp"

namespace hrt {
namespace {

Tensor xavier(std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> u(-a, a);
  Tensor t({fan_in, fan_out});
  for (double& v : t.data()) v = u(rng);
  return t;
}

LayerNormParams make_ln(const std::string& name, std::size_t d) {
  return {Parameter(name + ".gain", Tensor({d}, 1.0)), Parameter(name + ".bias", Tensor({d}, 0.0))};
}

AttentionParams make_attn(const std::string& name, std::size_t d, std::mt19937_64& rng) {
  auto w = [&](const char* n) { return Parameter(name + "." + n, xavier(d, d, rng)); };
  auto b = [&](const char* n) { return Parameter(name + "." + n, Tensor({d}, 0.0)); };
  return {w("wq"), b("bq"), w("wk"), b("bk"), w("wv"), b("bv"), w("wo"), b("bo")};
}

FeedForwardParams make_ffn(const std::string& name, std::size_t d, std::size_t d_ff, std::mt19937_64& rng) {
  return {Parameter(name + ".w1", xavier(d, d_ff, rng)), Parameter(name + ".b1", Tensor({d_ff}, 0.0)),
          Parameter(name + ".w2", xavier(d_ff, d, rng)), Parameter(name + ".b2", Tensor({d}, 0.0))};
}

Tensor embedding_init(std::size_t vocab, std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0 / std::sqrt(static_cast<double>(d)));
  Tensor t({vocab, d});
  for (double& v : t.data()) v = n(rng);
  return t;
}

template <typename P, typename F>
void visit_ln(P& ln, F&& f) {
  f(ln.gain);
  f(ln.bias);
}
template <typename P, typename F>
void visit_attn(P& a, F&& f) {
  for (auto* p : {&a.wq, &a.bq, &a.wk, &a.bk, &a.wv, &a.bv, &a.wo, &a.bo}) f(*p);
}
template <typename P, typename F>
void visit_ffn(P& a, F&& f) {
  for (auto* p : {&a.w1, &a.b1, &a.w2, &a.b2}) f(*p);
}

// Graph-side handles for one set of parameters.
struct AttnVars {
  Graph::Var wq, bq, wk, bk, wv, bv, wo, bo;
};

AttnVars bind(Graph& g, AttentionParams& a) {
  return {g.param(a.wq), g.param(a.bq), g.param(a.wk), g.param(a.bk),
          g.param(a.wv), g.param(a.bv), g.param(a.wo), g.param(a.bo)};
}

Graph::Var norm(Graph& g, Graph::Var x, LayerNormParams& ln) {
  return g.layer_norm(x, g.param(ln.gain), g.param(ln.bias));
}

Graph::Var ffn(Graph& g, Graph::Var x, FeedForwardParams& f) {
  auto h = g.relu(g.linear(x, g.param(f.w1), g.param(f.b1)));
  return g.linear(h, g.param(f.w2), g.param(f.b2));
}

Graph::Var embed(Graph& g, Graph::Var table, std::span<const TokenId> ids, std::span<const std::int32_t> positions,
                 const PositionalTable& pe, std::size_t d) {
  auto x = g.embedding(table, ids, std::sqrt(static_cast<double>(d)));
  Tensor pos({ids.size(), d});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    auto row = pe.row(positions[i]);
    std::copy(row.begin(), row.end(), pos.raw() + i * d);
  }
  return g.add_constant(x, pos);
}

}  // namespace

std::size_t PackedBatch::decoder_rows() const {
  std::size_t n = 0;
  for (const auto& d : decoder_inputs) n += d.sequence.size();
  return n;
}

Model::Model(ModelConfig config, std::uint64_t seed)
    : config_(std::move(config)),
      pe_((config_.validate(), config_.position_limit()), config_.d_model),
      src_embed_(),
      tgt_embed_() {
  std::mt19937_64 rng(seed);
  const std::size_t d = config_.d_model;
  src_embed_ = Parameter("src_embed", embedding_init(config_.vocab_size, d, rng));
  tgt_embed_ = Parameter("tgt_embed", embedding_init(config_.vocab_size, d, rng));
  for (std::size_t l = 0; l < config_.enc_layers; ++l) {
    const std::string p = "encoder." + std::to_string(l);
    encoder_.layers.push_back({make_ln(p + ".ln_attn", d), make_attn(p + ".self_attn", d, rng), make_ln(p + ".ln_ffn", d),
                               make_ffn(p + ".ffn", d, config_.d_ff, rng)});
  }
  encoder_.final_ln = make_ln("encoder.final_ln", d);
  for (std::size_t l = 0; l < config_.dec_layers; ++l) {
    const std::string p = "decoder." + std::to_string(l);
    decoder_.layers.push_back({make_ln(p + ".ln_self", d), make_attn(p + ".self_attn", d, rng),
                               make_ln(p + ".ln_cross", d), make_attn(p + ".cross_attn", d, rng),
                               make_ln(p + ".ln_ffn", d), make_ffn(p + ".ffn", d, config_.d_ff, rng)});
  }
  decoder_.final_ln = make_ln("decoder.final_ln", d);
}

std::vector<Parameter*> Model::parameters() {
  std::vector<Parameter*> out;
  auto add = [&](Parameter& p) { out.push_back(&p); };
  add(src_embed_);
  add(tgt_embed_);
  for (auto& l : encoder_.layers) {
    visit_ln(l.ln_attn, add);
    visit_attn(l.self_attn, add);
    visit_ln(l.ln_ffn, add);
    visit_ffn(l.ffn, add);
  }
  visit_ln(encoder_.final_ln, add);
  for (auto& l : decoder_.layers) {
    visit_ln(l.ln_self, add);
    visit_attn(l.self_attn, add);
    visit_ln(l.ln_cross, add);
    visit_attn(l.cross_attn, add);
    visit_ln(l.ln_ffn, add);
    visit_ffn(l.ffn, add);
  }
  visit_ln(decoder_.final_ln, add);
  return out;
}

std::vector<const Parameter*> Model::parameters() const {
  auto mut = const_cast<Model*>(this)->parameters();
  return {mut.begin(), mut.end()};
}

std::size_t Model::parameter_count() const {
  std::size_t n = 0;
  for (const Parameter* p : parameters()) n += p->value.size();
  return n;
}

void Model::save(const std::string& path) const {
  const auto params = parameters();
  save_checkpoint(path, config_.serialize(), params);
}

Model Model::load(const std::string& path) {
  const CheckpointData data = load_checkpoint(path);
  Model m(ModelConfig::parse(data.header));
  restore_parameters(data, m.parameters());
  return m;
}

void Model::load_parameters(const std::string& path) {
  const CheckpointData data = load_checkpoint(path);
  const ModelConfig stored = ModelConfig::parse(data.header);
  if (!(stored == config_)) {
    throw CheckpointError("checkpoint config does not match the model:\n" + stored.serialize() + "vs\n" + config_.serialize());
  }
  restore_parameters(data, parameters());
}

Graph::Var Model::encode_graph(Graph& g, const PackedBatch& batch, std::vector<std::size_t>& offsets,
                               std::mt19937_64* rng) {
  const std::size_t d = config_.d_model;
  std::vector<TokenId> ids;
  std::vector<std::int32_t> pos;
  std::vector<AttentionSegment> segs;
  offsets.clear();
  for (const auto& src : batch.sources) {
    if (src.empty()) throw std::invalid_argument("empty source sentence");
    if (src.size() > config_.max_len) throw std::invalid_argument("source longer than max_len");
    offsets.push_back(ids.size());
    segs.push_back({ids.size(), src.size(), ids.size(), src.size(), MaskMode::full});
    for (std::size_t i = 0; i < src.size(); ++i) {
      ids.push_back(src[i]);
      pos.push_back(static_cast<std::int32_t>(i));
    }
  }
  const double p = config_.dropout;
  auto x = embed(g, g.param(src_embed_), ids, pos, pe_, d);
  if (p > 0.0) x = g.dropout(x, p, *rng);
  for (auto& layer : encoder_.layers) {
    auto h = norm(g, x, layer.ln_attn);
    AttnVars a = bind(g, layer.self_attn);
    auto att = g.packed_attention(g.linear(h, a.wq, a.bq), g.linear(h, a.wk, a.bk), g.linear(h, a.wv, a.bv), segs,
                                  config_.n_heads);
    auto o = g.linear(att, a.wo, a.bo);
    if (p > 0.0) o = g.dropout(o, p, *rng);
    x = g.add(x, o);
    auto f = ffn(g, norm(g, x, layer.ln_ffn), layer.ffn);
    if (p > 0.0) f = g.dropout(f, p, *rng);
    x = g.add(x, f);
  }
  return norm(g, x, encoder_.final_ln);
}

Graph::Var Model::forward(Graph& g, const PackedBatch& batch, std::mt19937_64* dropout_rng) {
  const double p = config_.dropout;
  if (p > 0.0 && !dropout_rng) throw std::invalid_argument("dropout > 0 needs an rng");
  const std::size_t d = config_.d_model;
  std::vector<std::size_t> src_off;
  auto memory = encode_graph(g, batch, src_off, dropout_rng);

  std::vector<TokenId> ids;
  std::vector<std::int32_t> pos;
  std::vector<AttentionSegment> self_segs, cross_segs;
  for (const auto& in : batch.decoder_inputs) {
    const auto& seq = in.sequence;
    seq.validate();
    if (seq.size() == 0) throw std::invalid_argument("empty decoder input");
    if (in.source_index >= batch.sources.size()) throw std::out_of_range("decoder input refers to a missing source");
    const std::size_t begin = ids.size();
    self_segs.push_back({begin, seq.size(), begin, seq.size(), in.mode});
    cross_segs.push_back({begin, seq.size(), src_off[in.source_index], batch.sources[in.source_index].size(),
                          MaskMode::full});
    ids.insert(ids.end(), seq.tokens.begin(), seq.tokens.end());
    pos.insert(pos.end(), seq.positions.begin(), seq.positions.end());
  }
  auto tgt = g.param(tgt_embed_);
  auto x = embed(g, tgt, ids, pos, pe_, d);
  if (p > 0.0) x = g.dropout(x, p, *dropout_rng);
  for (auto& layer : decoder_.layers) {
    auto h = norm(g, x, layer.ln_self);
    AttnVars s = bind(g, layer.self_attn);
    auto att = g.packed_attention(g.linear(h, s.wq, s.bq), g.linear(h, s.wk, s.bk), g.linear(h, s.wv, s.bv), self_segs,
                                  config_.n_heads);
    auto o = g.linear(att, s.wo, s.bo);
    if (p > 0.0) o = g.dropout(o, p, *dropout_rng);
    x = g.add(x, o);

    h = norm(g, x, layer.ln_cross);
    AttnVars c = bind(g, layer.cross_attn);
    att = g.packed_attention(g.linear(h, c.wq, c.bq), g.linear(memory, c.wk, c.bk), g.linear(memory, c.wv, c.bv),
                             cross_segs, config_.n_heads);
    o = g.linear(att, c.wo, c.bo);
    if (p > 0.0) o = g.dropout(o, p, *dropout_rng);
    x = g.add(x, o);

    auto f = ffn(g, norm(g, x, layer.ln_ffn), layer.ffn);
    if (p > 0.0) f = g.dropout(f, p, *dropout_rng);
    x = g.add(x, f);
  }
  x = norm(g, x, decoder_.final_ln);
  return g.matmul_nt(x, tgt);
}

}  // namespace hrt
