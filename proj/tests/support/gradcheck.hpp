// Copyright 2026 The HRT Authors
// SPDX-License-Identifier: Apache-2.0

// Central finite-difference gradient checks shared by the unit and
// acceptance suites.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "hrt/model/transformer.hpp"
#include "hrt/numerics/graph.hpp"
#include "hrt/numerics/parameter.hpp"
#include "hrt/training/samples.hpp"

namespace hrt::testing {

inline constexpr double kFdStep = 1e-5;
inline constexpr double kFdTolerance = 1e-4;
inline constexpr double kFdRelativeFloor = 1e-3;
inline constexpr double kFdFloor = 1e-12;

// Builds a scalar loss on a fresh graph.
using LossBuilder = std::function<Graph::Var(Graph&)>;

struct GradCheckResult {
  double worst = 0.0;  // largest per-parameter relative error
  std::string worst_param;
  std::size_t entries = 0;
  std::size_t skipped = 0;  // entries straddling a kink
};

inline Tensor random_tensor(const Shape& shape, std::mt19937_64& rng, double scale = 1.0) {
  Tensor t(shape);
  std::normal_distribution<double> n(0.0, scale);
  for (double& x : t.data()) x = n(rng);
  return t;
}

// ||analytic - numeric|| / max(||analytic||, ||numeric||, floor) per parameter,
// over at most max_entries sampled coordinates of each. The floor is a small
// fraction of the largest gradient norm in the check: several gradients are
// exactly zero (key biases, attention over one key) and their differences are
// pure round-off.
//
// An entry whose step straddles a ReLU kink is skipped. On a smooth loss the
// gap between the one-sided differences is linear in the step; a kink inside
// the step breaks that. The test looks only at loss values, so a wrong
// analytic gradient cannot cause a skip.
inline GradCheckResult check_gradients(const std::vector<Parameter*>& params, const LossBuilder& build,
                                       std::mt19937_64& rng, std::size_t max_entries = 24) {
  for (Parameter* p : params) p->zero_grad();
  {
    Graph g;
    g.backward(build(g));
  }
  auto loss_at = [&] {
    Graph g;
    return g.value(build(g)).item();
  };
  struct Entry {
    double analytic, numeric, kink;
  };
  const double base = loss_at();
  std::vector<std::vector<Entry>> entries;
  double scale = 0.0;
  for (Parameter* p : params) {
    std::vector<std::size_t> idx(p->value.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    if (idx.size() > max_entries) {
      std::shuffle(idx.begin(), idx.end(), rng);
      idx.resize(max_entries);
    }
    auto& list = entries.emplace_back();
    double na = 0.0;
    for (std::size_t i : idx) {
      const double orig = p->value[i];
      // Central difference and half the gap between the one-sided ones.
      auto probe = [&](double h) {
        p->value[i] = orig + h;
        const double up = loss_at();
        p->value[i] = orig - h;
        const double down = loss_at();
        p->value[i] = orig;
        return std::pair{(up - down) / (2.0 * h), (up - 2.0 * base + down) / (2.0 * h)};
      };
      const auto [numeric, bend] = probe(kFdStep);
      const double half_bend = probe(kFdStep / 2.0).second;
      list.push_back({p->grad[i], numeric, std::abs(half_bend - bend / 2.0)});
      na += p->grad[i] * p->grad[i];
    }
    scale = std::max(scale, std::sqrt(na));
  }
  const double floor = std::max(kFdRelativeFloor * scale, kFdFloor);
  GradCheckResult r;
  for (std::size_t k = 0; k < params.size(); ++k) {
    double diff = 0.0, na = 0.0, nn = 0.0;
    for (const Entry& e : entries[k]) {
      ++r.entries;
      if (e.kink > kFdTolerance * std::max({std::abs(e.numeric), std::abs(e.analytic), floor})) {
        ++r.skipped;
        continue;
      }
      diff += (e.analytic - e.numeric) * (e.analytic - e.numeric);
      na += e.analytic * e.analytic;
      nn += e.numeric * e.numeric;
    }
    const double rel = std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nn), floor});
    if (rel >= r.worst) {
      r.worst = rel;
      r.worst_param = params[k]->name;
    }
  }
  return r;
}

// A fixed random projection turns any tensor into a scalar with a
// non-degenerate gradient.
inline Graph::Var project(Graph& g, Graph::Var x, const Tensor& weights) {
  return g.sum(g.mul(x, g.constant(weights)));
}

struct LayerCase {
  std::string layer;
  int shape_index = 0;
  GradCheckResult result;
};

// Runs every parameterized layer on five random shapes each.
inline std::vector<LayerCase> gradient_suite(std::uint64_t seed) {
  std::vector<LayerCase> out;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> small(2, 6);

  for (int s = 0; s < 5; ++s) {
    // linear
    {
      const std::size_t n = small(rng), in = small(rng), o = small(rng);
      Parameter x("x", random_tensor({n, in}, rng)), w("w", random_tensor({in, o}, rng)), b("b", random_tensor({o}, rng));
      const Tensor proj = random_tensor({n, o}, rng);
      auto res = check_gradients({&x, &w, &b}, [&](Graph& g) {
        return project(g, g.linear(g.param(x), g.param(w), g.param(b)), proj);
      }, rng);
      out.push_back({"linear", s, res});
    }
    // layer norm
    {
      const std::size_t n = small(rng), d = small(rng) + 1;
      Parameter x("x", random_tensor({n, d}, rng)), gain("gain", random_tensor({d}, rng)), bias("bias", random_tensor({d}, rng));
      const Tensor proj = random_tensor({n, d}, rng);
      auto res = check_gradients({&x, &gain, &bias}, [&](Graph& g) {
        return project(g, g.layer_norm(g.param(x), g.param(gain), g.param(bias)), proj);
      }, rng);
      out.push_back({"layer_norm", s, res});
    }
    // embedding
    {
      const std::size_t vocab = small(rng) + 2, d = small(rng), n = small(rng);
      Parameter table("table", random_tensor({vocab, d}, rng));
      std::vector<std::int32_t> ids(n);
      std::uniform_int_distribution<std::int32_t> pick(0, static_cast<std::int32_t>(vocab) - 1);
      for (auto& id : ids) id = pick(rng);
      const Tensor proj = random_tensor({n, d}, rng);
      auto res = check_gradients({&table}, [&](Graph& g) {
        return project(g, g.embedding(g.param(table), ids, 1.7), proj);
      }, rng);
      out.push_back({"embedding", s, res});
    }
    // feed-forward block: linear, relu, linear
    {
      const std::size_t n = small(rng), d = small(rng), ff = small(rng) + 2;
      Parameter x("x", random_tensor({n, d}, rng)), w1("w1", random_tensor({d, ff}, rng)), b1("b1", random_tensor({ff}, rng)),
          w2("w2", random_tensor({ff, d}, rng)), b2("b2", random_tensor({d}, rng));
      const Tensor proj = random_tensor({n, d}, rng);
      auto res = check_gradients({&x, &w1, &b1, &w2, &b2}, [&](Graph& g) {
        auto h = g.relu(g.linear(g.param(x), g.param(w1), g.param(b1)));
        return project(g, g.linear(h, g.param(w2), g.param(b2)), proj);
      }, rng);
      out.push_back({"feed_forward", s, res});
    }
    // multi-head attention with projections, one causal and one full segment
    {
      const std::size_t heads = 1 + s % 3, dh = small(rng) / 2 + 1, d = heads * dh;
      const std::size_t n1 = small(rng), n2 = small(rng);
      Parameter x("x", random_tensor({n1 + n2, d}, rng));
      Parameter wq("wq", random_tensor({d, d}, rng, 0.5)), wk("wk", random_tensor({d, d}, rng, 0.5)),
          wv("wv", random_tensor({d, d}, rng, 0.5)), wo("wo", random_tensor({d, d}, rng, 0.5));
      Parameter bq("bq", random_tensor({d}, rng)), bk("bk", random_tensor({d}, rng)), bv("bv", random_tensor({d}, rng)),
          bo("bo", random_tensor({d}, rng));
      const std::vector<AttentionSegment> segs = {{0, n1, 0, n1, MaskMode::causal}, {n1, n2, n1, n2, MaskMode::full}};
      const Tensor proj = random_tensor({n1 + n2, d}, rng);
      auto res = check_gradients({&x, &wq, &bq, &wk, &bk, &wv, &bv, &wo, &bo}, [&](Graph& g) {
        auto xv = g.param(x);
        auto q = g.linear(xv, g.param(wq), g.param(bq));
        auto k = g.linear(xv, g.param(wk), g.param(bk));
        auto v = g.linear(xv, g.param(wv), g.param(bv));
        auto a = g.packed_attention(q, k, v, segs, heads);
        return project(g, g.linear(a, g.param(wo), g.param(bo)), proj);
      }, rng);
      out.push_back({"multi_head_attention", s, res});
    }
    // batched attention over [batch, n, d] with a masked key
    {
      const std::size_t b = small(rng) / 2, nq = small(rng), nk = small(rng) + 1, dh = small(rng);
      Parameter q("q", random_tensor({b, nq, dh}, rng)), k("k", random_tensor({b, nk, dh}, rng)),
          v("v", random_tensor({b, nk, dh}, rng));
      AttentionMask mask = AttentionMask::full(nq, nk, nk - 1);
      const Tensor proj = random_tensor({b, nq, dh}, rng);
      auto res = check_gradients({&q, &k, &v}, [&](Graph& g) {
        return project(g, g.attention(g.param(q), g.param(k), g.param(v), mask), proj);
      }, rng);
      out.push_back({"attention", s, res});
    }
    // softmax + weighted nll head
    {
      const std::size_t n = small(rng), vocab = small(rng) + 2;
      Parameter logits("logits", random_tensor({n, vocab}, rng));
      std::vector<std::int32_t> targets(n);
      std::vector<double> weights(n);
      std::uniform_int_distribution<std::int32_t> pick(0, static_cast<std::int32_t>(vocab) - 1);
      std::uniform_real_distribution<double> u(0.0, 1.0);
      for (std::size_t i = 0; i < n; ++i) {
        targets[i] = pick(rng);
        weights[i] = i % 3 == 1 ? 0.0 : u(rng);
      }
      auto res = check_gradients({&logits}, [&](Graph& g) {
        return g.weighted_nll(g.param(logits), targets, weights);
      }, rng);
      out.push_back({"weighted_nll", s, res});
      const Tensor proj = random_tensor({n, vocab}, rng);
      auto res2 = check_gradients({&logits}, [&](Graph& g) { return project(g, g.softmax(g.param(logits)), proj); }, rng);
      out.push_back({"softmax", s, res2});
    }
    // whole transformer: every encoder and decoder layer, both masking modes
    {
      ModelConfig cfg;
      cfg.n_heads = 1 + s % 2;
      cfg.d_model = cfg.n_heads * (4 + s % 3);
      cfg.d_ff = 2 * cfg.d_model;
      cfg.enc_layers = 1 + s % 2;
      cfg.dec_layers = 1 + (s + 1) % 2;
      cfg.chunk_sizes = {2};
      cfg.vocab_size = 10;
      cfg.max_len = 12;
      Model model(cfg, seed + static_cast<std::uint64_t>(s));
      std::uniform_int_distribution<std::int32_t> tok(5, 9);
      std::uniform_int_distribution<std::size_t> len(1, 5);
      SentencePair pair;
      for (std::size_t i = 0, n = len(rng); i < n; ++i) pair.source.push_back(tok(rng));
      for (std::size_t i = 0, n = len(rng); i < n; ++i) pair.target.push_back(tok(rng));
      const Vocabulary vocab = Vocabulary::synthetic(5, {2});
      std::vector<TrainingSample> samples = {build_at_sample(pair), build_skip_cmlm_sample(pair, 2)};
      PackedBatch batch;
      batch.sources = {pair.source};
      std::vector<std::int32_t> targets;
      std::vector<double> weights;
      for (const auto& smp : samples) {
        batch.decoder_inputs.push_back({smp.input, mask_mode(smp.task), 0});
        for (std::size_t i = 0; i < smp.target.size(); ++i) {
          targets.push_back(smp.loss_mask[i] ? smp.target[i] : 0);
          weights.push_back(smp.loss_mask[i] ? 1.0 : 0.0);
        }
      }
      auto res = check_gradients(model.parameters(), [&](Graph& g) {
        return g.weighted_nll(model.forward(g, batch, nullptr), targets, weights);
      }, rng, 6);
      out.push_back({"transformer", s, res});
    }
  }
  return out;
}

}  // namespace hrt::testing
