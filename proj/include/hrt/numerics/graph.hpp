// Copyright 2026 The HRT Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "hrt/numerics/attention_mask.hpp"
#include "hrt/numerics/parameter.hpp"
#include "hrt/numerics/tensor.hpp"

namespace hrt {

class GraphError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// One attention block inside row-packed q/k/v matrices: queries
// [q_begin, q_begin + q_len) attend keys [k_begin, k_begin + k_len).
// Causal segments require q_len == k_len and allow key j for query i iff j <= i.
struct AttentionSegment {
  std::size_t q_begin = 0;
  std::size_t q_len = 0;
  std::size_t k_begin = 0;
  std::size_t k_len = 0;
  MaskMode mode = MaskMode::full;
};

// Tape-based reverse-mode autodiff. Nodes are recorded in creation order and
// backward() walks them in reverse, so the tape is already topologically sorted.
// Parameter leaves accumulate straight into Parameter::grad.
class Graph {
 public:
  class Var {
   public:
    Var() = default;
    std::size_t id() const { return id_; }

   private:
    friend class Graph;
    explicit Var(std::size_t id) : id_(id) {}
    std::size_t id_ = static_cast<std::size_t>(-1);
  };

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Tensor value);
  Var param(Parameter& p);

  const Tensor& value(Var v) const;
  // Gradient of a non-parameter node after backward(); zeros if it received none.
  Tensor grad(Var v) const;
  bool requires_grad(Var v) const { return nodes_.at(v.id_).requires_grad; }
  std::size_t node_count() const { return nodes_.size(); }

  Var matmul(Var a, Var b);     // 2-D
  Var matmul_nt(Var a, Var b);  // a * b^T, 2-D
  Var linear(Var x, Var weight, Var bias);
  Var add(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale(Var x, double s);
  Var add_constant(Var x, const Tensor& c);
  Var relu(Var x);
  Var dropout(Var x, double p, std::mt19937_64& rng);
  Var softmax(Var x);  // last axis
  Var layer_norm(Var x, Var gain, Var bias);
  Var sum(Var x);
  Var embedding(Var table, std::span<const std::int32_t> ids, double scale);

  // Reference attention over [batch, n, d] tensors with one shared mask.
  Var attention(Var q, Var k, Var v, const AttentionMask& mask);

  // Multi-head attention over row-packed (rows, d_model) q/k/v; heads split
  // the columns evenly.
  Var packed_attention(Var q, Var k, Var v, std::span<const AttentionSegment> segments, std::size_t heads);

  // Scalar sum_i w_i * nll_i over logits rows. Rows with weight 0 are skipped
  // and get exactly zero gradient. If row_nll is given it receives nll_i for
  // every weighted row (0 elsewhere).
  Var weighted_nll(Var logits, std::span<const std::int32_t> targets, std::span<const double> weights,
                   std::vector<double>* row_nll = nullptr);
  Var cross_entropy_masked(Var logits, std::span<const std::int32_t> targets, std::span<const std::uint8_t> mask);

  // Runs reverse-mode accumulation from a scalar. Callable once per graph.
  void backward(Var loss);

 private:
  struct Node {
    Tensor value;
    Parameter* param = nullptr;
    Tensor grad;
    bool requires_grad = false;
    std::function<void()> backward;
  };

  Var push(Tensor value, bool requires_grad, const char* op);
  const Tensor& val(std::size_t id) const;
  Tensor& grad_buffer(std::size_t id);
  bool needs(Var v) const { return nodes_[v.id_].requires_grad; }
  void check(Var v) const;

  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

}  // namespace hrt
