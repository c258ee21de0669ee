// Copyright 2026 The HRT Authors
// SPDX-License-Identifier: Apache-2.0

#include "hrt/numerics/graph.hpp"

#include <cmath>
#include <memory>
#include <string>

#include "hrt/numerics/eigen_view.hpp"
#include "hrt/numerics/ops.hpp"

namespace hrt {

Graph::Var Graph::push(Tensor value, bool requires_grad, const char* op) {
  require_finite(value, op);
  Node node;
  node.value = std::move(value);
  node.requires_grad = requires_grad;
  nodes_.push_back(std::move(node));
  return Var(nodes_.size() - 1);
}

const Tensor& Graph::val(std::size_t id) const {
  const Node& n = nodes_[id];
  return n.param ? n.param->value : n.value;
}

Tensor& Graph::grad_buffer(std::size_t id) {
  Node& n = nodes_[id];
  if (n.param) return n.param->grad;
  if (n.grad.size() != val(id).size()) n.grad = Tensor(val(id).shape());
  return n.grad;
}

void Graph::check(Var v) const {
  if (v.id_ >= nodes_.size()) throw GraphError("variable does not belong to this graph");
}

Graph::Var Graph::constant(Tensor value) { return push(std::move(value), false, "constant"); }

Graph::Var Graph::param(Parameter& p) {
  Node node;
  node.param = &p;
  node.requires_grad = true;
  nodes_.push_back(std::move(node));
  return Var(nodes_.size() - 1);
}

const Tensor& Graph::value(Var v) const {
  check(v);
  return val(v.id_);
}

Tensor Graph::grad(Var v) const {
  check(v);
  const Node& n = nodes_[v.id_];
  if (n.param) return n.param->grad;
  if (n.grad.size() == val(v.id_).size()) return n.grad;
  return Tensor(val(v.id_).shape());
}

Graph::Var Graph::matmul(Var a, Var b) {
  check(a);
  check(b);
  const Tensor& A = val(a.id_);
  const Tensor& B = val(b.id_);
  if (A.rank() != 2 || B.rank() != 2) throw ShapeError("Graph::matmul expects 2-D operands");
  Tensor out = hrt::matmul(A, B);
  Var y = push(std::move(out), needs(a) || needs(b), "matmul");
  nodes_[y.id_].backward = [this, a, b, y] {
    const Tensor& A = val(a.id_);
    const Tensor& B = val(b.id_);
    const Tensor& G = nodes_[y.id_].grad;
    const std::size_t n = A.dim(0), k = A.dim(1), m = B.dim(1);
    if (needs(a)) ev::view(grad_buffer(a.id_).raw(), n, k).noalias() += ev::view(G.raw(), n, m) * ev::view(B.raw(), k, m).transpose();
    if (needs(b)) ev::view(grad_buffer(b.id_).raw(), k, m).noalias() += ev::view(A.raw(), n, k).transpose() * ev::view(G.raw(), n, m);
  };
  return y;
}

Graph::Var Graph::matmul_nt(Var a, Var b) {
  check(a);
  check(b);
  const Tensor& A = val(a.id_);
  const Tensor& B = val(b.id_);
  if (A.rank() != 2 || B.rank() != 2 || A.dim(1) != B.dim(1)) {
    throw ShapeError("matmul_nt shape mismatch: " + shape_string(A.shape()) + " x " + shape_string(B.shape()) + "^T");
  }
  const std::size_t n = A.dim(0), k = A.dim(1), m = B.dim(0);
  Tensor out({n, m});
  ev::view(out.raw(), n, m).noalias() = ev::view(A.raw(), n, k) * ev::view(B.raw(), m, k).transpose();
  Var y = push(std::move(out), needs(a) || needs(b), "matmul_nt");
  nodes_[y.id_].backward = [this, a, b, y, n, k, m] {
    const Tensor& A = val(a.id_);
    const Tensor& B = val(b.id_);
    const Tensor& G = nodes_[y.id_].grad;
    if (needs(a)) ev::view(grad_buffer(a.id_).raw(), n, k).noalias() += ev::view(G.raw(), n, m) * ev::view(B.raw(), m, k);
    if (needs(b)) ev::view(grad_buffer(b.id_).raw(), m, k).noalias() += ev::view(G.raw(), n, m).transpose() * ev::view(A.raw(), n, k);
  };
  return y;
}

Graph::Var Graph::linear(Var x, Var weight, Var bias) {
  check(x);
  check(weight);
  check(bias);
  const Tensor& X = val(x.id_);
  const Tensor& W = val(weight.id_);
  const Tensor& B = val(bias.id_);
  if (X.rank() != 2 || W.rank() != 2 || X.dim(1) != W.dim(0) || B.size() != W.dim(1)) {
    throw ShapeError("linear shape mismatch: x" + shape_string(X.shape()) + " w" + shape_string(W.shape()) + " b" +
                     shape_string(B.shape()));
  }
  const std::size_t n = X.dim(0), k = X.dim(1), m = W.dim(1);
  Tensor out({n, m});
  auto o = ev::view(out.raw(), n, m);
  o.noalias() = ev::view(X.raw(), n, k) * ev::view(W.raw(), k, m);
  o.rowwise() += ev::row(B.raw(), m);
  Var y = push(std::move(out), needs(x) || needs(weight) || needs(bias), "linear");
  nodes_[y.id_].backward = [this, x, weight, bias, y, n, k, m] {
    const Tensor& G = nodes_[y.id_].grad;
    auto g = ev::view(G.raw(), n, m);
    if (needs(x)) ev::view(grad_buffer(x.id_).raw(), n, k).noalias() += g * ev::view(val(weight.id_).raw(), k, m).transpose();
    if (needs(weight)) ev::view(grad_buffer(weight.id_).raw(), k, m).noalias() += ev::view(val(x.id_).raw(), n, k).transpose() * g;
    if (needs(bias)) ev::row(grad_buffer(bias.id_).raw(), m) += g.colwise().sum();
  };
  return y;
}

Graph::Var Graph::add(Var a, Var b) {
  check(a);
  check(b);
  const Tensor& A = val(a.id_);
  const Tensor& B = val(b.id_);
  if (A.shape() != B.shape()) throw ShapeError("add shape mismatch");
  Tensor out = A;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += B[i];
  Var y = push(std::move(out), needs(a) || needs(b), "add");
  nodes_[y.id_].backward = [this, a, b, y] {
    const Tensor& G = nodes_[y.id_].grad;
    for (Var p : {a, b}) {
      if (!needs(p)) continue;
      Tensor& g = grad_buffer(p.id_);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += G[i];
    }
  };
  return y;
}

Graph::Var Graph::mul(Var a, Var b) {
  check(a);
  check(b);
  const Tensor& A = val(a.id_);
  const Tensor& B = val(b.id_);
  if (A.shape() != B.shape()) throw ShapeError("mul shape mismatch");
  Tensor out = A;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= B[i];
  Var y = push(std::move(out), needs(a) || needs(b), "mul");
  nodes_[y.id_].backward = [this, a, b, y] {
    const Tensor& G = nodes_[y.id_].grad;
    if (needs(a)) {
      Tensor& g = grad_buffer(a.id_);
      const Tensor& B = val(b.id_);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += G[i] * B[i];
    }
    if (needs(b)) {
      Tensor& g = grad_buffer(b.id_);
      const Tensor& A = val(a.id_);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += G[i] * A[i];
    }
  };
  return y;
}

Graph::Var Graph::scale(Var x, double s) {
  check(x);
  Tensor out = val(x.id_);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= s;
  Var y = push(std::move(out), needs(x), "scale");
  nodes_[y.id_].backward = [this, x, y, s] {
    if (!needs(x)) return;
    const Tensor& G = nodes_[y.id_].grad;
    Tensor& g = grad_buffer(x.id_);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += s * G[i];
  };
  return y;
}

Graph::Var Graph::add_constant(Var x, const Tensor& c) {
  check(x);
  if (val(x.id_).shape() != c.shape()) throw ShapeError("add_constant shape mismatch");
  Tensor out = val(x.id_);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += c[i];
  Var y = push(std::move(out), needs(x), "add_constant");
  nodes_[y.id_].backward = [this, x, y] {
    if (!needs(x)) return;
    const Tensor& G = nodes_[y.id_].grad;
    Tensor& g = grad_buffer(x.id_);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += G[i];
  };
  return y;
}

Graph::Var Graph::relu(Var x) {
  check(x);
  Tensor out = val(x.id_);
  for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
  Var y = push(std::move(out), needs(x), "relu");
  nodes_[y.id_].backward = [this, x, y] {
    if (!needs(x)) return;
    const Tensor& G = nodes_[y.id_].grad;
    const Tensor& X = val(x.id_);
    Tensor& g = grad_buffer(x.id_);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += X[i] > 0.0 ? G[i] : 0.0;
  };
  return y;
}

Graph::Var Graph::dropout(Var x, double p, std::mt19937_64& rng) {
  check(x);
  if (p <= 0.0) return x;
  if (p >= 1.0) throw std::invalid_argument("dropout probability must be < 1");
  std::bernoulli_distribution keep(1.0 - p);
  auto mask = std::make_shared<std::vector<double>>(val(x.id_).size());
  const double s = 1.0 / (1.0 - p);
  for (double& m : *mask) m = keep(rng) ? s : 0.0;
  Tensor out = val(x.id_);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= (*mask)[i];
  Var y = push(std::move(out), needs(x), "dropout");
  nodes_[y.id_].backward = [this, x, y, mask] {
    if (!needs(x)) return;
    const Tensor& G = nodes_[y.id_].grad;
    Tensor& g = grad_buffer(x.id_);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += G[i] * (*mask)[i];
  };
  return y;
}

Graph::Var Graph::softmax(Var x) {
  check(x);
  Tensor out = hrt::softmax(val(x.id_), -1);
  Var y = push(std::move(out), needs(x), "softmax");
  nodes_[y.id_].backward = [this, x, y] {
    if (!needs(x)) return;
    const Tensor& P = nodes_[y.id_].value;
    const Tensor& G = nodes_[y.id_].grad;
    Tensor& g = grad_buffer(x.id_);
    const std::size_t n = P.cols();
    for (std::size_t r = 0; r < P.rows(); ++r) {
      const double* p = P.raw() + r * n;
      const double* gy = G.raw() + r * n;
      double dot = 0.0;
      for (std::size_t j = 0; j < n; ++j) dot += p[j] * gy[j];
      double* gx = g.raw() + r * n;
      for (std::size_t j = 0; j < n; ++j) gx[j] += p[j] * (gy[j] - dot);
    }
  };
  return y;
}

Graph::Var Graph::layer_norm(Var x, Var gain, Var bias) {
  check(x);
  check(gain);
  check(bias);
  const Tensor& X = val(x.id_);
  const std::size_t n = X.cols(), rows = X.rows();
  if (val(gain.id_).size() != n || val(bias.id_).size() != n) throw ShapeError("layer_norm gain/bias size mismatch");
  Tensor out(X.shape());
  auto stats = std::make_shared<std::vector<double>>(2 * rows);
  for (std::size_t r = 0; r < rows; ++r) {
    kernels::layer_norm_row(X.raw() + r * n, val(gain.id_).raw(), val(bias.id_).raw(), out.raw() + r * n, n,
                            &(*stats)[2 * r], &(*stats)[2 * r + 1]);
  }
  Var y = push(std::move(out), needs(x) || needs(gain) || needs(bias), "layer_norm");
  nodes_[y.id_].backward = [this, x, gain, bias, y, stats, n, rows] {
    const Tensor& X = val(x.id_);
    const Tensor& G = nodes_[y.id_].grad;
    const double* gam = val(gain.id_).raw();
    double* gx = needs(x) ? grad_buffer(x.id_).raw() : nullptr;
    double* gg = needs(gain) ? grad_buffer(gain.id_).raw() : nullptr;
    double* gb = needs(bias) ? grad_buffer(bias.id_).raw() : nullptr;
    AlignedVector xhat(n), dxhat(n);
    for (std::size_t r = 0; r < rows; ++r) {
      const double mean = (*stats)[2 * r], rstd = (*stats)[2 * r + 1];
      const double* xr = X.raw() + r * n;
      const double* gy = G.raw() + r * n;
      double sum_d = 0.0, sum_dx = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        xhat[j] = (xr[j] - mean) * rstd;
        dxhat[j] = gy[j] * gam[j];
        sum_d += dxhat[j];
        sum_dx += dxhat[j] * xhat[j];
        if (gg) gg[j] += gy[j] * xhat[j];
        if (gb) gb[j] += gy[j];
      }
      if (gx) {
        const double inv_n = 1.0 / static_cast<double>(n);
        for (std::size_t j = 0; j < n; ++j) {
          gx[r * n + j] += rstd * (dxhat[j] - inv_n * sum_d - xhat[j] * inv_n * sum_dx);
        }
      }
    }
  };
  return y;
}

Graph::Var Graph::sum(Var x) {
  check(x);
  double s = 0.0;
  for (double v : val(x.id_).data()) s += v;
  Var y = push(Tensor::scalar(s), needs(x), "sum");
  nodes_[y.id_].backward = [this, x, y] {
    if (!needs(x)) return;
    const double g0 = nodes_[y.id_].grad[0];
    for (double& g : grad_buffer(x.id_).data()) g += g0;
  };
  return y;
}

Graph::Var Graph::embedding(Var table, std::span<const std::int32_t> ids, double scale) {
  check(table);
  const Tensor& T = val(table.id_);
  if (T.rank() != 2) throw ShapeError("embedding table must be 2-D");
  const std::size_t d = T.dim(1), vocab = T.dim(0);
  auto idx = std::make_shared<std::vector<std::int32_t>>(ids.begin(), ids.end());
  Tensor out({ids.size(), d});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto id = ids[i];
    if (id < 0 || static_cast<std::size_t>(id) >= vocab) throw std::out_of_range("embedding id out of range");
    const double* src = T.raw() + static_cast<std::size_t>(id) * d;
    for (std::size_t j = 0; j < d; ++j) out.raw()[i * d + j] = scale * src[j];
  }
  Var y = push(std::move(out), needs(table), "embedding");
  nodes_[y.id_].backward = [this, table, y, idx, d, scale] {
    if (!needs(table)) return;
    const Tensor& G = nodes_[y.id_].grad;
    double* gt = grad_buffer(table.id_).raw();
    for (std::size_t i = 0; i < idx->size(); ++i) {
      double* dst = gt + static_cast<std::size_t>((*idx)[i]) * d;
      for (std::size_t j = 0; j < d; ++j) dst[j] += scale * G.raw()[i * d + j];
    }
  };
  return y;
}

Graph::Var Graph::attention(Var q, Var k, Var v, const AttentionMask& mask) {
  check(q);
  check(k);
  check(v);
  const Tensor& Q = val(q.id_);
  const Tensor& K = val(k.id_);
  const Tensor& V = val(v.id_);
  Tensor out = scaled_dot_attention(Q, K, V, mask);  // validates shapes and empty rows
  const std::size_t nq = Q.dim(Q.rank() - 2), dh = Q.cols(), nk = K.dim(K.rank() - 2), dv = V.cols();
  const std::size_t batch = Q.size() / (nq * dh);
  const double sc = 1.0 / std::sqrt(static_cast<double>(dh));
  // Recompute probabilities for the backward pass.
  auto probs = std::make_shared<AlignedVector>(batch * nq * nk);
  std::vector<unsigned char> allowed(nq * nk);
  for (std::size_t i = 0; i < nq; ++i)
    for (std::size_t j = 0; j < nk; ++j) allowed[i * nk + j] = mask.allowed(i, j);
  for (std::size_t b = 0; b < batch; ++b) {
    double* p = probs->data() + b * nq * nk;
    ev::view(p, nq, nk).noalias() = sc * ev::view(Q.raw() + b * nq * dh, nq, dh) * ev::view(K.raw() + b * nk * dh, nk, dh).transpose();
    for (std::size_t i = 0; i < nq; ++i) kernels::masked_softmax_row(p + i * nk, nk, allowed.data() + i * nk);
  }
  Var y = push(std::move(out), needs(q) || needs(k) || needs(v), "attention");
  nodes_[y.id_].backward = [this, q, k, v, y, probs, batch, nq, nk, dh, dv, sc] {
    const Tensor& G = nodes_[y.id_].grad;
    AlignedVector dp(nq * nk);
    for (std::size_t b = 0; b < batch; ++b) {
      auto P = ev::view(probs->data() + b * nq * nk, nq, nk);
      auto g = ev::view(G.raw() + b * nq * dv, nq, dv);
      auto Vb = ev::view(val(v.id_).raw() + b * nk * dv, nk, dv);
      if (needs(v)) ev::view(grad_buffer(v.id_).raw() + b * nk * dv, nk, dv).noalias() += P.transpose() * g;
      auto dP = ev::view(dp.data(), nq, nk);
      dP.noalias() = g * Vb.transpose();
      for (std::size_t i = 0; i < nq; ++i) {
        const double dot = P.row(static_cast<Eigen::Index>(i)).dot(dP.row(static_cast<Eigen::Index>(i)));
        dP.row(static_cast<Eigen::Index>(i)) =
            (P.row(static_cast<Eigen::Index>(i)).array() * (dP.row(static_cast<Eigen::Index>(i)).array() - dot)).matrix();
      }
      dP *= sc;
      if (needs(q)) ev::view(grad_buffer(q.id_).raw() + b * nq * dh, nq, dh).noalias() += dP * ev::view(val(k.id_).raw() + b * nk * dh, nk, dh);
      if (needs(k)) ev::view(grad_buffer(k.id_).raw() + b * nk * dh, nk, dh).noalias() += dP.transpose() * ev::view(val(q.id_).raw() + b * nq * dh, nq, dh);
    }
  };
  return y;
}

Graph::Var Graph::packed_attention(Var q, Var k, Var v, std::span<const AttentionSegment> segments, std::size_t heads) {
  check(q);
  check(k);
  check(v);
  const Tensor& Q = val(q.id_);
  const Tensor& K = val(k.id_);
  const Tensor& V = val(v.id_);
  const std::size_t d = Q.cols();
  if (Q.rank() != 2 || K.rank() != 2 || V.rank() != 2 || K.cols() != d || V.cols() != d || K.rows() != V.rows()) {
    throw ShapeError("packed_attention expects (rows, d) q/k/v with equal d");
  }
  if (heads == 0 || d % heads != 0) throw ShapeError("packed_attention: d not divisible by heads");
  const std::size_t dh = d / heads;
  const double sc = 1.0 / std::sqrt(static_cast<double>(dh));
  auto segs = std::make_shared<std::vector<AttentionSegment>>(segments.begin(), segments.end());
  std::size_t prob_size = 0;
  for (const auto& s : *segs) {
    if (s.q_begin + s.q_len > Q.rows() || s.k_begin + s.k_len > K.rows()) throw ShapeError("attention segment out of range");
    if (s.k_len == 0 && s.q_len > 0) throw std::domain_error("attention segment has no keys");
    if (s.mode == MaskMode::causal && s.q_len != s.k_len) throw ShapeError("causal segment needs q_len == k_len");
    prob_size += heads * s.q_len * s.k_len;
  }
  auto probs = std::make_shared<AlignedVector>(prob_size);
  Tensor out({Q.rows(), d});
  std::size_t off = 0;
  for (const auto& s : *segs) {
    for (std::size_t h = 0; h < heads; ++h) {
      double* p = probs->data() + off;
      auto P = ev::view(p, s.q_len, s.k_len);
      P.noalias() = sc * ev::view(Q.raw() + s.q_begin * d + h * dh, s.q_len, dh, d) *
                    ev::view(K.raw() + s.k_begin * d + h * dh, s.k_len, dh, d).transpose();
      for (std::size_t i = 0; i < s.q_len; ++i) {
        const std::size_t n = s.mode == MaskMode::causal ? i + 1 : s.k_len;
        double* row = p + i * s.k_len;
        kernels::softmax_row(row, n);
        for (std::size_t j = n; j < s.k_len; ++j) row[j] = 0.0;
      }
      ev::view(out.raw() + s.q_begin * d + h * dh, s.q_len, dh, d).noalias() =
          P * ev::view(V.raw() + s.k_begin * d + h * dh, s.k_len, dh, d);
      off += s.q_len * s.k_len;
    }
  }
  Var y = push(std::move(out), needs(q) || needs(k) || needs(v), "packed_attention");
  nodes_[y.id_].backward = [this, q, k, v, y, segs, probs, heads, d, dh, sc] {
    const Tensor& G = nodes_[y.id_].grad;
    const Tensor& Q = val(q.id_);
    const Tensor& K = val(k.id_);
    const Tensor& V = val(v.id_);
    double* gq = needs(q) ? grad_buffer(q.id_).raw() : nullptr;
    double* gk = needs(k) ? grad_buffer(k.id_).raw() : nullptr;
    double* gv = needs(v) ? grad_buffer(v.id_).raw() : nullptr;
    AlignedVector dp;
    std::size_t off = 0;
    for (const auto& s : *segs) {
      dp.resize(s.q_len * s.k_len);
      for (std::size_t h = 0; h < heads; ++h) {
        auto P = ev::view(probs->data() + off, s.q_len, s.k_len);
        auto g = ev::view(G.raw() + s.q_begin * d + h * dh, s.q_len, dh, d);
        if (gv) ev::view(gv + s.k_begin * d + h * dh, s.k_len, dh, d).noalias() += P.transpose() * g;
        auto dP = ev::view(dp.data(), s.q_len, s.k_len);
        dP.noalias() = g * ev::view(V.raw() + s.k_begin * d + h * dh, s.k_len, dh, d).transpose();
        for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(s.q_len); ++i) {
          const double dot = P.row(i).dot(dP.row(i));
          dP.row(i) = (P.row(i).array() * (dP.row(i).array() - dot)).matrix() * sc;
        }
        if (gq) ev::view(gq + s.q_begin * d + h * dh, s.q_len, dh, d).noalias() += dP * ev::view(K.raw() + s.k_begin * d + h * dh, s.k_len, dh, d);
        if (gk) ev::view(gk + s.k_begin * d + h * dh, s.k_len, dh, d).noalias() += dP.transpose() * ev::view(Q.raw() + s.q_begin * d + h * dh, s.q_len, dh, d);
        off += s.q_len * s.k_len;
      }
    }
  };
  return y;
}

Graph::Var Graph::weighted_nll(Var logits, std::span<const std::int32_t> targets, std::span<const double> weights,
                               std::vector<double>* row_nll) {
  check(logits);
  const Tensor& X = val(logits.id_);
  const std::size_t n = X.rows(), vocab = X.cols();
  if (targets.size() != n || weights.size() != n) throw ShapeError("weighted_nll: one target and weight per row");
  auto lse = std::make_shared<std::vector<double>>(n, 0.0);
  auto tg = std::make_shared<std::vector<std::int32_t>>(targets.begin(), targets.end());
  auto w = std::make_shared<std::vector<double>>(weights.begin(), weights.end());
  if (row_nll) row_nll->assign(n, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if ((*w)[i] == 0.0) continue;
    const auto t = targets[i];
    if (t < 0 || static_cast<std::size_t>(t) >= vocab) throw std::out_of_range("weighted_nll: target id out of range");
    const double* row = X.raw() + i * vocab;
    (*lse)[i] = kernels::log_sum_exp(row, vocab);
    const double nll = (*lse)[i] - row[t];
    if (row_nll) (*row_nll)[i] = nll;
    total += (*w)[i] * nll;
  }
  Var y = push(Tensor::scalar(total), needs(logits), "weighted_nll");
  nodes_[y.id_].backward = [this, logits, y, lse, tg, w, n, vocab] {
    if (!needs(logits)) return;
    const double g0 = nodes_[y.id_].grad[0];
    const Tensor& X = val(logits.id_);
    double* gx = grad_buffer(logits.id_).raw();
    for (std::size_t i = 0; i < n; ++i) {
      const double wi = (*w)[i];
      if (wi == 0.0) continue;
      const double* row = X.raw() + i * vocab;
      double* gr = gx + i * vocab;
      const double s = g0 * wi;
      for (std::size_t j = 0; j < vocab; ++j) gr[j] += s * std::exp(row[j] - (*lse)[i]);
      gr[(*tg)[i]] -= s;
    }
  };
  return y;
}

Graph::Var Graph::cross_entropy_masked(Var logits, std::span<const std::int32_t> targets,
                                       std::span<const std::uint8_t> mask) {
  std::size_t count = 0;
  for (auto m : mask) count += m ? 1 : 0;
  if (count == 0) throw std::domain_error("cross_entropy: every position is masked out");
  std::vector<double> weights(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) weights[i] = mask[i] ? 1.0 / static_cast<double>(count) : 0.0;
  return weighted_nll(logits, targets, weights);
}

void Graph::backward(Var loss) {
  check(loss);
  if (backward_done_) throw GraphError("backward already ran on this graph");
  if (val(loss.id_).size() != 1) throw GraphError("backward needs a scalar loss");
  if (!nodes_[loss.id_].requires_grad) throw GraphError("backward on a detached graph: loss does not depend on any parameter");
  backward_done_ = true;
  grad_buffer(loss.id_)[0] += 1.0;
  for (std::size_t i = loss.id_ + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || !n.backward || n.grad.size() != n.value.size() || n.value.empty()) continue;
    n.backward();
  }
  for (const Node& n : nodes_) {
    if (n.param) require_finite(n.param->grad, ("gradient of " + n.param->name).c_str());
  }
}

}  // namespace hrt
