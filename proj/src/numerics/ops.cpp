// Copyright 2026 The HRT Authors
// SPDX-License-Identifier: Apache-2.0

#include "hrt/numerics/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "hrt/numerics/eigen_view.hpp"

namespace hrt {

const char* to_string(MaskMode mode) { return mode == MaskMode::causal ? "causal" : "full"; }

AttentionMask::AttentionMask(MaskMode mode, std::size_t query_len, std::size_t key_len)
    : mode_(mode), query_len_(query_len), key_len_(key_len), allowed_(query_len * key_len, 0) {}

AttentionMask AttentionMask::causal(std::size_t query_len, std::size_t key_len, std::size_t query_offset,
                                    std::size_t key_valid) {
  AttentionMask m(MaskMode::causal, query_len, key_len);
  const std::size_t valid = std::min(key_valid, key_len);
  for (std::size_t i = 0; i < query_len; ++i) {
    const std::size_t last = std::min(i + query_offset + 1, valid);
    for (std::size_t j = 0; j < last; ++j) m.allowed_[i * key_len + j] = 1;
  }
  return m;
}

AttentionMask AttentionMask::full(std::size_t query_len, std::size_t key_len, std::size_t key_valid) {
  AttentionMask m(MaskMode::full, query_len, key_len);
  const std::size_t valid = std::min(key_valid, key_len);
  for (std::size_t i = 0; i < query_len; ++i) {
    for (std::size_t j = 0; j < valid; ++j) m.allowed_[i * key_len + j] = 1;
  }
  return m;
}

bool AttentionMask::row_empty(std::size_t i) const {
  const auto* r = allowed_.data() + i * key_len_;
  return std::none_of(r, r + key_len_, [](unsigned char a) { return a != 0; });
}

namespace kernels {

void softmax_row(double* row, std::size_t n) {
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j) mx = std::max(mx, row[j]);
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    row[j] = std::exp(row[j] - mx);
    sum += row[j];
  }
  const double inv = 1.0 / sum;
  for (std::size_t j = 0; j < n; ++j) row[j] *= inv;
}

bool masked_softmax_row(double* row, std::size_t n, const unsigned char* allowed) {
  double mx = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (std::size_t j = 0; j < n; ++j) {
    if (allowed[j]) {
      mx = std::max(mx, row[j]);
      any = true;
    }
  }
  if (!any) return false;
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    row[j] = allowed[j] ? std::exp(row[j] - mx) : 0.0;
    sum += row[j];
  }
  const double inv = 1.0 / sum;
  for (std::size_t j = 0; j < n; ++j) row[j] *= inv;
  return true;
}

double log_sum_exp(const double* row, std::size_t n) {
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j) mx = std::max(mx, row[j]);
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) sum += std::exp(row[j] - mx);
  return mx + std::log(sum);
}

void layer_norm_row(const double* x, const double* gain, const double* bias, double* out, std::size_t n,
                    double* mean_out, double* rstd_out) {
  double mean = 0.0;
  for (std::size_t j = 0; j < n; ++j) mean += x[j];
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (std::size_t j = 0; j < n; ++j) var += (x[j] - mean) * (x[j] - mean);
  var /= static_cast<double>(n);
  const double rstd = 1.0 / std::sqrt(var + kLayerNormEps);
  for (std::size_t j = 0; j < n; ++j) out[j] = (x[j] - mean) * rstd * gain[j] + bias[j];
  if (mean_out) *mean_out = mean;
  if (rstd_out) *rstd_out = rstd;
}

}  // namespace kernels

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() < 2 || b.rank() < 2) throw ShapeError("matmul needs rank >= 2 operands");
  const std::size_t n = a.dim(a.rank() - 2), inner = a.dim(a.rank() - 1);
  const std::size_t inner_b = b.dim(b.rank() - 2), m = b.dim(b.rank() - 1);
  if (inner != inner_b) {
    throw ShapeError("matmul inner dimensions differ: " + shape_string(a.shape()) + " x " + shape_string(b.shape()));
  }
  Shape lead_a(a.shape().begin(), a.shape().end() - 2);
  Shape lead_b(b.shape().begin(), b.shape().end() - 2);
  if (!lead_b.empty() && lead_a != lead_b) {
    throw ShapeError("matmul batch axes differ: " + shape_string(a.shape()) + " x " + shape_string(b.shape()));
  }
  const std::size_t batch = shape_size(lead_a);
  Shape out_shape = lead_a;
  out_shape.push_back(n);
  out_shape.push_back(m);
  Tensor out(out_shape);
  for (std::size_t i = 0; i < batch; ++i) {
    const double* bp = lead_b.empty() ? b.raw() : b.raw() + i * inner * m;
    ev::view(out.raw() + i * n * m, n, m).noalias() =
        ev::view(a.raw() + i * n * inner, n, inner) * ev::view(bp, inner, m);
  }
  require_finite(out, "matmul");
  return out;
}

Tensor softmax(const Tensor& x, int axis) {
  const int rank = static_cast<int>(x.rank());
  if (rank == 0) throw ShapeError("softmax of a scalar");
  const int ax = axis < 0 ? axis + rank : axis;
  if (ax < 0 || ax >= rank) throw ShapeError("softmax axis out of range");
  std::size_t outer = 1, inner = 1;
  for (int i = 0; i < ax; ++i) outer *= x.dim(static_cast<std::size_t>(i));
  for (int i = ax + 1; i < rank; ++i) inner *= x.dim(static_cast<std::size_t>(i));
  const std::size_t n = x.dim(static_cast<std::size_t>(ax));
  Tensor out = x;
  AlignedVector line(n);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t in = 0; in < inner; ++in) {
      double* base = out.raw() + o * n * inner + in;
      for (std::size_t j = 0; j < n; ++j) line[j] = base[j * inner];
      kernels::softmax_row(line.data(), n);
      for (std::size_t j = 0; j < n; ++j) base[j * inner] = line[j];
    }
  }
  require_finite(out, "softmax");
  return out;
}

Tensor log_softmax(const Tensor& x) {
  Tensor out = x;
  const std::size_t n = x.cols();
  for (std::size_t r = 0; r < x.rows(); ++r) {
    double* row = out.raw() + r * n;
    const double lse = kernels::log_sum_exp(row, n);
    for (std::size_t j = 0; j < n; ++j) row[j] -= lse;
  }
  require_finite(out, "log_softmax");
  return out;
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias) {
  const std::size_t n = x.cols();
  if (gain.size() != n || bias.size() != n) throw ShapeError("layer_norm gain/bias size mismatch");
  Tensor out(x.shape());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    kernels::layer_norm_row(x.raw() + r * n, gain.raw(), bias.raw(), out.raw() + r * n, n, nullptr, nullptr);
  }
  require_finite(out, "layer_norm");
  return out;
}

Tensor scaled_dot_attention(const Tensor& q, const Tensor& k, const Tensor& v, const AttentionMask& mask) {
  if (q.rank() < 2 || k.rank() != q.rank() || v.rank() != q.rank()) throw ShapeError("attention rank mismatch");
  const std::size_t nq = q.dim(q.rank() - 2), dh = q.cols();
  const std::size_t nk = k.dim(k.rank() - 2), dv = v.cols();
  if (k.cols() != dh) throw ShapeError("attention q/k head dimensions differ");
  if (v.dim(v.rank() - 2) != nk) throw ShapeError("attention k/v lengths differ");
  if (mask.query_len() != nq || mask.key_len() != nk) throw ShapeError("attention mask does not cover (q, k)");
  const std::size_t batch = q.size() / (nq * dh);
  if (k.size() != batch * nk * dh || v.size() != batch * nk * dv) throw ShapeError("attention batch axes differ");
  for (std::size_t i = 0; i < nq; ++i) {
    if (mask.row_empty(i)) throw std::domain_error("attention query row " + std::to_string(i) + " is fully masked");
  }
  Shape out_shape = q.shape();
  out_shape.back() = dv;
  Tensor out(out_shape);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  AlignedVector scores(nq * nk);
  std::vector<unsigned char> allowed(nk);
  for (std::size_t b = 0; b < batch; ++b) {
    auto s = ev::view(scores.data(), nq, nk);
    s.noalias() = scale * ev::view(q.raw() + b * nq * dh, nq, dh) * ev::view(k.raw() + b * nk * dh, nk, dh).transpose();
    for (std::size_t i = 0; i < nq; ++i) {
      for (std::size_t j = 0; j < nk; ++j) allowed[j] = mask.allowed(i, j);
      kernels::masked_softmax_row(scores.data() + i * nk, nk, allowed.data());
    }
    ev::view(out.raw() + b * nq * dv, nq, dv).noalias() = s * ev::view(v.raw() + b * nk * dv, nk, dv);
  }
  require_finite(out, "scaled_dot_attention");
  return out;
}

double cross_entropy_masked(const Tensor& logits, std::span<const std::int32_t> targets,
                            std::span<const std::uint8_t> loss_mask) {
  const std::size_t n = logits.rows(), vocab = logits.cols();
  if (targets.size() != n || loss_mask.size() != n) throw ShapeError("cross_entropy: one target and mask bit per row");
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!loss_mask[i]) continue;
    const auto t = targets[i];
    if (t < 0 || static_cast<std::size_t>(t) >= vocab) throw std::out_of_range("cross_entropy: target id out of range");
    const double* row = logits.raw() + i * vocab;
    total += kernels::log_sum_exp(row, vocab) - row[t];
    ++count;
  }
  if (count == 0) throw std::domain_error("cross_entropy: every position is masked out");
  const double loss = total / static_cast<double>(count);
  if (!std::isfinite(loss)) throw NonFiniteError("non-finite value produced by cross_entropy");
  return loss;
}

}  // namespace hrt
