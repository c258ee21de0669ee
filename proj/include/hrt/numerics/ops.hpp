// Copyright 2026 The HRT Authors
// SPDX-License-Identifier: Apache-2.0

// Forward-only tensor operations. The autograd versions live in graph.hpp and
// share the row kernels declared at the bottom of this header.

#pragma once

#include <cstdint>
#include <span>

#include "hrt/numerics/attention_mask.hpp"
#include "hrt/numerics/tensor.hpp"

namespace hrt {

inline constexpr double kLayerNormEps = 1e-5;

// Product over the last two axes, batched over leading axes. A rank-2 `b` is
// broadcast across the batch of `a`.
Tensor matmul(const Tensor& a, const Tensor& b);

// Numerically stable softmax along `axis` (negative counts from the back).
Tensor softmax(const Tensor& x, int axis = -1);
Tensor log_softmax(const Tensor& x);

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias);

// softmax(q k^T / sqrt(d_head) + mask) v over the last two axes, batched over
// leading axes (typically heads). Throws std::domain_error on a query row with
// no allowed key.
Tensor scaled_dot_attention(const Tensor& q, const Tensor& k, const Tensor& v, const AttentionMask& mask);

// Mean negative log-likelihood over positions whose mask bit is set.
// logits: (n, V). Throws std::domain_error when every position is masked out.
double cross_entropy_masked(const Tensor& logits, std::span<const std::int32_t> targets,
                            std::span<const std::uint8_t> loss_mask);

namespace kernels {

// In-place softmax of one row; entries with allowed[j] == 0 become exactly 0.
// Returns false if no entry is allowed.
bool masked_softmax_row(double* row, std::size_t n, const unsigned char* allowed);

void softmax_row(double* row, std::size_t n);

// log-sum-exp of a row, stable under shifts.
double log_sum_exp(const double* row, std::size_t n);

// Normalizes one row of length n; writes mean and inverse std-dev.
void layer_norm_row(const double* x, const double* gain, const double* bias, double* out, std::size_t n,
                    double* mean_out, double* rstd_out);

}  // namespace kernels

}  // namespace hrt
