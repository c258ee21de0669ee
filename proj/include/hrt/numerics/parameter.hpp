// Copyright 2026 The HRT Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "hrt/numerics/tensor.hpp"

namespace hrt {

// Trainable tensor with its gradient and Adam moments, all of one shape.
struct Parameter {
  Parameter() = default;
  Parameter(std::string name, Tensor init);

  void zero_grad() { grad.fill(0.0); }

  std::string name;
  Tensor value;
  Tensor grad;
  Tensor m;
  Tensor v;
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.98;
  double eps = 1e-9;
};

class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  // One bias-corrected Adam update on every parameter; gradients are zeroed.
  void step(std::span<Parameter* const> params, double lr);

  std::int64_t steps() const { return steps_; }
  const AdamConfig& config() const { return config_; }

 private:
  AdamConfig config_;
  std::int64_t steps_ = 0;
};

// lr(t) = peak * min(t / warmup, sqrt(warmup / t)), t counted from 1.
struct InverseSqrtSchedule {
  double peak_lr = 1e-3;
  std::int64_t warmup_steps = 4000;

  double operator()(std::int64_t step) const;
};

}  // namespace hrt
