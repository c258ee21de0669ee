// Copyright 2026 The HRT Authors
// SPDX-License-Identifier: Apache-2.0

#include "hrt/numerics/parameter.hpp"

#include <algorithm>
#include <cmath>

namespace hrt {

Parameter::Parameter(std::string name_, Tensor init)
    : name(std::move(name_)),
      value(std::move(init)),
      grad(value.shape()),
      m(value.shape()),
      v(value.shape()) {}

void Adam::step(std::span<Parameter* const> params, double lr) {
  ++steps_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  for (Parameter* p : params) {
    require_finite(p->grad, ("gradient of " + p->name).c_str());
    double* w = p->value.raw();
    double* g = p->grad.raw();
    double* m = p->m.raw();
    double* v = p->v.raw();
    for (std::size_t i = 0, n = p->value.size(); i < n; ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      w[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + config_.eps);
      g[i] = 0.0;
    }
  }
}

double InverseSqrtSchedule::operator()(std::int64_t step) const {
  const double t = static_cast<double>(std::max<std::int64_t>(step, 1));
  const double w = static_cast<double>(std::max<std::int64_t>(warmup_steps, 1));
  return peak_lr * std::min(t / w, std::sqrt(w / t));
}

}  // namespace hrt
