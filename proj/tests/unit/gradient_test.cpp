// Copyright 2026 The HRT Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <map>

#include "support/gradcheck.hpp"

namespace hrt {
namespace {

TEST(GradientSuite, EveryLayerWithinTolerance) {
  const auto cases = testing::gradient_suite(2026);
  std::map<std::string, int> shapes;
  for (const auto& c : cases) {
    ++shapes[c.layer];
    EXPECT_LT(c.result.worst, testing::kFdTolerance)
        << c.layer << " shape " << c.shape_index << " worst param " << c.result.worst_param;
    EXPECT_GT(c.result.entries, 0u);
  }
  for (const auto& [layer, n] : shapes) EXPECT_GE(n, 5) << layer;
}

TEST(GradientSuite, DetectsWrongGradient) {
  // A loss whose value ignores the analytic path must fail the check.
  std::mt19937_64 rng(1);
  Parameter w("w", testing::random_tensor({3}, rng));
  const Tensor noise = testing::random_tensor({3}, rng);
  int calls = 0;
  auto r = testing::check_gradients({&w}, [&](Graph& g) {
    ++calls;
    auto x = g.param(w);
    // First build (the analytic one) uses a different projection.
    return testing::project(g, x, calls == 1 ? noise : Tensor({3}, 1.0));
  }, rng);
  EXPECT_GT(r.worst, testing::kFdTolerance);
}

}  // namespace
}  // namespace hrt
