// Copyright 2026 The HRT Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>

namespace hrt::testing {

// Counts calls to the global operator new while armed. Linking
// alloc_counter.cpp replaces the global allocation functions.
class AllocationCounter {
 public:
  AllocationCounter();
  ~AllocationCounter();
  AllocationCounter(const AllocationCounter&) = delete;
  AllocationCounter& operator=(const AllocationCounter&) = delete;

  std::size_t count() const;
  std::size_t bytes() const;
};

}  // namespace hrt::testing
