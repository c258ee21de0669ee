// Copyright 2026 The HRT Authors
// SPDX-License-Identifier: Apache-2.0

#include "hrt/bench/arena.hpp"

#include <algorithm>
#include <new>

namespace hrt::bench {

const char* to_string(Phase phase) {
  switch (phase) {
    case Phase::encoder: return "encoder";
    case Phase::at: return "at";
    case Phase::skip_at: return "skip-at";
    case Phase::skip_cmlm: return "skip-cmlm";
    case Phase::sentence: return "sentence";
  }
  return "?";
}

void Arena::Free::operator()(std::byte* p) const { ::operator delete[](p, std::align_val_t(kAlign)); }

Arena::Arena(std::size_t capacity_bytes, Phase phase)
    : buffer_(capacity_bytes ? static_cast<std::byte*>(::operator new[](capacity_bytes, std::align_val_t(kAlign)))
                             : nullptr),
      capacity_(capacity_bytes),
      phase_(phase) {}

void* Arena::alloc_bytes(std::size_t nbytes) {
  if (nbytes > capacity_ - offset_) {
    throw ArenaOverflow(std::string("arena overflow in phase ") + to_string(phase_) + ": requested " +
                        std::to_string(nbytes) + " bytes with " + std::to_string(capacity_ - offset_) + " of " +
                        std::to_string(capacity_) + " remaining");
  }
  void* p = buffer_.get() + offset_;
  offset_ += std::min(footprint(nbytes), capacity_ - offset_);
  high_water_ = std::max(high_water_, offset_);
  auto& ph = phase_high_[static_cast<std::size_t>(phase_)];
  ph = std::max(ph, offset_);
  return p;
}

void Arena::reset(Phase phase) {
  offset_ = 0;
  phase_ = phase;
}

void Arena::rewind(std::size_t mark) {
  if (mark > offset_) throw std::logic_error("arena rewind past the current offset");
  offset_ = mark;
}

}  // namespace hrt::bench
