// Copyright 2026 The HRT Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>

namespace hrt::bench {

// sentence: buffers that outlive one phase (encoder memory, stage-I results).
enum class Phase { encoder, at, skip_at, skip_cmlm, sentence };
inline constexpr std::size_t kPhaseCount = 5;

const char* to_string(Phase phase);

class ArenaOverflow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bump allocator over one buffer reserved up front. Allocations are 64-byte
// aligned; overflow throws instead of growing.
class Arena {
 public:
  static constexpr std::size_t kAlign = 64;

  explicit Arena(std::size_t capacity_bytes, Phase phase = Phase::encoder);
  Arena(const Arena&) = delete;
  Arena& operator=(const Arena&) = delete;
  Arena(Arena&&) noexcept = default;
  Arena& operator=(Arena&&) noexcept = default;

  // Bytes one allocation of `nbytes` consumes when it is not the last to fit.
  static constexpr std::size_t footprint(std::size_t nbytes) { return (nbytes + kAlign - 1) / kAlign * kAlign; }

  void* alloc_bytes(std::size_t nbytes);

  template <typename T>
  std::span<T> alloc(std::size_t count) {
    return {static_cast<T*>(alloc_bytes(count * sizeof(T))), count};
  }

  // Reclaims everything and starts a new phase. The high-water mark persists.
  void reset(Phase phase);
  void reset() { reset(phase_); }

  std::size_t mark() const { return offset_; }
  void rewind(std::size_t mark);

  Phase phase() const { return phase_; }
  std::size_t capacity() const { return capacity_; }
  std::size_t offset() const { return offset_; }
  std::size_t remaining() const { return capacity_ - offset_; }
  std::size_t high_water() const { return high_water_; }
  std::size_t phase_high_water(Phase phase) const { return phase_high_[static_cast<std::size_t>(phase)]; }

 private:
  struct Free {
    void operator()(std::byte* p) const;
  };

  std::unique_ptr<std::byte[], Free> buffer_;
  std::size_t capacity_ = 0;
  std::size_t offset_ = 0;
  std::size_t high_water_ = 0;
  std::array<std::size_t, kPhaseCount> phase_high_{};
  Phase phase_;
};

// Restores the arena offset when it goes out of scope.
class ArenaScope {
 public:
  explicit ArenaScope(Arena& arena) : arena_(arena), mark_(arena.mark()) {}
  ~ArenaScope() { arena_.rewind(mark_); }
  ArenaScope(const ArenaScope&) = delete;
  ArenaScope& operator=(const ArenaScope&) = delete;

 private:
  Arena& arena_;
  std::size_t mark_;
};

}  // namespace hrt::bench
