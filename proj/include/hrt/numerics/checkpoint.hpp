// Copyright 2026 The HRT Authors
// SPDX-License-Identifier: Apache-2.0

// Flat parameter archive:
//
//   "HRTCKPT1"
//   u32 header_bytes, header (UTF-8 key=value lines)
//   u32 entry_count
//   per entry: u32 name_bytes, name, u32 rank, u64 dims[rank], f64 values[]
//
// All integers and floats are little-endian.

#pragma once

#include <map>
#include <span>
#include <stdexcept>
#include <string>

#include "hrt/numerics/parameter.hpp"

namespace hrt {

inline constexpr char kCheckpointMagic[] = "HRTCKPT1";

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CheckpointData {
  std::string header;
  std::map<std::string, Tensor> tensors;
};

void save_checkpoint(const std::string& path, const std::string& header, std::span<const Parameter* const> params);
CheckpointData load_checkpoint(const std::string& path);

// Copies every named tensor into the matching parameter. Missing names or
// shape mismatches throw CheckpointError.
void restore_parameters(const CheckpointData& data, std::span<Parameter* const> params);

}  // namespace hrt
