// Copyright 2026 The HRT Authors
// SPDX-License-Identifier: Apache-2.0

#include "hrt/numerics/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace hrt {
namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

template <typename T>
void put(std::ofstream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& is, const std::string& path) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) throw CheckpointError("truncated checkpoint: " + path);
  return v;
}

std::string get_string(std::ifstream& is, const std::string& path) {
  const auto n = get<std::uint32_t>(is, path);
  std::string s(n, '\0');
  if (n && !is.read(s.data(), n)) throw CheckpointError("truncated checkpoint: " + path);
  return s;
}

}  // namespace

void save_checkpoint(const std::string& path, const std::string& header, std::span<const Parameter* const> params) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw CheckpointError("cannot open checkpoint for writing: " + path);
  os.write(kCheckpointMagic, 8);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(header.size()));
  os.write(header.data(), static_cast<std::streamsize>(header.size()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(params.size()));
  for (const Parameter* p : params) {
    put<std::uint32_t>(os, static_cast<std::uint32_t>(p->name.size()));
    os.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(p->value.rank()));
    for (std::size_t d : p->value.shape()) put<std::uint64_t>(os, d);
    os.write(reinterpret_cast<const char*>(p->value.raw()), static_cast<std::streamsize>(p->value.size() * sizeof(double)));
  }
  if (!os) throw CheckpointError("write failed: " + path);
}

CheckpointData load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CheckpointError("cannot open checkpoint: " + path);
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, kCheckpointMagic, 8) != 0) {
    throw CheckpointError("not an HRTCKPT1 checkpoint: " + path);
  }
  CheckpointData data;
  data.header = get_string(is, path);
  const auto count = get<std::uint32_t>(is, path);
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = get_string(is, path);
    const auto rank = get<std::uint32_t>(is, path);
    if (rank > 8) throw CheckpointError("implausible tensor rank in " + path);
    Shape shape(rank);
    for (auto& d : shape) d = static_cast<std::size_t>(get<std::uint64_t>(is, path));
    Tensor t(shape);
    if (t.size() && !is.read(reinterpret_cast<char*>(t.raw()), static_cast<std::streamsize>(t.size() * sizeof(double)))) {
      throw CheckpointError("truncated checkpoint: " + path);
    }
    if (!data.tensors.emplace(std::move(name), std::move(t)).second) throw CheckpointError("duplicate tensor in " + path);
  }
  return data;
}

void restore_parameters(const CheckpointData& data, std::span<Parameter* const> params) {
  for (Parameter* p : params) {
    auto it = data.tensors.find(p->name);
    if (it == data.tensors.end()) throw CheckpointError("checkpoint is missing parameter " + p->name);
    if (it->second.shape() != p->value.shape()) {
      throw CheckpointError("shape mismatch for " + p->name + ": checkpoint " + shape_string(it->second.shape()) +
                            ", model " + shape_string(p->value.shape()));
    }
    p->value = it->second;
    p->zero_grad();
    p->m.fill(0.0);
    p->v.fill(0.0);
  }
}

}  // namespace hrt
