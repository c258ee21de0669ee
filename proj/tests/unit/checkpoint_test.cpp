// Copyright 2026 The HRT Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "hrt/model/transformer.hpp"
#include "hrt/numerics/checkpoint.hpp"
#include "support/gradcheck.hpp"

namespace hrt {
namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("hrt_ckpt_" + name)).string();
}

TEST(Checkpoint, RoundTripIsBitExact) {
  std::mt19937_64 rng(1);
  Parameter a("enc.w", testing::random_tensor({3, 4}, rng)), b("bias", testing::random_tensor({4}, rng));
  const std::string path = temp_path("roundtrip");
  std::vector<const Parameter*> ps = {&a, &b};
  save_checkpoint(path, "d_model=4\n", ps);
  const CheckpointData data = load_checkpoint(path);
  EXPECT_EQ(data.header, "d_model=4\n");
  ASSERT_EQ(data.tensors.size(), 2u);
  EXPECT_EQ(data.tensors.at("enc.w"), a.value);
  EXPECT_EQ(data.tensors.at("bias"), b.value);

  Parameter a2("enc.w", Tensor({3, 4})), b2("bias", Tensor({4}));
  std::vector<Parameter*> targets = {&a2, &b2};
  restore_parameters(data, targets);
  EXPECT_EQ(a2.value, a.value);
  std::filesystem::remove(path);
}

TEST(Checkpoint, BadMagicRejected) {
  const std::string path = temp_path("magic");
  std::ofstream(path, std::ios::binary) << "NOTACKPT and more bytes";
  EXPECT_THROW(load_checkpoint(path), CheckpointError);
  std::filesystem::remove(path);
}

TEST(Checkpoint, TruncatedFileRejected) {
  std::mt19937_64 rng(2);
  Parameter a("w", testing::random_tensor({8, 8}, rng));
  const std::string path = temp_path("trunc");
  std::vector<const Parameter*> ps = {&a};
  save_checkpoint(path, "", ps);
  std::filesystem::resize_file(path, std::filesystem::file_size(path) - 9);
  EXPECT_THROW(load_checkpoint(path), CheckpointError);
  std::filesystem::remove(path);
}

TEST(Checkpoint, MissingFileRejected) { EXPECT_THROW(load_checkpoint("/nonexistent/x.ckpt"), CheckpointError); }

TEST(Checkpoint, MissingParameterRejected) {
  Parameter a("a", Tensor({2}));
  const std::string path = temp_path("missing");
  std::vector<const Parameter*> ps = {&a};
  save_checkpoint(path, "", ps);
  Parameter b("b", Tensor({2}));
  std::vector<Parameter*> targets = {&b};
  EXPECT_THROW(restore_parameters(load_checkpoint(path), targets), CheckpointError);
  std::filesystem::remove(path);
}

TEST(Checkpoint, ShapeMismatchRejected) {
  Parameter a("a", Tensor({2, 3}));
  const std::string path = temp_path("shape");
  std::vector<const Parameter*> ps = {&a};
  save_checkpoint(path, "", ps);
  Parameter b("a", Tensor({3, 2}));
  std::vector<Parameter*> targets = {&b};
  EXPECT_THROW(restore_parameters(load_checkpoint(path), targets), CheckpointError);
  std::filesystem::remove(path);
}

TEST(ModelCheckpoint, SaveLoadPreservesConfigAndWeights) {
  ModelConfig cfg;
  cfg.d_model = 8;
  cfg.d_ff = 16;
  cfg.n_heads = 2;
  cfg.enc_layers = 2;
  cfg.vocab_size = 20;
  cfg.max_len = 30;
  Model m(cfg, 5);
  const std::string path = temp_path("model");
  m.save(path);
  const Model back = Model::load(path);
  EXPECT_EQ(back.config(), cfg);
  const auto a = m.parameters();
  const auto b = back.parameters();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i]->name, b[i]->name);
    EXPECT_EQ(a[i]->value, b[i]->value);
  }
  std::filesystem::remove(path);
}

TEST(ModelCheckpoint, ConfigMismatchRejected) {
  ModelConfig cfg;
  cfg.d_model = 8;
  cfg.d_ff = 16;
  cfg.n_heads = 2;
  Model m(cfg, 1);
  const std::string path = temp_path("mismatch");
  m.save(path);
  cfg.enc_layers = 2;
  Model other(cfg, 1);
  EXPECT_THROW(other.load_parameters(path), CheckpointError);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace hrt
