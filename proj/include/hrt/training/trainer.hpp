// Copyright 2026 The HRT Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hrt/data/config_file.hpp"
#include "hrt/data/corpus.hpp"
#include "hrt/model/transformer.hpp"
#include "hrt/training/curriculum.hpp"

namespace hrt {

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class TrainMode {
  hrt,      // curriculum over (AT, CMLM) and (SKIP-AT, SKIP-CMLM)
  at_only,  // plain autoregressive baseline
};

TrainMode parse_train_mode(const std::string& name);
const char* to_string(TrainMode mode);

struct TrainConfig {
  TrainMode mode = TrainMode::hrt;
  int k = 2;
  std::size_t steps = 1000;
  std::size_t batch_pairs = 32;
  std::size_t curriculum_steps = 0;  // T; 0 means `steps`
  double lambda = 1.0;
  double peak_lr = 1e-3;
  std::size_t warmup_steps = 4000;
  EosPlacement skip_cmlm_eos = EosPlacement::grid;  // matches the stage-II input layout
  std::uint64_t seed = 1;

  // Reads keys named like the fields; absent keys keep the current values.
  void apply(const KeyValueConfig& kv);
};

struct LossRecord {
  std::size_t step = 0;
  double p_k = 0.0;
  double lr = 0.0;
  double loss = 0.0;
  double primary_fraction = 0.0;
  std::array<double, kTaskCount> task_loss{};  // per-sample mean, NaN if absent
  std::array<std::size_t, kTaskCount> task_samples{};
};

struct TrainResult {
  std::vector<LossRecord> trace;
  double seconds = 0.0;
};

using StepCallback = std::function<void(const LossRecord&)>;

// Runs `config.steps` optimizer steps. Throws TrainingDiverged when the loss or a
// gradient becomes non-finite, std::invalid_argument when the corpus does not
// match the model.
TrainResult train(Model& model, const Corpus& corpus, const TrainConfig& config, const StepCallback& on_step = {});

// Loads every parameter from an AT checkpoint (config must match) and trains.
Model finetune_from_at(const std::string& at_checkpoint, const Corpus& corpus, const TrainConfig& config,
                       TrainResult* result = nullptr, const StepCallback& on_step = {});

// CSV columns: step,p_k,lr,loss,primary_fraction,at,cmlm,skip_at,skip_cmlm.
void save_loss_trace(const std::vector<LossRecord>& trace, const std::string& path);

}  // namespace hrt
