// Copyright 2026 The HRT Authors
// SPDX-License-Identifier: Apache-2.0

#include "hrt/training/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "hrt/numerics/checkpoint.hpp"
#include "hrt/numerics/tensor.hpp"

namespace hrt {
namespace {

void check_compatible(const Model& model, const Corpus& corpus, const TrainConfig& config) {
  const ModelConfig& mc = model.config();
  if (corpus.vocab.size() != mc.vocab_size) {
    throw std::invalid_argument("corpus vocabulary has " + std::to_string(corpus.vocab.size()) +
                                " tokens but the model expects " + std::to_string(mc.vocab_size));
  }
  if (corpus.vocab.chunk_sizes() != mc.chunk_sizes) throw std::invalid_argument("vocabulary and model chunk sizes differ");
  if (config.mode == TrainMode::hrt && !corpus.vocab.supports_chunk(config.k)) {
    throw std::invalid_argument("chunk size " + std::to_string(config.k) + " is not supported by the model");
  }
  if (config.batch_pairs == 0) throw std::invalid_argument("batch_pairs must be positive");
}

// Everything one step needs from a batch of samples.
struct StepBatch {
  PackedBatch packed;
  std::vector<std::int32_t> targets;
  std::vector<double> weights;
  std::vector<std::size_t> sample_rows;  // first row of each sample
};

StepBatch pack(const std::vector<TrainingSample>& samples, std::span<const std::size_t> sample_pair,
               std::span<const SentencePair* const> pairs) {
  StepBatch b;
  for (const SentencePair* p : pairs) b.packed.sources.push_back(p->source);
  const double per_sample = 1.0 / static_cast<double>(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const TrainingSample& s = samples[i];
    b.packed.decoder_inputs.push_back({s.input, mask_mode(s.task), sample_pair[i]});
    b.sample_rows.push_back(b.targets.size());
    const double w = per_sample / static_cast<double>(s.loss_count());
    for (std::size_t j = 0; j < s.input.size(); ++j) {
      b.targets.push_back(s.loss_mask[j] ? s.target[j] : 0);
      b.weights.push_back(s.loss_mask[j] ? w : 0.0);
    }
  }
  return b;
}

}  // namespace

TrainMode parse_train_mode(const std::string& name) {
  if (name == "hrt") return TrainMode::hrt;
  if (name == "at" || name == "at_only") return TrainMode::at_only;
  throw std::invalid_argument("unknown training mode '" + name + "' (expected hrt or at)");
}

const char* to_string(TrainMode mode) { return mode == TrainMode::hrt ? "hrt" : "at"; }

void TrainConfig::apply(const KeyValueConfig& kv) {
  auto size = [&](const char* key, std::size_t& field) {
    const long long v = kv.get_int(key, static_cast<long long>(field));
    if (v < 0) throw ConfigError(std::string(key) + " must be non-negative");
    field = static_cast<std::size_t>(v);
  };
  if (kv.has("mode")) mode = parse_train_mode(kv.get_string("mode", ""));
  k = static_cast<int>(kv.get_int("k", k));
  size("steps", steps);
  size("batch_pairs", batch_pairs);
  size("curriculum_steps", curriculum_steps);
  lambda = kv.get_double("lambda", lambda);
  peak_lr = kv.get_double("lr", peak_lr);
  size("warmup_steps", warmup_steps);
  if (kv.has("skip_cmlm_eos")) skip_cmlm_eos = parse_eos_placement(kv.get_string("skip_cmlm_eos", ""));
  seed = static_cast<std::uint64_t>(kv.get_int("seed", static_cast<long long>(seed)));
}

TrainResult train(Model& model, const Corpus& corpus, const TrainConfig& config, const StepCallback& on_step) {
  check_compatible(model, corpus, config);
  TrainResult result;
  if (config.steps == 0) return result;
  if (corpus.pairs.empty()) throw std::invalid_argument("training corpus is empty");
  const auto t0 = std::chrono::steady_clock::now();

  std::mt19937_64 rng(config.seed);
  std::mt19937_64 dropout_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  const CurriculumSchedule schedule{static_cast<double>(config.curriculum_steps ? config.curriculum_steps : config.steps),
                                    config.lambda};
  const InverseSqrtSchedule lr_schedule{config.peak_lr, static_cast<std::int64_t>(std::max<std::size_t>(config.warmup_steps, 1))};
  SampleOptions options{config.k, config.skip_cmlm_eos, config.mode == TrainMode::hrt};
  std::vector<Parameter*> params = model.parameters();
  Adam adam;

  std::vector<std::size_t> order(corpus.pairs.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::size_t cursor = 0;

  for (std::size_t step = 1; step <= config.steps; ++step) {
    std::vector<const SentencePair*> pairs;
    for (std::size_t i = 0; i < config.batch_pairs; ++i) {
      if (cursor == order.size()) {
        std::shuffle(order.begin(), order.end(), rng);
        cursor = 0;
      }
      pairs.push_back(&corpus.pairs[order[cursor++]]);
    }
    LossRecord rec;
    rec.step = step;
    rec.p_k = config.mode == TrainMode::hrt ? schedule.at(static_cast<double>(step)) : 0.0;
    rec.lr = lr_schedule(static_cast<std::int64_t>(step));

    std::vector<TrainingSample> samples;
    std::vector<std::size_t> sample_pair;
    samples.reserve(2 * pairs.size());
    std::size_t primary = 0;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      auto one = assemble_batch(std::span<const SentencePair>(pairs[i], 1), rec.p_k, corpus.vocab, options, rng);
      if (one.front().task == Task::skip_at) ++primary;
      for (auto& s : one) {
        samples.push_back(std::move(s));
        sample_pair.push_back(i);
      }
    }
    rec.primary_fraction = static_cast<double>(primary) / static_cast<double>(pairs.size());

    StepBatch batch = pack(samples, sample_pair, pairs);
    std::vector<double> row_nll;
    try {
      Graph g;
      auto logits = model.forward(g, batch.packed, &dropout_rng);
      auto loss = g.weighted_nll(logits, batch.targets, batch.weights, &row_nll);
      rec.loss = g.value(loss).item();
      if (!std::isfinite(rec.loss)) throw NonFiniteError("loss");
      g.backward(loss);
      adam.step(params, rec.lr);
    } catch (const NonFiniteError& e) {
      throw TrainingDiverged("training diverged at step " + std::to_string(step) + ": " + e.what());
    }

    std::array<double, kTaskCount> sums{};
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const TrainingSample& s = samples[i];
      double nll = 0.0;
      for (std::size_t j = 0; j < s.input.size(); ++j) nll += row_nll[batch.sample_rows[i] + j];
      const auto t = static_cast<std::size_t>(s.task);
      sums[t] += nll / static_cast<double>(s.loss_count());
      ++rec.task_samples[t];
    }
    for (std::size_t t = 0; t < kTaskCount; ++t) {
      rec.task_loss[t] = rec.task_samples[t] ? sums[t] / static_cast<double>(rec.task_samples[t])
                                             : std::numeric_limits<double>::quiet_NaN();
    }
    if (on_step) on_step(rec);
    result.trace.push_back(rec);
  }
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

Model finetune_from_at(const std::string& at_checkpoint, const Corpus& corpus, const TrainConfig& config,
                       TrainResult* result, const StepCallback& on_step) {
  Model model = Model::load(at_checkpoint);
  TrainResult r = train(model, corpus, config, on_step);
  if (result) *result = std::move(r);
  return model;
}

void save_loss_trace(const std::vector<LossRecord>& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write loss trace to " + path);
  out << "step,p_k,lr,loss,primary_fraction,at,cmlm,skip_at,skip_cmlm\n";
  out.precision(8);
  for (const LossRecord& r : trace) {
    out << r.step << ',' << r.p_k << ',' << r.lr << ',' << r.loss << ',' << r.primary_fraction;
    for (double v : r.task_loss) {
      out << ',';
      if (std::isfinite(v)) out << v;
    }
    out << '\n';
  }
}

}  // namespace hrt
