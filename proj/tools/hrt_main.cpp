// Copyright 2026 The HRT Authors
// SPDX-License-Identifier: Apache-2.0

// hrt: generate | train | finetune | distill | translate | bench | eval

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hrt/bench/evaluation.hpp"
#include "hrt/bench/wps.hpp"
#include "hrt/data/config_file.hpp"
#include "hrt/data/synthetic.hpp"
#include "hrt/decoding/decode.hpp"
#include "hrt/training/distill.hpp"
#include "hrt/training/trainer.hpp"
#include "json.hpp"

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace {

using hrt::KeyValueConfig;

// Settings resolve as: --config file, then --set key=value, then named flags.
struct Settings {
  std::string config_path;
  std::vector<std::string> sets;
  std::map<std::string, std::string> flags;

  KeyValueConfig resolve() const {
    KeyValueConfig kv = config_path.empty() ? KeyValueConfig{} : KeyValueConfig::load(config_path);
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos || eq == 0) throw hrt::ConfigError("--set expects key=value, got '" + s + "'");
      kv.set(s.substr(0, eq), s.substr(eq + 1));
    }
    for (const auto& [k, v] : flags) kv.set(k, v);
    return kv;
  }
};

void add_common(CLI::App* app, Settings& s) {
  app->add_option("--config", s.config_path, "key=value config file")->check(CLI::ExistingFile);
  app->add_option("--set", s.sets, "override one config key (key=value)");
  app->add_option_function<std::string>(
      "--seed", [&s](const std::string& v) { s.flags["seed"] = v; }, "random seed");
}

void add_key(CLI::App* app, Settings& s, const std::string& flag, const std::string& key, const std::string& help) {
  app->add_option_function<std::string>(
      flag, [&s, key](const std::string& v) { s.flags[key] = v; }, help);
}

void add_switch(CLI::App* app, Settings& s, const std::string& flag, const std::string& key, const std::string& help) {
  app->add_flag_callback(
      flag, [&s, key] { s.flags[key] = "1"; }, help);
}

std::string require(const KeyValueConfig& kv, const std::string& key) {
  auto v = kv.get(key);
  if (!v || v->empty()) throw CLI::ValidationError("missing required setting '" + key + "'");
  return *v;
}

void add_model_keys(CLI::App* app, Settings& s) {
  add_key(app, s, "--d-model", "d_model", "model width");
  add_key(app, s, "--d-ff", "d_ff", "feed-forward width");
  add_key(app, s, "--heads", "n_heads", "attention heads");
  add_key(app, s, "--enc-layers", "enc_layers", "encoder layers");
  add_key(app, s, "--dec-layers", "dec_layers", "decoder layers");
  add_key(app, s, "--max-len", "max_len", "maximum sequence length L");
  add_key(app, s, "--dropout", "dropout", "dropout rate");
}

void add_train_keys(CLI::App* app, Settings& s) {
  add_key(app, s, "--corpus", "corpus", "training corpus (source<TAB>target)");
  add_key(app, s, "--vocab", "vocab", "vocabulary file");
  add_key(app, s, "--out", "out", "checkpoint to write");
  add_key(app, s, "--trace", "trace", "loss trace CSV to write");
  add_key(app, s, "--mode", "mode", "hrt or at");
  add_key(app, s, "--k", "k", "chunk size");
  add_key(app, s, "--steps", "steps", "optimizer steps");
  add_key(app, s, "--batch", "batch_pairs", "sentence pairs per step");
  add_key(app, s, "--lr", "lr", "peak learning rate");
  add_key(app, s, "--warmup", "warmup_steps", "learning-rate warmup steps");
  add_key(app, s, "--curriculum-steps", "curriculum_steps", "curriculum length T (0: all steps)");
  add_key(app, s, "--lambda", "lambda", "curriculum exponent");
  add_key(app, s, "--skip-cmlm-eos", "skip_cmlm_eos", "grid (default) or natural");
  add_key(app, s, "--log-every", "log_every", "print progress every N steps (0: off)");
}

hrt::StepCallback progress(const KeyValueConfig& kv) {
  const long long every = kv.get_int("log_every", 100);
  if (every <= 0) return {};
  return [every](const hrt::LossRecord& r) {
    if (r.step % static_cast<std::size_t>(every) != 0) return;
    std::cerr << "step " << r.step << "  p_k " << std::fixed << std::setprecision(3) << r.p_k << "  loss "
              << std::setprecision(4) << r.loss << '\n';
  };
}

void finish_training(const hrt::Model& model, const hrt::TrainResult& result, const KeyValueConfig& kv) {
  model.save(require(kv, "out"));
  if (auto trace = kv.get("trace")) hrt::save_loss_trace(result.trace, *trace);
  std::cout << "trained " << result.trace.size() << " steps in " << std::fixed << std::setprecision(1)
            << result.seconds << " s";
  if (!result.trace.empty()) std::cout << ", final loss " << std::setprecision(4) << result.trace.back().loss;
  std::cout << '\n';
}

int cmd_generate(const KeyValueConfig& kv) {
  hrt::SyntheticSpec spec;
  spec.task = hrt::parse_synthetic_task(kv.get_string("task", "copy"));
  spec.n_pairs = static_cast<std::size_t>(kv.get_int("pairs", static_cast<long long>(spec.n_pairs)));
  spec.min_len = static_cast<std::size_t>(kv.get_int("min_len", static_cast<long long>(spec.min_len)));
  spec.max_len = static_cast<std::size_t>(kv.get_int("max_sent_len", static_cast<long long>(spec.max_len)));
  spec.vocab_size = static_cast<std::size_t>(kv.get_int("vocab_size", static_cast<long long>(spec.vocab_size)));
  spec.seed = static_cast<std::uint64_t>(kv.get_int("seed", static_cast<long long>(spec.seed)));
  spec.task_seed = static_cast<std::uint64_t>(kv.get_int("task_seed", static_cast<long long>(spec.task_seed)));
  spec.swap_prob = kv.get_double("swap_prob", spec.swap_prob);
  spec.identity_map = kv.get_int("identity_map", 0) != 0;
  const hrt::Corpus corpus = hrt::generate_synthetic(spec);
  hrt::save_corpus(corpus, require(kv, "out"));
  if (auto v = kv.get("vocab_out")) corpus.vocab.save(*v);
  std::cout << "wrote " << corpus.size() << " pairs\n";
  return 0;
}

hrt::Corpus load_training_corpus(const KeyValueConfig& kv) {
  return hrt::load_corpus(require(kv, "corpus"), require(kv, "vocab"));
}

int cmd_train(const KeyValueConfig& kv) {
  const hrt::Corpus corpus = load_training_corpus(kv);
  hrt::ModelConfig mc;
  mc.vocab_size = corpus.vocab.size();
  mc.chunk_sizes = corpus.vocab.chunk_sizes();
  mc = hrt::ModelConfig::from(kv, mc);
  hrt::TrainConfig tc;
  tc.apply(kv);
  hrt::Model model(mc, tc.seed);
  const hrt::TrainResult result = hrt::train(model, corpus, tc, progress(kv));
  finish_training(model, result, kv);
  return 0;
}

int cmd_finetune(const KeyValueConfig& kv) {
  const hrt::Corpus corpus = load_training_corpus(kv);
  hrt::TrainConfig tc;
  tc.mode = hrt::TrainMode::hrt;
  tc.apply(kv);
  hrt::TrainResult result;
  const hrt::Model model = hrt::finetune_from_at(require(kv, "at_checkpoint"), corpus, tc, &result, progress(kv));
  finish_training(model, result, kv);
  return 0;
}

int cmd_distill(const KeyValueConfig& kv) {
  const hrt::Corpus corpus = load_training_corpus(kv);
  const hrt::Model teacher = hrt::Model::load(require(kv, "checkpoint"));
  const auto beam = static_cast<std::size_t>(kv.get_int("beam", 5));
  const hrt::DistillResult r = hrt::distill_corpus(teacher, corpus, beam, kv.get_double("length_penalty", 0.6));
  hrt::save_corpus(r.corpus, require(kv, "out"));
  std::cout << "distilled " << r.corpus.size() << " pairs, " << r.fallbacks << " fallbacks\n";
  return 0;
}

hrt::DecodeOptions decode_options(const KeyValueConfig& kv) {
  hrt::DecodeOptions o;
  o.k = static_cast<int>(kv.get_int("k", o.k));
  o.b_at = static_cast<std::size_t>(kv.get_int("b_at", static_cast<long long>(o.b_at)));
  o.b_nat = static_cast<std::size_t>(kv.get_int("b_nat", static_cast<long long>(o.b_nat)));
  o.length_penalty = kv.get_double("length_penalty", o.length_penalty);
  o.max_len = static_cast<std::size_t>(kv.get_int("max_len", 0));
  return o;
}

void add_decode_keys(CLI::App* app, Settings& s) {
  add_key(app, s, "--checkpoint", "checkpoint", "model checkpoint");
  add_key(app, s, "--vocab", "vocab", "vocabulary file");
  add_key(app, s, "--input", "input", "source sentences, one per line");
  add_key(app, s, "--mode", "mode", "at or hrt");
  add_key(app, s, "--k", "k", "chunk size");
  add_key(app, s, "--b-at", "b_at", "beam size of the autoregressive stage");
  add_key(app, s, "--b-nat", "b_nat", "candidates sent to the infill stage");
  add_key(app, s, "--length-penalty", "length_penalty", "length penalty exponent");
  add_key(app, s, "--max-len", "max_len", "maximum length L");
}

int cmd_translate(const KeyValueConfig& kv) {
  const hrt::Model model = hrt::Model::load(require(kv, "checkpoint"));
  const hrt::Vocabulary vocab = hrt::Vocabulary::load(require(kv, "vocab"));
  const auto sources = hrt::load_sentences(require(kv, "input"), vocab);
  const auto mode = hrt::bench::parse_decode_mode(kv.get_string("mode", "hrt"));
  const hrt::DecodeOptions o = decode_options(kv);
  const std::size_t L = o.max_len ? o.max_len : model.config().max_len;
  hrt::DecodeWorkspace ws(hrt::estimate_max_bytes(model.config(), L, o.k, o.b_at, o.b_nat));

  std::ofstream out_file;
  if (auto p = kv.get("output")) {
    out_file.open(*p);
    if (!out_file) throw std::runtime_error("cannot write " + *p);
  }
  std::ostream& out = out_file.is_open() ? out_file : std::cout;
  std::ofstream trace;
  if (auto p = kv.get("trace")) {
    trace.open(*p);
    if (!trace) throw std::runtime_error("cannot write " + *p);
  }
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const hrt::DecodeOutcome& r = mode == hrt::bench::DecodeMode::at ? hrt::at_decode(model, sources[i], o, ws)
                                                                       : hrt::hrt_decode(model, sources[i], o, ws);
    out << vocab.decode(r.tokens) << '\n';
    if (trace.is_open()) {
      nlohmann::json j = {{"index", i},
                          {"mode", hrt::bench::to_string(mode)},
                          {"tokens", r.tokens.size()},
                          {"skip_at_score", r.skip_at_score},
                          {"skip_cmlm_score", r.skip_cmlm_score},
                          {"score", r.score},
                          {"decoder_calls", r.decoder_calls},
                          {"forced_finish", r.forced_finish}};
      trace << j.dump() << '\n';
    }
  }
  return 0;
}

int cmd_bench(const KeyValueConfig& kv) {
  const hrt::Model model = hrt::Model::load(require(kv, "checkpoint"));
  const hrt::Vocabulary vocab = hrt::Vocabulary::load(require(kv, "vocab"));
  const auto sources = hrt::load_sentences(require(kv, "input"), vocab);
  hrt::bench::BenchOptions o;
  o.mode = hrt::bench::parse_decode_mode(kv.get_string("mode", "hrt"));
  o.decode = decode_options(kv);
  o.runs = static_cast<std::size_t>(kv.get_int("runs", 5));
  o.warmup = static_cast<std::size_t>(kv.get_int("warmup", 10));
  o.dataset = kv.get_string("dataset", kv.get_string("input", "corpus"));
  const hrt::bench::BenchReport r = hrt::bench::measure_wps(model, sources, o);

  std::ofstream jsonl;
  if (auto p = kv.get("out")) {
    jsonl.open(*p, std::ios::app);
    if (!jsonl) throw std::runtime_error("cannot write " + *p);
    for (std::size_t i = 0; i < r.runs.size(); ++i) jsonl << r.run_json(i).dump() << '\n';
  }
  std::cout << std::left << std::setw(6) << "run" << std::setw(12) << "seconds" << std::setw(12) << "wps"
            << "latency_ms\n";
  for (std::size_t i = 0; i < r.runs.size(); ++i) {
    std::cout << std::setw(6) << i << std::setw(12) << std::fixed << std::setprecision(3) << r.runs[i].seconds
              << std::setw(12) << std::setprecision(1) << r.runs[i].wps << std::setprecision(3)
              << r.runs[i].latency_ms << '\n';
  }
  std::cout << r.to_json().dump() << '\n';
  if (jsonl.is_open()) jsonl << r.to_json().dump() << '\n';
  return 0;
}

std::vector<std::vector<std::string>> read_tokenized(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::vector<std::string>> out;
  for (std::string line; std::getline(in, line);) {
    std::istringstream is(line);
    std::vector<std::string> toks;
    for (std::string t; is >> t;) toks.push_back(t);
    out.push_back(std::move(toks));
  }
  return out;
}

int cmd_eval(const KeyValueConfig& kv) {
  const auto hyp = read_tokenized(require(kv, "hyp"));
  const auto ref = read_tokenized(require(kv, "ref"));
  const hrt::bench::BleuResult b = hrt::bench::bleu(hyp, ref);
  std::size_t exact = 0;
  for (std::size_t i = 0; i < hyp.size(); ++i) exact += hyp[i] == ref[i];
  std::cout << std::fixed << std::setprecision(2) << b.score << '\n';
  std::cerr << "BLEU " << b.score << "  BP " << std::setprecision(4) << b.brevity_penalty << "  exact "
            << std::setprecision(2) << 100.0 * static_cast<double>(exact) / static_cast<double>(hyp.size()) << "%\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
#if defined(__GLIBC__)
  // Training allocates and frees the same large buffers every step; keep them off mmap.
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
  CLI::App app{"Hybrid-regressive translation toolkit"};
  app.require_subcommand(1);
  std::map<CLI::App*, std::pair<Settings, int (*)(const KeyValueConfig&)>> commands;
  auto sub = [&](const char* name, const char* help, int (*fn)(const KeyValueConfig&)) {
    CLI::App* c = app.add_subcommand(name, help);
    commands[c] = {Settings{}, fn};
    add_common(c, commands[c].first);
    return std::pair<CLI::App*, Settings*>{c, &commands[c].first};
  };

  auto [gen, gs] = sub("generate", "write a synthetic corpus", cmd_generate);
  add_key(gen, *gs, "--task", "task", "copy, reverse or mapped-swap");
  add_key(gen, *gs, "--pairs", "pairs", "number of pairs");
  add_key(gen, *gs, "--min-len", "min_len", "shortest sentence");
  add_key(gen, *gs, "--max-sent-len", "max_sent_len", "longest sentence");
  add_key(gen, *gs, "--vocab-size", "vocab_size", "total vocabulary size, specials included");
  add_key(gen, *gs, "--task-seed", "task_seed", "seed of the mapped-swap rule");
  add_key(gen, *gs, "--swap-prob", "swap_prob", "mapped-swap trigger probability");
  add_switch(gen, *gs, "--identity-map", "identity_map", "use the identity token map");
  add_key(gen, *gs, "--out", "out", "corpus file to write");
  add_key(gen, *gs, "--vocab-out", "vocab_out", "vocabulary file to write");

  auto [tr, ts] = sub("train", "train a model from scratch", cmd_train);
  add_train_keys(tr, *ts);
  add_model_keys(tr, *ts);

  auto [ft, fs] = sub("finetune", "fine-tune HRT from an AT checkpoint", cmd_finetune);
  add_train_keys(ft, *fs);
  add_key(ft, *fs, "--at-checkpoint", "at_checkpoint", "pre-trained AT checkpoint");

  auto [ds, dss] = sub("distill", "replace targets by teacher beam search", cmd_distill);
  add_key(ds, *dss, "--checkpoint", "checkpoint", "teacher checkpoint");
  add_key(ds, *dss, "--corpus", "corpus", "corpus to distill");
  add_key(ds, *dss, "--vocab", "vocab", "vocabulary file");
  add_key(ds, *dss, "--beam", "beam", "beam size");
  add_key(ds, *dss, "--length-penalty", "length_penalty", "length penalty exponent");
  add_key(ds, *dss, "--out", "out", "distilled corpus to write");

  auto [tl, tls] = sub("translate", "decode sentences", cmd_translate);
  add_decode_keys(tl, *tls);
  add_key(tl, *tls, "--output", "output", "output file (default stdout)");
  add_key(tl, *tls, "--trace", "trace", "per-sentence JSON-lines trace");

  auto [bn, bs] = sub("bench", "measure words per second", cmd_bench);
  add_decode_keys(bn, *bs);
  add_key(bn, *bs, "--runs", "runs", "timed runs");
  add_key(bn, *bs, "--warmup", "warmup", "untimed warm-up sentences");
  add_key(bn, *bs, "--dataset", "dataset", "dataset label");
  add_key(bn, *bs, "--out", "out", "append JSON lines to this file");

  auto [ev, es] = sub("eval", "corpus BLEU of a hypothesis file", cmd_eval);
  add_key(ev, *es, "--hyp", "hyp", "hypotheses, one per line");
  add_key(ev, *es, "--ref", "ref", "references, one per line");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  for (auto& [cmd, entry] : commands) {
    if (!cmd->parsed()) continue;
    try {
      return entry.second(entry.first.resolve());
    } catch (const CLI::ValidationError& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 2;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 1;
    }
  }
  return 1;
}
