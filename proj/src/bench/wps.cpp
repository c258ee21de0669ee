// Copyright 2026 The HRT Authors
// SPDX-License-Identifier: Apache-2.0

#include "hrt/bench/wps.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace hrt::bench {
namespace {

using Clock = std::chrono::steady_clock;

const DecodeOutcome& run_one(const Model& model, const std::vector<TokenId>& src, const BenchOptions& o,
                             DecodeWorkspace& ws) {
  return o.mode == DecodeMode::at ? at_decode(model, src, o.decode, ws) : hrt_decode(model, src, o.decode, ws);
}

void mean_std(const std::vector<double>& v, double& mean, double& sd) {
  mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
}

}  // namespace

DecodeMode parse_decode_mode(const std::string& name) {
  if (name == "at") return DecodeMode::at;
  if (name == "hrt") return DecodeMode::hrt;
  throw std::invalid_argument("unknown decode mode '" + name + "' (expected at or hrt)");
}

const char* to_string(DecodeMode mode) { return mode == DecodeMode::at ? "at" : "hrt"; }

double BenchReport::calls_per_sentence() const {
  return sentences ? static_cast<double>(decoder_calls) / static_cast<double>(sentences) : 0.0;
}

nlohmann::json BenchReport::run_json(std::size_t run) const {
  const RunStats& r = runs.at(run);
  return {{"dataset", dataset}, {"mode", mode}, {"k", k}, {"run", run}, {"seconds", r.seconds}, {"wps", r.wps},
          {"latency_ms", r.latency_ms}};
}

nlohmann::json BenchReport::to_json() const {
  nlohmann::json per_run = nlohmann::json::array();
  for (std::size_t i = 0; i < runs.size(); ++i) per_run.push_back(run_json(i));
  return {{"dataset", dataset},
          {"mode", mode},
          {"k", k},
          {"b_at", b_at},
          {"b_nat", b_nat},
          {"sentences", sentences},
          {"source_words", source_words},
          {"output_tokens", output_tokens},
          {"decoder_calls", decoder_calls},
          {"calls_per_sentence", calls_per_sentence()},
          {"runs", runs.size()},
          {"wps_mean", wps_mean},
          {"wps_std", wps_std},
          {"latency_ms_mean", latency_ms_mean},
          {"latency_ms_std", latency_ms_std},
          {"per_run", per_run}};
}

BenchReport measure_wps(const Model& model, const std::vector<std::vector<TokenId>>& sources,
                        const BenchOptions& options) {
  if (sources.empty()) throw std::invalid_argument("benchmark corpus is empty");
  if (options.runs == 0) throw std::invalid_argument("benchmark needs at least one run");
  const DecodeOptions& d = options.decode;
  const std::size_t L = d.max_len ? d.max_len : model.config().max_len;
  DecodeWorkspace ws(estimate_max_bytes(model.config(), L, d.k, d.b_at, d.b_nat));

  BenchReport report;
  report.dataset = options.dataset;
  report.mode = to_string(options.mode);
  report.k = options.mode == DecodeMode::hrt ? d.k : 0;
  report.b_at = d.b_at;
  report.b_nat = options.mode == DecodeMode::hrt ? d.b_nat : 1;
  report.sentences = sources.size();
  for (const auto& s : sources) report.source_words += s.size();

  for (std::size_t i = 0; i < options.warmup; ++i) run_one(model, sources[i % sources.size()], options, ws);

  std::vector<double> wps, lat;
  for (std::size_t run = 0; run < options.runs; ++run) {
    std::size_t calls = 0, out_tokens = 0;
    const auto t0 = Clock::now();
    for (const auto& s : sources) {
      const DecodeOutcome& out = run_one(model, s, options, ws);
      calls += out.decoder_calls;
      out_tokens += out.tokens.size();
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    if (run == 0) {
      report.decoder_calls = calls;
      report.output_tokens = out_tokens;
    }
    RunStats r;
    r.seconds = secs;
    r.wps = static_cast<double>(report.source_words) / secs;
    r.latency_ms = 1000.0 * secs / static_cast<double>(sources.size());
    report.runs.push_back(r);
    wps.push_back(r.wps);
    lat.push_back(r.latency_ms);
  }
  mean_std(wps, report.wps_mean, report.wps_std);
  mean_std(lat, report.latency_ms_mean, report.latency_ms_std);
  return report;
}

}  // namespace hrt::bench
