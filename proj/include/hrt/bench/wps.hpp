// Copyright 2026 The HRT Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "hrt/decoding/decode.hpp"
#include "json.hpp"

namespace hrt::bench {

enum class DecodeMode { at, hrt };

DecodeMode parse_decode_mode(const std::string& name);
const char* to_string(DecodeMode mode);

struct BenchOptions {
  DecodeMode mode = DecodeMode::hrt;
  DecodeOptions decode;
  std::size_t runs = 5;
  std::size_t warmup = 10;  // sentences decoded before timing
  std::string dataset = "corpus";
};

struct RunStats {
  double seconds = 0.0;
  double wps = 0.0;
  double latency_ms = 0.0;  // mean per sentence
};

// Timing protocol: batch size 1, monotonic clock, WPS over source words.
struct BenchReport {
  std::string dataset;
  std::string mode;
  int k = 0;
  std::size_t b_at = 1;
  std::size_t b_nat = 1;
  std::size_t sentences = 0;
  std::size_t source_words = 0;
  std::size_t output_tokens = 0;
  std::size_t decoder_calls = 0;  // per run
  std::vector<RunStats> runs;
  double wps_mean = 0.0;
  double wps_std = 0.0;
  double latency_ms_mean = 0.0;
  double latency_ms_std = 0.0;

  double calls_per_sentence() const;
  nlohmann::json to_json() const;
  nlohmann::json run_json(std::size_t run) const;
};

// Throws std::invalid_argument for an empty corpus or zero runs.
BenchReport measure_wps(const Model& model, const std::vector<std::vector<TokenId>>& sources,
                        const BenchOptions& options);

}  // namespace hrt::bench
