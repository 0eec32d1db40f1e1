// Copyright 2026 the s2s-stream authors
// Token-latency and word-error-rate metrics.
//
// Licensed under the Apache License, Version 2.0

#pragma once

#include <string>
#include <vector>

#include "s2s/errors.hpp"
#include "s2s/types.hpp"

namespace s2s {

// Commit timestamps of one utterance's tokens, in seconds from stream start.
struct TokenTimestamps {
  std::vector<double> seconds;
};

struct LatencyReport {
  std::string utt_id;
  double wer = 0.0;
  double latency = 0.0;
  Index token_count = 0;
  Index reference_length = 0;
  Index edit_distance = 0;
};

// Normalized token latency: sum(t_i) / (n * T). Timestamps are clamped to
// [0, T] before averaging; an all-at-close commit pattern scores exactly 1.
// Throws InputError when the timestamp list is empty or T <= 0.
double latency(const TokenTimestamps& stamps, double total_duration_s);

// Latency of an oracle that commits each token the moment its acoustic
// evidence ends; `token_end_s` are per-token end times from a forced
// alignment.
double ideal_latency(const std::vector<double>& token_end_s, double total_duration_s);

// Latency after delaying every commit by `delay_s`, clamped at stream end:
// t_i -> min(t_i + d, T).
double shifted_latency(const TokenTimestamps& stamps, double delay_s, double total_duration_s);

// Minimal edit distance (substitutions + insertions + deletions), unit costs.
Index edit_distance(const std::vector<int>& reference, const std::vector<int>& hypothesis);

// edit_distance / |reference|. A non-empty hypothesis against an empty
// reference throws InputError; empty vs empty is 0.
double wer(const std::vector<int>& reference, const std::vector<int>& hypothesis);

}  // namespace s2s
