// Copyright 2026 the s2s-stream authors
//
// Licensed under the Apache License, Version 2.0

#include "s2s/metrics.hpp"

#include <algorithm>

namespace s2s {

namespace {

double clamp_stamp(double t, double total) { return std::min(std::max(t, 0.0), total); }

double mean_normalized(const std::vector<double>& stamps, double total) {
  double sum = 0.0;
  for (double t : stamps) sum += clamp_stamp(t, total);
  return sum / (static_cast<double>(stamps.size()) * total);
}

}  // namespace

double latency(const TokenTimestamps& stamps, double total_duration_s) {
  if (stamps.seconds.empty()) throw InputError("latency: no token timestamps");
  if (!(total_duration_s > 0.0)) throw InputError("latency: non-positive duration");
  return mean_normalized(stamps.seconds, total_duration_s);
}

double ideal_latency(const std::vector<double>& token_end_s, double total_duration_s) {
  if (token_end_s.empty()) throw InputError("ideal_latency: no token end times");
  if (!(total_duration_s > 0.0)) throw InputError("ideal_latency: non-positive duration");
  return mean_normalized(token_end_s, total_duration_s);
}

double shifted_latency(const TokenTimestamps& stamps, double delay_s, double total_duration_s) {
  if (stamps.seconds.empty()) throw InputError("shifted_latency: no token timestamps");
  if (!(total_duration_s > 0.0)) throw InputError("shifted_latency: non-positive duration");
  if (delay_s < 0.0) throw InputError("shifted_latency: negative delay");
  std::vector<double> shifted(stamps.seconds.size());
  for (std::size_t i = 0; i < shifted.size(); ++i) {
    shifted[i] = std::min(stamps.seconds[i] + delay_s, total_duration_s);
  }
  return mean_normalized(shifted, total_duration_s);
}

Index edit_distance(const std::vector<int>& reference, const std::vector<int>& hypothesis) {
  const std::size_t n = reference.size();
  const std::size_t m = hypothesis.size();
  // Single rolling row of the classic DP table.
  std::vector<Index> prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = static_cast<Index>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = static_cast<Index>(i);
    for (std::size_t j = 1; j <= m; ++j) {
      const Index sub = prev[j - 1] + (reference[i - 1] == hypothesis[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

double wer(const std::vector<int>& reference, const std::vector<int>& hypothesis) {
  if (reference.empty()) {
    if (hypothesis.empty()) return 0.0;
    throw InputError("wer: empty reference against non-empty hypothesis");
  }
  return static_cast<double>(edit_distance(reference, hypothesis)) /
         static_cast<double>(reference.size());
}

}  // namespace s2s
