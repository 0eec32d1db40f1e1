// Copyright 2026 the s2s-stream authors
// Stream simulation: replays an utterance against the incremental encoder and
// the prefix-committing search on a fixed tick clock, and sweeps decoding
// settings over a corpus into CSV reports.
//
// Licensed under the Apache License, Version 2.0

#pragma once

#include <string>
#include <vector>

#include "s2s/corpus.hpp"
#include "s2s/metrics.hpp"
#include "s2s/model.hpp"
#include "s2s/search.hpp"

namespace s2s {

struct RunConfig {
  double tick_ms = 250.0;  // simulated audio arrives in ticks of this size
  SearchConfig search;

  void validate() const;
};

struct StreamResult {
  std::string utt_id;
  std::vector<int> transcript;  // committed tokens, sentinels excluded
  CommitLog log;
  double duration_ms = 0.0;
  // wer/latency against the reference; latency of an empty transcript is
  // reported as 1.0 (nothing arrived before close).
  LatencyReport report;
};

StreamResult run_stream(const ModelParams& model, const FeatureSequence& feats,
                        const std::vector<int>& reference, const RunConfig& cfg,
                        const std::string& utt_id);

// Single-shot decode over the fully closed stream.
std::vector<int> offline_decode(const ModelParams& model, const FeatureSequence& feats,
                                const SearchConfig& cfg);

// Line-delimited commit log: stream_time_ms \t token_id \t strategy_tag
std::string format_commit_log(const CommitLog& log);
CommitLog parse_commit_log(const std::string& text);

// Corpus rows as the simulator consumes them.
struct UtteranceData {
  std::string utt_id;
  FeatureSequence features;
  std::vector<int> reference;
  std::vector<AlignmentSpan> alignment;
  double duration_ms = 0.0;
};

UtteranceData from_synthetic(const SyntheticUtterance& u);
std::vector<UtteranceData> load_utterances(const std::string& dir);

struct SweepSetting {
  CommitStrategy strategy = CommitStrategy::kOffline;
  int beam = 8;
  double delta_immortal = std::numeric_limits<double>::infinity();
  double delta_first_ranked = std::numeric_limits<double>::infinity();
};

// The `delta` report column: the active delta, or "imm-fr" for combined.
std::string delta_label(const SweepSetting& s);

struct SweepRow {
  std::string utt_id;  // "ALL" for the per-setting corpus summary
  std::string strategy;
  int beam = 0;
  std::string delta;
  double wer = 0.0;
  double latency = 0.0;
};

// One row per (utterance, setting) plus one pooled summary row per setting
// (corpus WER pools edits over pooled reference length; latency averages the
// per-utterance values).
std::vector<SweepRow> run_sweep(const ModelParams& model, const std::vector<UtteranceData>& utts,
                                const std::vector<SweepSetting>& settings, const RunConfig& base);

std::string to_csv(const std::vector<SweepRow>& rows);

}  // namespace s2s
