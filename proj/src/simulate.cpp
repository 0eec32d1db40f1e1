// Copyright 2026 the s2s-stream authors
//
// Licensed under the Apache License, Version 2.0

#include "s2s/simulate.hpp"

#include <cmath>
#include <filesystem>
#include <iomanip>
#include <map>
#include <sstream>

namespace s2s {
namespace {

std::string format_delta(double d) {
  if (std::isinf(d)) return "inf";
  std::ostringstream os;
  os << d;
  return os.str();
}

double parse_time(const std::string& s) {
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    throw InputError("malformed commit-log time '" + s + "'");
  }
}

}  // namespace

void RunConfig::validate() const {
  if (!(tick_ms > 0.0)) throw ConfigError("tick_ms must be positive");
  search.validate();
}

StreamResult run_stream(const ModelParams& model, const FeatureSequence& feats,
                        const std::vector<int>& reference, const RunConfig& cfg,
                        const std::string& utt_id) {
  cfg.validate();
  const double fp = feats.frame_period_ms;
  if (!(fp > 0.0)) throw InputError("frame period must be positive");
  const Index total = feats.frames.rows();
  const double duration_ms = static_cast<double>(total) * fp;

  Encoder encoder(model.config.encoder, model.encoder);
  ModelScorer scorer(model.decoder);
  StreamingSearch search(scorer, cfg.search);

  double t = 0.0;
  bool closed = false;
  while (!closed) {
    t += cfg.tick_ms;
    Index avail = static_cast<Index>(std::floor(t / fp + 1e-9));
    if (avail >= total) {
      avail = total;
      closed = true;
    }
    FeatureSequence part;
    part.frames = feats.frames.topRows(avail);
    part.frame_period_ms = fp;
    const EncoderStates& enc = encoder.encode(part, closed);
    search.tick(enc, closed, t);
  }

  StreamResult res;
  res.utt_id = utt_id;
  res.transcript = search.committed();
  res.log = search.log();
  res.duration_ms = duration_ms;
  res.report.utt_id = utt_id;
  res.report.token_count = static_cast<Index>(res.transcript.size());
  res.report.reference_length = static_cast<Index>(reference.size());
  res.report.edit_distance = edit_distance(reference, res.transcript);
  res.report.wer = wer(reference, res.transcript);
  if (res.transcript.empty()) {
    res.report.latency = 1.0;
  } else {
    TokenTimestamps stamps;
    for (const CommitEntry& e : res.log.entries) stamps.seconds.push_back(e.stream_time_ms / 1000.0);
    res.report.latency = latency(stamps, duration_ms / 1000.0);
  }
  return res;
}

std::vector<int> offline_decode(const ModelParams& model, const FeatureSequence& feats,
                                const SearchConfig& cfg) {
  const EncoderStates enc = encode(model.config.encoder, model.encoder, feats, true);
  ModelScorer scorer(model.decoder);
  if (enc.states.rows() == 0) return {};
  const BatchResult batch = batch_beam_search(scorer, enc, cfg);
  std::vector<int> out = batch.best.tokens;
  if (!out.empty() && out.back() == scorer.eos_id()) out.pop_back();
  return out;
}

std::string format_commit_log(const CommitLog& log) {
  std::ostringstream os;
  os << std::setprecision(17);
  for (const CommitEntry& e : log.entries)
    os << e.stream_time_ms << '\t' << e.token << '\t' << e.tag << '\n';
  return os.str();
}

CommitLog parse_commit_log(const std::string& text) {
  CommitLog log;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string time_s, token_s, tag;
    if (!std::getline(ls, time_s, '\t') || !std::getline(ls, token_s, '\t') ||
        !std::getline(ls, tag))
      throw InputError("malformed commit-log line '" + line + "'");
    CommitEntry e;
    e.stream_time_ms = parse_time(time_s);
    try {
      e.token = std::stoi(token_s);
    } catch (const std::exception&) {
      throw InputError("malformed commit-log token '" + token_s + "'");
    }
    e.tag = tag;
    log.entries.push_back(std::move(e));
  }
  return log;
}

UtteranceData from_synthetic(const SyntheticUtterance& u) {
  UtteranceData d;
  d.utt_id = u.utt_id;
  d.features = u.features;
  d.reference = u.tokens;
  d.alignment = u.alignment;
  d.duration_ms = u.duration_ms;
  return d;
}

std::vector<UtteranceData> load_utterances(const std::string& dir) {
  namespace fs = std::filesystem;
  const std::vector<ManifestEntry> entries = load_manifest((fs::path(dir) / "manifest.tsv").string());
  std::vector<UtteranceData> utts;
  utts.reserve(entries.size());
  for (const ManifestEntry& e : entries) {
    UtteranceData d;
    d.utt_id = e.utt_id;
    d.features = load_features((fs::path(dir) / e.feature_path).string());
    d.reference = e.tokens;
    d.alignment = e.alignment;
    d.duration_ms = e.duration_ms;
    utts.push_back(std::move(d));
  }
  return utts;
}

std::string delta_label(const SweepSetting& s) {
  switch (s.strategy) {
    case CommitStrategy::kOffline: return "inf";
    case CommitStrategy::kImmortal: return format_delta(s.delta_immortal);
    case CommitStrategy::kFirstRanked: return format_delta(s.delta_first_ranked);
    case CommitStrategy::kCombined:
      return format_delta(s.delta_immortal) + "-" + format_delta(s.delta_first_ranked);
  }
  throw ConfigError("unknown commit strategy");
}

std::vector<SweepRow> run_sweep(const ModelParams& model, const std::vector<UtteranceData>& utts,
                                const std::vector<SweepSetting>& settings, const RunConfig& base) {
  std::vector<SweepRow> rows;
  for (const SweepSetting& s : settings) {
    RunConfig cfg = base;
    cfg.search.strategy = s.strategy;
    cfg.search.beam_size = s.beam;
    cfg.search.delta_immortal = s.delta_immortal;
    cfg.search.delta_first_ranked = s.delta_first_ranked;
    cfg.validate();
    Index pooled_edits = 0;
    Index pooled_ref = 0;
    double latency_sum = 0.0;
    for (const UtteranceData& u : utts) {
      const StreamResult r = run_stream(model, u.features, u.reference, cfg, u.utt_id);
      SweepRow row;
      row.utt_id = u.utt_id;
      row.strategy = to_string(s.strategy);
      row.beam = s.beam;
      row.delta = delta_label(s);
      row.wer = r.report.wer;
      row.latency = r.report.latency;
      rows.push_back(row);
      pooled_edits += r.report.edit_distance;
      pooled_ref += r.report.reference_length;
      latency_sum += r.report.latency;
    }
    SweepRow all;
    all.utt_id = "ALL";
    all.strategy = to_string(s.strategy);
    all.beam = s.beam;
    all.delta = delta_label(s);
    all.wer = pooled_ref > 0 ? static_cast<double>(pooled_edits) / static_cast<double>(pooled_ref)
                             : 0.0;
    all.latency = utts.empty() ? 0.0 : latency_sum / static_cast<double>(utts.size());
    rows.push_back(all);
  }
  return rows;
}

std::string to_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "utt_id,strategy,beam,delta,wer,latency\n";
  os << std::fixed << std::setprecision(6);
  for (const SweepRow& r : rows)
    os << r.utt_id << ',' << r.strategy << ',' << r.beam << ',' << r.delta << ',' << r.wer << ','
       << r.latency << '\n';
  return os.str();
}

}  // namespace s2s
