// Copyright 2026 the s2s-stream authors
//
// Licensed under the Apache License, Version 2.0

#include "s2s/corpus.hpp"

#include <cstdio>
#include <filesystem>

namespace s2s {
namespace {

// The dictionary must be identical for every caller, so its randomness is
// pinned independently of corpus seeds.
constexpr std::uint64_t kDictionarySeed = 0x53325344u;  // arbitrary, frozen

}  // namespace

SignalDictionary make_dictionary(int vocab, int feat_dim, double pair_mix) {
  if (vocab < 1 || feat_dim < vocab + 2)
    throw ConfigError("dictionary needs feat_dim >= vocab + 2 orthogonal directions");
  if (pair_mix < 0.0 || pair_mix > 1.0) throw ConfigError("pair_mix must lie in [0, 1]");
  Rng rng(kDictionarySeed);
  Matrix raw = rng.gaussian_matrix(vocab + 2, feat_dim);
  // Gram-Schmidt; draws are continuous so degeneracy has probability zero,
  // but guard anyway.
  for (Index r = 0; r < raw.rows(); ++r) {
    for (Index p = 0; p < r; ++p) raw.row(r) -= raw.row(r).dot(raw.row(p)) * raw.row(p);
    const double norm = raw.row(r).norm();
    if (norm < 1e-8) throw ConfigError("degenerate dictionary draw");
    raw.row(r) /= norm;
  }
  SignalDictionary dict;
  dict.silence = raw.row(0).transpose();
  dict.boundary = raw.row(1).transpose();
  const Matrix basis = raw.bottomRows(vocab);
  dict.content = basis;
  const double keep = std::sqrt(1.0 - pair_mix * pair_mix);
  for (Index k = 0; k + 1 < static_cast<Index>(vocab); k += 2) {
    dict.content.row(k) = keep * basis.row(k) + pair_mix * basis.row(k + 1);
    dict.content.row(k + 1) = keep * basis.row(k) - pair_mix * basis.row(k + 1);
  }
  return dict;
}

void CorpusSpec::validate() const {
  if (vocab < 1) throw ConfigError("vocab must be positive");
  if (feat_dim < vocab + 2) throw ConfigError("feat_dim must be at least vocab + 2");
  if (frame_period_ms <= 0.0) throw ConfigError("frame_period_ms must be positive");
  if (downsample < 1) throw ConfigError("downsample must be positive");
  if (utterances < 1) throw ConfigError("utterances must be positive");
  if (min_tokens < 1 || max_tokens < min_tokens) throw ConfigError("bad token count range");
  if (min_token_frames < 2 || max_token_frames < min_token_frames)
    throw ConfigError("token spans need at least 2 encoder frames");
  if (min_lead_frames < 1 || max_lead_frames < min_lead_frames)
    throw ConfigError("bad lead silence range");
  if (trail_frames < 2) throw ConfigError("trailing silence needs at least 2 encoder frames");
  if (noise_sigma < 0.0) throw ConfigError("noise_sigma must be non-negative");
}

SyntheticUtterance synthesize_utterance(const CorpusSpec& spec, const SignalDictionary& dict,
                                        const std::vector<int>& tokens,
                                        const std::vector<int>& token_frames, int lead_frames,
                                        Rng* noise_rng, const std::string& utt_id) {
  spec.validate();
  if (dict.vocab() != spec.vocab || dict.feat_dim() != spec.feat_dim)
    throw ConfigError("dictionary does not match the corpus spec");
  if (tokens.size() != token_frames.size())
    throw ConfigError("one span length per token required");
  for (int tok : tokens)
    if (tok < 0 || tok >= spec.vocab) throw ConfigError("token id out of range");
  for (int s : token_frames)
    if (s < 1) throw ConfigError("token spans need at least 1 encoder frame");
  if (lead_frames < 1) throw ConfigError("lead silence needs at least 1 encoder frame");

  // Lay out the utterance on the encoder-frame grid, then expand to input
  // frames. Every encoder frame covers `downsample` input frames.
  int total_enc = lead_frames + spec.trail_frames;
  for (int s : token_frames) total_enc += s;
  const int ds = spec.downsample;
  const Index t_in = static_cast<Index>(total_enc) * ds;

  SyntheticUtterance utt;
  utt.utt_id = utt_id;
  utt.features.frame_period_ms = spec.frame_period_ms;
  utt.features.frames = Matrix::Zero(t_in, spec.feat_dim);
  utt.duration_ms = static_cast<double>(t_in) * spec.frame_period_ms;

  const double enc_ms = spec.encoder_frame_ms();
  std::vector<int> onset_frames;  // encoder frames carrying the boundary marker
  int cursor = lead_frames;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const int span = token_frames[i];
    onset_frames.push_back(cursor);
    utt.alignment.push_back({static_cast<double>(cursor) * enc_ms,
                             static_cast<double>(cursor + span) * enc_ms});
    for (Index t = static_cast<Index>(cursor) * ds; t < static_cast<Index>(cursor + span) * ds; ++t)
      utt.features.frames.row(t) += spec.content_gain * dict.content.row(tokens[i]);
    cursor += span;
  }
  onset_frames.push_back(cursor);  // the trailing-silence onset is marked too
  // Silence signature outside token spans.
  for (Index t = 0; t < static_cast<Index>(lead_frames) * ds; ++t)
    utt.features.frames.row(t) += spec.silence_gain * dict.silence.transpose();
  for (Index t = static_cast<Index>(cursor) * ds; t < t_in; ++t)
    utt.features.frames.row(t) += spec.silence_gain * dict.silence.transpose();
  // Boundary marker: exactly one encoder frame (ds input frames) per onset.
  for (int f : onset_frames)
    for (Index t = static_cast<Index>(f) * ds; t < static_cast<Index>(f + 1) * ds; ++t)
      utt.features.frames.row(t) += spec.boundary_gain * dict.boundary.transpose();
  // Noise, orthogonalized against the boundary marker so onset counts are
  // exact at any noise level.
  if (noise_rng != nullptr && spec.noise_sigma > 0.0) {
    for (Index t = 0; t < t_in; ++t) {
      Vector g = noise_rng->gaussian_vector(spec.feat_dim);
      g -= g.dot(dict.boundary) * dict.boundary;
      utt.features.frames.row(t) += spec.noise_sigma * g.transpose();
    }
  }
  utt.tokens = tokens;
  return utt;
}

SyntheticUtterance generate_utterance(const CorpusSpec& spec, const SignalDictionary& dict,
                                      Rng& rng, int index) {
  spec.validate();
  const int n_tokens = static_cast<int>(rng.uniform_int(spec.min_tokens, spec.max_tokens));
  const int lead = static_cast<int>(rng.uniform_int(spec.min_lead_frames, spec.max_lead_frames));
  std::vector<int> tokens(static_cast<std::size_t>(n_tokens));
  std::vector<int> spans(static_cast<std::size_t>(n_tokens));
  for (int i = 0; i < n_tokens; ++i) {
    tokens[static_cast<std::size_t>(i)] = static_cast<int>(rng.uniform_int(0, spec.vocab - 1));
    spans[static_cast<std::size_t>(i)] =
        static_cast<int>(rng.uniform_int(spec.min_token_frames, spec.max_token_frames));
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "utt%04d", index);
  return synthesize_utterance(spec, dict, tokens, spans, lead, &rng, buf);
}

std::vector<SyntheticUtterance> generate_corpus(const CorpusSpec& spec) {
  spec.validate();
  const SignalDictionary dict = make_dictionary(spec.vocab, spec.feat_dim);
  Rng rng(spec.seed);
  std::vector<SyntheticUtterance> utts;
  utts.reserve(static_cast<std::size_t>(spec.utterances));
  for (int i = 0; i < spec.utterances; ++i) utts.push_back(generate_utterance(spec, dict, rng, i));
  return utts;
}

std::vector<ManifestEntry> write_corpus(const std::string& dir,
                                        const std::vector<SyntheticUtterance>& utts) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(dir) / "features");
  std::vector<ManifestEntry> entries;
  entries.reserve(utts.size());
  for (const SyntheticUtterance& u : utts) {
    const std::string rel = "features/" + u.utt_id + ".s2sf";
    save_features((fs::path(dir) / rel).string(), u.features);
    ManifestEntry e;
    e.utt_id = u.utt_id;
    e.feature_path = rel;
    e.duration_ms = u.duration_ms;
    e.tokens = u.tokens;
    e.alignment = u.alignment;
    entries.push_back(std::move(e));
  }
  save_manifest((fs::path(dir) / "manifest.tsv").string(), entries);
  return entries;
}

}  // namespace s2s
