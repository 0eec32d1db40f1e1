// Copyright 2026 the s2s-stream authors
// Synthetic utterance generator: each token paints an orthogonal content
// signature into the features, token onsets carry a boundary marker, and
// silence has its own signature. Noise is drawn orthogonal to the boundary
// marker so onset counts stay exact at any noise level.
//
// Licensed under the Apache License, Version 2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "s2s/encoder.hpp"
#include "s2s/rng.hpp"
#include "s2s/tensor_io.hpp"
#include "s2s/types.hpp"

namespace s2s {

// Signal directions shared by the generator and the constructed model. Built
// deterministically from a fixed internal seed, so the two sides always
// agree. Content rows are unit vectors, but consecutive pairs (2k, 2k+1)
// share most of their direction: their dot product is 1 - 2 * pair_mix^2,
// which makes within-pair substitutions the dominant confusion under noise.
struct SignalDictionary {
  Vector silence;   // feat_dim
  Vector boundary;  // feat_dim
  Matrix content;   // vocab x feat_dim, one row per token

  Index feat_dim() const { return silence.size(); }
  Index vocab() const { return content.rows(); }
};

inline constexpr double kDefaultPairMix = 0.45;

SignalDictionary make_dictionary(int vocab, int feat_dim, double pair_mix = kDefaultPairMix);

struct CorpusSpec {
  int vocab = 32;
  int feat_dim = 40;
  double frame_period_ms = 10.0;
  int downsample = 4;  // all span edges snap to downsample * frame_period_ms
  int utterances = 100;
  int min_tokens = 2;
  int max_tokens = 10;
  int min_token_frames = 5;    // per-token length in encoder frames
  int max_token_frames = 12;
  int min_lead_frames = 2;     // leading silence, encoder frames
  int max_lead_frames = 5;
  int trail_frames = 10;       // trailing silence, encoder frames
  double noise_sigma = 0.62;
  double content_gain = 1.0;
  double boundary_gain = 1.0;
  double silence_gain = 1.0;
  std::uint64_t seed = 1;

  void validate() const;
  double encoder_frame_ms() const { return frame_period_ms * downsample; }
};

struct SyntheticUtterance {
  std::string utt_id;
  FeatureSequence features;
  std::vector<int> tokens;
  std::vector<AlignmentSpan> alignment;  // ms, one span per token
  double duration_ms = 0.0;
};

// Deterministic layout: paints the given tokens (with per-token span lengths
// in encoder frames) onto the grid. Noise is added only when noise_rng is
// non-null and the spec's sigma is positive.
SyntheticUtterance synthesize_utterance(const CorpusSpec& spec, const SignalDictionary& dict,
                                        const std::vector<int>& tokens,
                                        const std::vector<int>& token_frames, int lead_frames,
                                        Rng* noise_rng, const std::string& utt_id);

SyntheticUtterance generate_utterance(const CorpusSpec& spec, const SignalDictionary& dict,
                                      Rng& rng, int index);

std::vector<SyntheticUtterance> generate_corpus(const CorpusSpec& spec);

// Writes feature containers plus manifest.tsv under `dir` and returns the
// manifest entries (feature paths are relative to `dir`).
std::vector<ManifestEntry> write_corpus(const std::string& dir,
                                        const std::vector<SyntheticUtterance>& utts);

}  // namespace s2s
