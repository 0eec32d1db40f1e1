// Copyright 2026 the s2s-stream authors
// Hand-constructed weights for the synthetic corpus: the encoder counts
// boundary markers into position-step channels and smooths content
// signatures; the decoder tracks its position with a shift register, aims an
// attention bump at the span of the position it is about to emit, and reads
// the token identity out of the attended content channels.
//
// Licensed under the Apache License, Version 2.0

#pragma once

#include "s2s/corpus.hpp"
#include "s2s/model.hpp"

namespace s2s {

struct ToyModelSpec {
  EncoderPolicy policy = EncoderPolicy::kChunked;
  int chunk_size = 20;  // encoder frames
  BackwardInit backward_init = BackwardInit::kConstant;
  int vocab = 32;
  int feat_dim = 40;
  double frame_period_ms = 10.0;
  int downsample = 4;
  int max_positions = 40;
  // Must match the corpus the model will read.
  double content_gain = 1.0;
  double boundary_gain = 1.0;
  double silence_gain = 1.0;

  void validate() const;
};

// Builds the full model for one encoder policy. Wiring gains that depend on
// clean channel amplitudes are calibrated against a noise-free probe
// utterance, so the build is deterministic but adapts to the policy.
ModelParams build_toy_model(const ToyModelSpec& spec);

}  // namespace s2s
