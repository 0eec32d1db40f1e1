// Copyright 2026 the s2s-stream authors
// Bundled model: configuration, encoder weights, decoder weights.
//
// Licensed under the Apache License, Version 2.0

#pragma once

#include "s2s/decoder.hpp"
#include "s2s/encoder.hpp"

namespace s2s {

struct ModelConfig {
  EncoderConfig encoder;
  int vocab = 32;  // real tokens; begin/end sentinels are appended after them
  int feat_dim = 40;
  double frame_period_ms = 10.0;
  int max_positions = 40;  // decoder position capacity of the constructed model
  int decoder_hidden = 44;
  int embed_dim = 8;

  int vocab_total() const { return vocab + 2; }
  int bos_id() const { return vocab; }
  int eos_id() const { return vocab + 1; }
  double encoder_frame_ms() const { return frame_period_ms * encoder.downsample; }
};

struct ModelParams {
  ModelConfig config;
  EncoderParams encoder;
  DecoderParams decoder;
};

}  // namespace s2s
