// Copyright 2026 the s2s-stream authors
// Acoustic encoders: unidirectional, full bidirectional, and chunked
// bidirectional recurrent stacks over stacked feature frames.
//
// Licensed under the Apache License, Version 2.0

#pragma once

#include <string>
#include <vector>

#include "s2s/errors.hpp"
#include "s2s/kernels.hpp"
#include "s2s/types.hpp"

namespace s2s {

enum class EncoderPolicy { kUnidirectional, kBidirectional, kChunked };

// How the backward recurrence of a chunk is initialized: a constant (zero)
// state, or the backward state left at the previous chunk's first frame.
enum class BackwardInit { kConstant, kPreviousChunk };

std::string to_string(EncoderPolicy p);
std::string to_string(BackwardInit b);
EncoderPolicy encoder_policy_from_string(const std::string& name);
BackwardInit backward_init_from_string(const std::string& name);

struct EncoderConfig {
  EncoderPolicy policy = EncoderPolicy::kBidirectional;
  int layers = 2;
  int hidden = 32;      // per direction
  int downsample = 4;   // consecutive input frames stacked into one encoder frame
  int chunk_size = 20;  // K, in encoder frames (chunked policy only)
  BackwardInit backward_init = BackwardInit::kConstant;

  bool bidirectional() const { return policy != EncoderPolicy::kUnidirectional; }
  Index output_width() const { return bidirectional() ? 2 * hidden : hidden; }
  void validate() const;
};

struct FeatureSequence {
  Matrix frames;  // T_in x D
  double frame_period_ms = 10.0;
};

// Encoder output plus its stability contract: rows with index < stable_upto
// are final and will never change on a later tick.
struct EncoderStates {
  Matrix states;  // T_enc x output_width, T_enc = floor(T_in / downsample)
  Index stable_upto = 0;
  Index input_frames = 0;
};

inline Index stability_horizon(const EncoderStates& s) { return s.stable_upto; }

struct EncoderLayerParams {
  RecurrentCellParams forward;
  RecurrentCellParams backward;  // ignored by the unidirectional policy
};

struct EncoderParams {
  std::vector<EncoderLayerParams> layers;
};

// Incremental encoder instance. Feed cumulatively growing features each tick;
// already-consumed frames are never re-read. Closing the stream finalizes all
// states; feeding more frames after close is an input error.
class Encoder {
 public:
  Encoder(const EncoderConfig& cfg, const EncoderParams& params);

  const EncoderStates& encode(const FeatureSequence& feats, bool stream_closed);
  const EncoderStates& states() const { return out_; }
  const EncoderConfig& config() const { return cfg_; }
  void reset();

 private:
  void append_stacked(const Matrix& frames);
  void run_unidirectional();
  void run_bidirectional(bool closed);
  void run_chunked(bool closed);
  // Runs one layer stack over `input` rows; fwd/bwd are in-out carry states.
  Matrix run_layer(Index layer, const Matrix& input, CellState& fwd, CellState& bwd,
                   CellState* bwd_final) const;

  EncoderConfig cfg_;
  const EncoderParams& params_;
  Matrix stacked_;  // T_enc x (D * downsample)
  EncoderStates out_;
  bool closed_ = false;

  // Unidirectional incremental state: per-layer output rows and carries.
  std::vector<Matrix> uni_out_;
  std::vector<CellState> uni_carry_;
  // Chunked incremental state: carries advance only at completed-chunk
  // boundaries; the trailing partial chunk is provisional.
  std::vector<CellState> chunk_fwd_carry_;
  std::vector<CellState> chunk_bwd_carry_;
  Index finalized_rows_ = 0;
};

// One-shot batch encode.
EncoderStates encode(const EncoderConfig& cfg, const EncoderParams& params,
                     const FeatureSequence& feats, bool stream_closed = true);

}  // namespace s2s
