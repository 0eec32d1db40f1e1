// Copyright 2026 the s2s-stream authors
// Token-embedding recurrence, soft attention over encoder states, and the
// output distribution head.
//
// Licensed under the Apache License, Version 2.0

#pragma once

#include <vector>

#include "s2s/encoder.hpp"
#include "s2s/errors.hpp"
#include "s2s/kernels.hpp"
#include "s2s/types.hpp"

namespace s2s {

// Token ids: [0, vocab) are real tokens, then the begin sentinel, then the
// end sentinel (vocab_total = vocab + 2).
struct DecoderParams {
  Matrix embedding;                        // vocab_total x embed_dim
  std::vector<RecurrentCellParams> layers;  // stacked unidirectional cells
  Matrix w_query;    // enc_width x top_hidden; query = w_query * emb_out
  Matrix w_context;  // combine_width x enc_width
  Matrix w_embed;    // combine_width x top_hidden
  Matrix w_out;      // vocab_total x combine_width
  Vector b_out;      // vocab_total

  Index vocab_total() const { return embedding.rows(); }
  int bos_id() const { return static_cast<int>(vocab_total()) - 2; }
  int eos_id() const { return static_cast<int>(vocab_total()) - 1; }
  Index top_hidden() const { return layers.empty() ? 0 : layers.back().hidden_size(); }
};

// Recurrent decoder state. The embedding recurrence depends only on the token
// history, never on encoder frames, so a state stays valid while the encoder
// frontier grows.
struct DecoderState {
  std::vector<Vector> h;
  std::vector<Vector> c;
  int last_token = -1;
};

struct StepOutput {
  Vector log_probs;  // vocab_total, log-normalized
  Vector attention;  // one weight per encoder frame; masked frames are exactly 0
  DecoderState new_state;
};

DecoderState init_decoder_state(const DecoderParams& params);

// Scaled dot-product scores of one query against every encoder frame:
// logits[t] = (query . enc[t]) / sqrt(enc_width).
Vector attention_logits(const Vector& query, const Matrix& enc_states);

// Advances only the embedding recurrence with `token` (no attention).
DecoderState advance_state(const DecoderParams& params, const DecoderState& state, int token);

// Attention + output distribution for the next position, reading an already
// advanced state. Frames at index >= valid_frames (when >= 0) are masked out
// of the attention entirely.
StepOutput readout(const DecoderParams& params, const DecoderState& state,
                   const EncoderStates& enc, Index valid_frames = -1);

// One full decode step: consume `token`, attend over `enc`, emit the
// log-probability distribution of the following token.
StepOutput decode_step(const DecoderParams& params, const DecoderState& state, int token,
                       const EncoderStates& enc, Index valid_frames = -1);

}  // namespace s2s
