// Copyright 2026 the s2s-stream authors
//
// Licensed under the Apache License, Version 2.0

#include "s2s/decoder.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace s2s {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

DecoderState init_decoder_state(const DecoderParams& params) {
  DecoderState state;
  state.h.reserve(params.layers.size());
  state.c.reserve(params.layers.size());
  for (const RecurrentCellParams& layer : params.layers) {
    state.h.push_back(Vector::Zero(layer.hidden_size()));
    state.c.push_back(Vector::Zero(layer.hidden_size()));
  }
  state.last_token = params.bos_id();
  return state;
}

Vector attention_logits(const Vector& query, const Matrix& enc_states) {
  if (enc_states.rows() == 0) throw InputError("attention over zero encoder frames");
  if (enc_states.cols() != query.size()) {
    throw ShapeError("query width " + std::to_string(query.size()) + " against keys of width " +
                     std::to_string(enc_states.cols()));
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(enc_states.cols()));
  return (enc_states * query) * scale;
}

DecoderState advance_state(const DecoderParams& params, const DecoderState& state, int token) {
  if (token < 0 || token >= params.vocab_total()) {
    throw InputError("token id " + std::to_string(token) + " outside vocabulary of " +
                     std::to_string(params.vocab_total()));
  }
  if (state.h.size() != params.layers.size() || state.c.size() != params.layers.size()) {
    throw ShapeError("decoder state carries " + std::to_string(state.h.size()) +
                     " layers, weights carry " + std::to_string(params.layers.size()));
  }
  DecoderState next = state;
  Vector x = params.embedding.row(token).transpose();
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const CellState s = lstm_cell_step(params.layers[l], x, state.h[l], state.c[l]);
    next.h[l] = s.h;
    next.c[l] = s.c;
    x = s.h;
  }
  next.last_token = token;
  return next;
}

StepOutput readout(const DecoderParams& params, const DecoderState& state, const EncoderStates& enc,
                   Index valid_frames) {
  const Index rows = enc.states.rows();
  if (rows == 0) throw InputError("decode step over empty encoder states");
  const Index valid = valid_frames < 0 ? rows : valid_frames;
  if (valid < 1 || valid > rows) {
    throw InputError("valid frame count " + std::to_string(valid) + " outside [1, " +
                     std::to_string(rows) + "]");
  }
  if (state.h.empty()) throw ShapeError("decoder state has no layers");

  const Vector& emb_out = state.h.back();
  const Vector query = matvec(params.w_query, emb_out);
  Vector logits(rows);
  logits.head(valid) = attention_logits(query, enc.states.topRows(valid));
  logits.tail(rows - valid).setConstant(-kInf);

  StepOutput out;
  out.attention = softmax(logits);
  const Vector ctx = enc.states.topRows(valid).transpose() * out.attention.head(valid);
  const Vector combined = matvec(params.w_context, ctx) + matvec(params.w_embed, emb_out);
  out.log_probs = log_softmax(matvec(params.w_out, combined) + params.b_out);
  out.new_state = state;
  return out;
}

StepOutput decode_step(const DecoderParams& params, const DecoderState& state, int token,
                       const EncoderStates& enc, Index valid_frames) {
  DecoderState advanced = advance_state(params, state, token);
  StepOutput out = readout(params, advanced, enc, valid_frames);
  out.new_state = std::move(advanced);
  return out;
}

}  // namespace s2s
