// Copyright 2026 the s2s-stream authors
//
// Licensed under the Apache License, Version 2.0

#include "s2s/encoder.hpp"

#include <algorithm>
#include <string>

namespace s2s {

namespace {

CellState zero_state(Index hidden) {
  return CellState{Vector::Zero(hidden), Vector::Zero(hidden)};
}

}  // namespace

void EncoderConfig::validate() const {
  if (layers < 1) throw ConfigError("encoder needs at least one layer");
  if (hidden < 1) throw ConfigError("encoder hidden size must be positive");
  if (downsample < 1) throw ConfigError("downsample factor must be positive");
  if (policy == EncoderPolicy::kChunked && chunk_size < 1) {
    throw ConfigError("chunk size must be positive");
  }
}

Encoder::Encoder(const EncoderConfig& cfg, const EncoderParams& params)
    : cfg_(cfg), params_(params) {
  cfg_.validate();
  if (static_cast<int>(params.layers.size()) != cfg_.layers) {
    throw ConfigError("encoder weights carry " + std::to_string(params.layers.size()) +
                      " layers, config says " + std::to_string(cfg_.layers));
  }
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const EncoderLayerParams& lp = params.layers[l];
    if (lp.forward.hidden_size() != cfg_.hidden) {
      throw ConfigError("layer " + std::to_string(l) + " forward hidden size mismatch");
    }
    if (l > 0 && lp.forward.input_size() != cfg_.output_width()) {
      throw ConfigError("layer " + std::to_string(l) + " input width mismatch");
    }
    if (cfg_.bidirectional()) {
      if (lp.backward.hidden_size() != cfg_.hidden ||
          lp.backward.input_size() != lp.forward.input_size()) {
        throw ConfigError("layer " + std::to_string(l) + " backward shape mismatch");
      }
    }
  }
  reset();
}

void Encoder::reset() {
  stacked_.resize(0, 0);
  out_ = EncoderStates{Matrix(0, cfg_.output_width()), 0, 0};
  closed_ = false;
  uni_out_.assign(cfg_.layers, Matrix(0, cfg_.hidden));
  uni_carry_.assign(cfg_.layers, zero_state(cfg_.hidden));
  chunk_fwd_carry_.assign(cfg_.layers, zero_state(cfg_.hidden));
  chunk_bwd_carry_.assign(cfg_.layers, zero_state(cfg_.hidden));
  finalized_rows_ = 0;
}

const EncoderStates& Encoder::encode(const FeatureSequence& feats, bool stream_closed) {
  if (closed_) {
    if (!stream_closed || feats.frames.rows() != out_.input_frames) {
      throw InputError("encoder fed after stream close");
    }
    return out_;
  }
  if (feats.frames.rows() < out_.input_frames) {
    throw InputError("cumulative feature stream shrank from " +
                     std::to_string(out_.input_frames) + " to " +
                     std::to_string(feats.frames.rows()) + " frames");
  }
  append_stacked(feats.frames);
  out_.input_frames = feats.frames.rows();
  switch (cfg_.policy) {
    case EncoderPolicy::kUnidirectional: run_unidirectional(); break;
    case EncoderPolicy::kBidirectional: run_bidirectional(stream_closed); break;
    case EncoderPolicy::kChunked: run_chunked(stream_closed); break;
  }
  closed_ = stream_closed;
  return out_;
}

void Encoder::append_stacked(const Matrix& frames) {
  const Index ds = cfg_.downsample;
  const Index t_total = frames.rows() / ds;  // incomplete trailing groups stay buffered
  const Index have = stacked_.rows();
  if (t_total <= have) return;

  const Index feat_dim = frames.cols();
  const Index width = feat_dim * ds;
  if (have == 0 && stacked_.cols() != width) {
    stacked_.resize(0, width);
    if (params_.layers[0].forward.input_size() != width) {
      throw ConfigError("layer 0 expects input width " +
                        std::to_string(params_.layers[0].forward.input_size()) + ", features give " +
                        std::to_string(width));
    }
  }
  if (stacked_.cols() != width) throw InputError("feature dimensionality changed mid-stream");

  stacked_.conservativeResize(t_total, width);
  for (Index j = have; j < t_total; ++j) {
    for (Index k = 0; k < ds; ++k) {
      stacked_.block(j, k * feat_dim, 1, feat_dim) = frames.row(j * ds + k);
    }
  }
}

Matrix Encoder::run_layer(Index layer, const Matrix& input, CellState& fwd, CellState& bwd,
                          CellState* bwd_final) const {
  const Index n = input.rows();
  const Index hidden = cfg_.hidden;
  const EncoderLayerParams& lp = params_.layers[layer];
  Matrix out(n, cfg_.output_width());
  for (Index t = 0; t < n; ++t) {
    const Vector x = input.row(t).transpose();
    fwd = lstm_cell_step(lp.forward, x, fwd.h, fwd.c);
    out.row(t).head(hidden) = fwd.h.transpose();
  }
  if (cfg_.bidirectional()) {
    CellState b = bwd;
    for (Index t = n - 1; t >= 0; --t) {
      const Vector x = input.row(t).transpose();
      b = lstm_cell_step(lp.backward, x, b.h, b.c);
      out.row(t).segment(hidden, hidden) = b.h.transpose();
    }
    if (bwd_final != nullptr) *bwd_final = b;
  }
  return out;
}

void Encoder::run_unidirectional() {
  for (Index l = 0; l < cfg_.layers; ++l) {
    const Matrix& src = l == 0 ? stacked_ : uni_out_[l - 1];
    const Index done = uni_out_[l].rows();
    if (src.rows() <= done) continue;
    uni_out_[l].conservativeResize(src.rows(), cfg_.hidden);
    const EncoderLayerParams& lp = params_.layers[l];
    for (Index t = done; t < src.rows(); ++t) {
      const Vector x = src.row(t).transpose();
      uni_carry_[l] = lstm_cell_step(lp.forward, x, uni_carry_[l].h, uni_carry_[l].c);
      uni_out_[l].row(t) = uni_carry_[l].h.transpose();
    }
  }
  out_.states = uni_out_.back();
  out_.stable_upto = out_.states.rows();
}

void Encoder::run_bidirectional(bool closed) {
  Matrix cur = stacked_;
  for (Index l = 0; l < cfg_.layers; ++l) {
    CellState fwd = zero_state(cfg_.hidden);
    CellState bwd = zero_state(cfg_.hidden);
    cur = run_layer(l, cur, fwd, bwd, nullptr);
  }
  if (cur.cols() != cfg_.output_width()) cur.resize(stacked_.rows(), cfg_.output_width());
  out_.states = cur;
  out_.stable_upto = closed ? out_.states.rows() : 0;
}

void Encoder::run_chunked(bool closed) {
  const Index k = cfg_.chunk_size;
  const Index t_total = stacked_.rows();
  const Index target = closed ? t_total : (t_total / k) * k;

  out_.states.conservativeResize(t_total, cfg_.output_width());

  // Newly completed chunks become final; carries advance with them.
  while (finalized_rows_ < target) {
    const Index a = finalized_rows_;
    const Index b = std::min(a + k, target);
    Matrix cur = stacked_.middleRows(a, b - a);
    for (Index l = 0; l < cfg_.layers; ++l) {
      CellState fwd = chunk_fwd_carry_[l];
      CellState bwd = cfg_.backward_init == BackwardInit::kPreviousChunk ? chunk_bwd_carry_[l]
                                                                         : zero_state(cfg_.hidden);
      CellState bwd_final;
      cur = run_layer(l, cur, fwd, bwd, &bwd_final);
      chunk_fwd_carry_[l] = fwd;
      chunk_bwd_carry_[l] = bwd_final;
    }
    out_.states.middleRows(a, b - a) = cur;
    finalized_rows_ = b;
  }

  // Trailing partial chunk: provisional states recomputed every tick from
  // carry copies, so finalized rows and carries stay untouched.
  if (t_total > finalized_rows_) {
    Matrix cur = stacked_.middleRows(finalized_rows_, t_total - finalized_rows_);
    for (Index l = 0; l < cfg_.layers; ++l) {
      CellState fwd = chunk_fwd_carry_[l];
      CellState bwd = cfg_.backward_init == BackwardInit::kPreviousChunk ? chunk_bwd_carry_[l]
                                                                         : zero_state(cfg_.hidden);
      cur = run_layer(l, cur, fwd, bwd, nullptr);
    }
    out_.states.middleRows(finalized_rows_, t_total - finalized_rows_) = cur;
  }
  out_.stable_upto = closed ? t_total : finalized_rows_;
}

EncoderStates encode(const EncoderConfig& cfg, const EncoderParams& params,
                     const FeatureSequence& feats, bool stream_closed) {
  Encoder enc(cfg, params);
  return enc.encode(feats, stream_closed);
}

std::string to_string(EncoderPolicy p) {
  switch (p) {
    case EncoderPolicy::kUnidirectional: return "unidirectional";
    case EncoderPolicy::kBidirectional: return "bidirectional";
    case EncoderPolicy::kChunked: return "chunked";
  }
  throw ConfigError("unknown encoder policy");
}

std::string to_string(BackwardInit b) {
  switch (b) {
    case BackwardInit::kConstant: return "constant";
    case BackwardInit::kPreviousChunk: return "previous_chunk";
  }
  throw ConfigError("unknown backward init");
}

EncoderPolicy encoder_policy_from_string(const std::string& name) {
  if (name == "unidirectional") return EncoderPolicy::kUnidirectional;
  if (name == "bidirectional") return EncoderPolicy::kBidirectional;
  if (name == "chunked") return EncoderPolicy::kChunked;
  throw ConfigError("unknown encoder policy '" + name + "'");
}

BackwardInit backward_init_from_string(const std::string& name) {
  if (name == "constant") return BackwardInit::kConstant;
  if (name == "previous_chunk") return BackwardInit::kPreviousChunk;
  throw ConfigError("unknown backward init '" + name + "'");
}

}  // namespace s2s
