// Copyright 2026 the s2s-stream authors
//
// Licensed under the Apache License, Version 2.0

#include "s2s/toy_model.hpp"

#include <cmath>

#include "s2s/decoder.hpp"

namespace s2s {
namespace {

// Gate biases. +/-40 drive a sigmoid to 1/0 up to ~4e-18; -1000 underflows
// to exactly 0, which kills a gate bit-exactly.
constexpr double kOn = 40.0;
constexpr double kOff = -40.0;
constexpr double kKill = -1000.0;

// Smoothing factors of the first encoder layer. Content channels average
// across most of a span; the silence channel forgets quickly so its tails do
// not reach into the adjacent token spans.
constexpr double kLambda = 0.6;
constexpr double kLambdaSil = 0.35;
// Clean in-span candidate amplitude of the smoothed channels.
constexpr double kChannelDrive = 0.8;
// Counter increment per boundary marker, in pre-tanh units.
constexpr double kCountStep = 0.02;
// Comparator gain of the position-step channels.
constexpr double kComparatorGain = 2500.0;
// Second-layer mixing gains, chosen so the clean mid-span content amplitude
// is ~0.70 for both the one- and two-direction readers.
constexpr double kMixBi = 0.995;
constexpr double kMixUni = 1.99;
// Decoder shift-register feedback and second-layer amplifier.
constexpr double kShiftGain = 2.0;
constexpr double kDecoderAmp = 1.8;
// Attention calibration targets, in logit units: in-support frames sit this
// far above unrelated frames, silence frames get a standing attraction, and
// the readout targets for the attended token / resting end-sentinel logits.
constexpr double kSupportGap = 6.3;
constexpr double kSilenceGap = 1.75;
constexpr double kTokenLogit = 8.0;
constexpr double kEosLogit = 6.5;
constexpr double kBosPenalty = -50.0;

double logit(double p) { return std::log(p / (1.0 - p)); }

struct GateView {
  // Row offsets of the four gate blocks inside a 4H-row parameter.
  Index i, f, g, o;
};

GateView gates(Index hidden) { return {0, hidden, 2 * hidden, 3 * hidden}; }

RecurrentCellParams dead_cell(Index hidden, Index input) {
  RecurrentCellParams cell;
  cell.w_input = Matrix::Zero(4 * hidden, input);
  cell.w_recurrent = Matrix::Zero(4 * hidden, hidden);
  cell.bias = Vector::Zero(4 * hidden);
  const GateView gv = gates(hidden);
  for (Index ch = 0; ch < hidden; ++ch) {
    cell.bias[gv.i + ch] = kKill;
    cell.bias[gv.f + ch] = kKill;
    cell.bias[gv.o + ch] = kOff;
  }
  return cell;
}

void open_channel(RecurrentCellParams& cell, Index ch, double bi, double bf) {
  const GateView gv = gates(cell.hidden_size());
  cell.bias[gv.i + ch] = bi;
  cell.bias[gv.f + ch] = bf;
  cell.bias[gv.o + ch] = kOn;
}

// Writes `row` (scaled) into the candidate-gate block of w_input, repeated
// over the `repeats` stacked input frames.
void candidate_stacked(RecurrentCellParams& cell, Index ch, const Vector& row, double scale,
                       int repeats) {
  const GateView gv = gates(cell.hidden_size());
  const Index d = row.size();
  for (int r = 0; r < repeats; ++r)
    cell.w_input.block(gv.g + ch, r * d, 1, d) = scale * row.transpose();
}

int mid_frame(int start, int span) { return start + span / 2; }

}  // namespace

void ToyModelSpec::validate() const {
  if (vocab < 4) throw ConfigError("the constructed model needs vocab >= 4");
  if (feat_dim < vocab + 2) throw ConfigError("feat_dim must be at least vocab + 2");
  if (frame_period_ms <= 0.0) throw ConfigError("frame_period_ms must be positive");
  if (downsample < 1) throw ConfigError("downsample must be positive");
  if (max_positions < 8) throw ConfigError("max_positions must be at least 8");
  if (policy == EncoderPolicy::kChunked && chunk_size < 1)
    throw ConfigError("chunk_size must be positive");
  if (content_gain <= 0.0 || boundary_gain <= 0.0 || silence_gain <= 0.0)
    throw ConfigError("signal gains must be positive");
}

ModelParams build_toy_model(const ToyModelSpec& spec) {
  spec.validate();
  const int V = spec.vocab;
  const int M = spec.max_positions;
  const Index H = V + M + 4;       // encoder hidden width per direction
  const Index N = M + 4;           // decoder hidden width
  const Index E = 8;               // embedding width
  const Index kCounter = V;        // first-layer boundary counter channel
  const Index kSil1 = V + 1;       // first-layer silence channel
  const auto step_ch = [&](int i) { return V + i - 1; };  // active iff count >= i
  const Index kSil2 = V + M;       // second-layer silence channel
  const int ds = spec.downsample;
  const bool bidi = spec.policy != EncoderPolicy::kUnidirectional;

  ModelParams model;
  model.config.encoder.policy = spec.policy;
  model.config.encoder.layers = 2;
  model.config.encoder.hidden = static_cast<int>(H);
  model.config.encoder.downsample = ds;
  model.config.encoder.chunk_size = spec.chunk_size;
  model.config.encoder.backward_init = spec.backward_init;
  model.config.vocab = V;
  model.config.feat_dim = spec.feat_dim;
  model.config.frame_period_ms = spec.frame_period_ms;
  model.config.max_positions = M;
  model.config.decoder_hidden = static_cast<int>(N);
  model.config.embed_dim = static_cast<int>(E);
  model.config.encoder.validate();

  const SignalDictionary dict = make_dictionary(V, spec.feat_dim);

  // ---- Encoder layer 1: smoothers over the raw signatures plus the
  // boundary counter (forward direction only, so counts are causal).
  const Index in1 = static_cast<Index>(spec.feat_dim) * ds;
  EncoderLayerParams layer1;
  layer1.forward = dead_cell(H, in1);
  layer1.backward = dead_cell(H, in1);
  const double bi_ema = logit(1.0 - kLambda);
  const double bf_ema = logit(kLambda);
  for (Index v = 0; v < V; ++v) {
    for (RecurrentCellParams* cell : {&layer1.forward, &layer1.backward}) {
      open_channel(*cell, v, bi_ema, bf_ema);
      candidate_stacked(*cell, v, dict.content.row(v).transpose(),
                        std::atanh(kChannelDrive) / (ds * spec.content_gain), ds);
    }
  }
  for (RecurrentCellParams* cell : {&layer1.forward, &layer1.backward}) {
    open_channel(*cell, kSil1, logit(1.0 - kLambdaSil), logit(kLambdaSil));
    candidate_stacked(*cell, kSil1, dict.silence,
                      std::atanh(kChannelDrive) / (ds * spec.silence_gain), ds);
  }
  open_channel(layer1.forward, kCounter, kOn, kOn);
  candidate_stacked(layer1.forward, kCounter, dict.boundary,
                    std::atanh(kCountStep) / (ds * spec.boundary_gain), ds);

  // ---- Encoder layer 2: memoryless channels (forget gate killed). Content
  // and silence mix the two directions of layer 1; the position-step
  // channels threshold the counter at tanh(kCountStep * (i - 1/2)).
  const Index in2 = bidi ? 2 * H : H;
  EncoderLayerParams layer2;
  layer2.forward = dead_cell(H, in2);
  layer2.backward = dead_cell(H, in2);
  const GateView gv2 = gates(H);
  const double mix = bidi ? kMixBi : kMixUni;
  const auto mixed_reader = [&](Index ch, Index src) {
    open_channel(layer2.forward, ch, kOn, kKill);
    layer2.forward.w_input(gv2.g + ch, src) = mix;
    if (bidi) layer2.forward.w_input(gv2.g + ch, H + src) = mix;
  };
  for (Index v = 0; v < V; ++v) mixed_reader(v, v);
  mixed_reader(kSil2, kSil1);
  for (int i = 1; i <= M; ++i) {
    const Index ch = step_ch(i);
    open_channel(layer2.forward, ch, kOn, kKill);
    layer2.forward.w_input(gv2.g + ch, kCounter) = kComparatorGain;
    layer2.forward.bias[gv2.g + ch] = -kComparatorGain * std::tanh(kCountStep * (i - 0.5));
  }
  model.encoder.layers = {layer1, layer2};

  // ---- Decoder recurrence: a shift register. The begin sentinel seeds slot
  // 0 through the input candidate; every consumed token shifts the pulse one
  // slot to the right at a self-sustaining amplitude.
  double pulse = 0.7;
  for (int it = 0; it < 200; ++it) pulse = std::tanh(std::tanh(kShiftGain * pulse));
  const double seed_drive = std::atanh(std::atanh(pulse));

  model.decoder.embedding = Matrix::Zero(V + 2, E);
  for (Index v = 0; v < V; ++v) model.decoder.embedding(v, 1) = 1.0;  // identity unused downstream
  model.decoder.embedding(model.config.bos_id(), 0) = 1.0;
  model.decoder.embedding(model.config.eos_id(), 2) = 1.0;

  RecurrentCellParams dlayer1 = dead_cell(N, E);
  const GateView gvd = gates(N);
  for (Index j = 0; j < N; ++j) open_channel(dlayer1, j, kOn, kKill);
  dlayer1.w_input(gvd.g + 0, 0) = seed_drive;
  for (Index j = 1; j < N; ++j) dlayer1.w_recurrent(gvd.g + j, j - 1) = kShiftGain;

  RecurrentCellParams dlayer2 = dead_cell(N, N);
  for (Index j = 0; j < N; ++j) {
    open_channel(dlayer2, j, kOn, kKill);
    dlayer2.w_input(gvd.g + j, j) = kDecoderAmp;
  }
  model.decoder.layers = {dlayer1, dlayer2};

  // ---- Calibration probe: a clean utterance through this very encoder.
  CorpusSpec probe_spec;
  probe_spec.vocab = V;
  probe_spec.feat_dim = spec.feat_dim;
  probe_spec.frame_period_ms = spec.frame_period_ms;
  probe_spec.downsample = ds;
  probe_spec.noise_sigma = 0.0;
  probe_spec.content_gain = spec.content_gain;
  probe_spec.boundary_gain = spec.boundary_gain;
  probe_spec.silence_gain = spec.silence_gain;
  const std::vector<int> probe_tokens = {0, 1, 2, 3};
  const std::vector<int> probe_spans = {8, 8, 8, 8};
  const int probe_lead = 3;
  const SyntheticUtterance probe =
      synthesize_utterance(probe_spec, dict, probe_tokens, probe_spans, probe_lead, nullptr,
                           "probe");
  const EncoderStates enc = encode(model.config.encoder, model.encoder, probe.features, true);
  const Index width = enc.states.cols();
  const double scale = std::sqrt(static_cast<double>(width));

  const Index t0 = mid_frame(probe_lead, probe_spans[0]);
  const Index t_trail = probe_lead + 4 * 8 + probe_spec.trail_frames / 2;
  const double step_gap = enc.states(t0, step_ch(1)) - enc.states(t0, step_ch(2));
  const double sil_amp = enc.states(t_trail, kSil2);
  if (step_gap < 0.5 || sil_amp < 0.2)
    throw ConfigError("constructed encoder failed its calibration probe");

  // ---- Query map: slot j aims a bump at frames whose onset count is j + 1
  // (the span of the token at position j) plus a standing silence pull.
  DecoderState st = init_decoder_state(model.decoder);
  st = advance_state(model.decoder, st, model.config.bos_id());
  const double slot_amp = st.h.back()[0];
  if (slot_amp < 0.5) throw ConfigError("decoder shift register failed to seed");

  const double beta = kSupportGap * scale / step_gap / slot_amp;
  const double beta_sil = kSilenceGap * scale / sil_amp / slot_amp;
  model.decoder.w_query = Matrix::Zero(width, N);
  for (int j = 0; j < M; ++j) {
    model.decoder.w_query(step_ch(j + 1), j) += beta;
    if (j + 2 <= M) model.decoder.w_query(step_ch(j + 2), j) -= beta;
    // The silence attraction parks overshooting positions on the trail. An
    // utterance always carries at least one token, so position 0 can never
    // overshoot; leaving the pull off there keeps the end sentinel expensive
    // at the start and stops the beam from closing empty.
    if (j > 0) model.decoder.w_query(kSil2, j) += beta_sil;
  }

  // ---- Readout head: context passes through untouched; each token row reads
  // its content channel, the end sentinel reads the silence channel.
  model.decoder.w_context = Matrix::Identity(width, width);
  model.decoder.w_embed = Matrix::Zero(width, N);

  const auto probe_context = [&](const DecoderState& state) {
    const Vector query = matvec(model.decoder.w_query, state.h.back());
    const Vector attn = softmax(attention_logits(query, enc.states));
    return Vector(enc.states.transpose() * attn);
  };
  const Vector ctx_first = probe_context(st);  // position 0: should hit token 0
  DecoderState st_rest = st;
  for (int tok : probe_tokens) st_rest = advance_state(model.decoder, st_rest, tok);
  const Vector ctx_rest = probe_context(st_rest);  // past the last token: trail
  if (ctx_first[0] < 0.2 || ctx_rest[kSil2] < 0.2)
    throw ConfigError("constructed decoder failed its calibration probe");

  model.decoder.w_out = Matrix::Zero(V + 2, width);
  const double w_token = kTokenLogit / ctx_first[0];
  const double w_eos = kEosLogit / ctx_rest[kSil2];
  for (Index v = 0; v < V; ++v) model.decoder.w_out(v, v) = w_token;
  model.decoder.w_out(model.config.eos_id(), kSil2) = w_eos;
  model.decoder.b_out = Vector::Zero(V + 2);
  model.decoder.b_out[model.config.bos_id()] = kBosPenalty;

  return model;
}

}  // namespace s2s
