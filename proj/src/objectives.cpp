// Copyright 2026 the s2s-stream authors
//
// Licensed under the Apache License, Version 2.0

#include "s2s/objectives.hpp"

#include <cmath>
#include <string>

#include "s2s/kernels.hpp"

namespace s2s {

namespace {

void check_regions(Index tokens, const std::vector<AlignmentRegion>& regions) {
  if (static_cast<Index>(regions.size()) != tokens) {
    throw ShapeError("got " + std::to_string(regions.size()) + " regions for " +
                     std::to_string(tokens) + " attention rows");
  }
  for (const AlignmentRegion& r : regions) {
    if (r.token_index < 0 || r.token_index >= tokens) {
      throw InputError("region token index " + std::to_string(r.token_index) + " out of range");
    }
    if (r.region_start < 0) throw InputError("negative region start");
  }
}

double region_mass(const Matrix& attn, const AlignmentRegion& r) {
  const Index frames = attn.cols();
  if (r.region_start >= frames) return 0.0;  // region beyond the last frame
  return attn.row(r.token_index).segment(r.region_start, frames - r.region_start).sum();
}

}  // namespace

double constraint_loss(const Matrix& attn, const std::vector<AlignmentRegion>& regions,
                       const ConstraintLossConfig& cfg) {
  check_regions(attn.rows(), regions);
  if (cfg.alpha < 0.0) throw InputError("negative constraint weight");
  double total = 0.0;
  for (const AlignmentRegion& r : regions) total += region_mass(attn, r);
  return cfg.alpha * total;
}

Matrix constraint_loss_grad_logits(const Matrix& attn, const std::vector<AlignmentRegion>& regions,
                                   const ConstraintLossConfig& cfg) {
  check_regions(attn.rows(), regions);
  Matrix grad = Matrix::Zero(attn.rows(), attn.cols());
  const Index frames = attn.cols();
  for (const AlignmentRegion& r : regions) {
    const auto a = attn.row(r.token_index);
    const double mass = region_mass(attn, r);
    // Softmax backward of a masked-sum objective: a .* r - (a . r) * a.
    for (Index t = 0; t < frames; ++t) {
      const double in_region = t >= r.region_start ? 1.0 : 0.0;
      grad(r.token_index, t) = cfg.alpha * (a[t] * in_region - mass * a[t]);
    }
  }
  return grad;
}

double joint_loss(const Matrix& log_probs, const std::vector<int>& labels, const Matrix& attn,
                  const std::vector<AlignmentRegion>& regions, const ConstraintLossConfig& cfg) {
  if (log_probs.rows() != static_cast<Index>(labels.size())) {
    throw ShapeError("log_probs rows disagree with label count");
  }
  double ce = 0.0;
  for (Index i = 0; i < log_probs.rows(); ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    if (y < 0 || y >= log_probs.cols()) throw InputError("label outside vocabulary");
    ce -= log_probs(i, y);
  }
  return ce + constraint_loss(attn, regions, cfg);
}

double example_joint_loss(const DecoderParams& params, const TrainingExample& example,
                          const ConstraintLossConfig& cfg, Matrix* grad_w_query) {
  const Index frames = example.enc.states.rows();
  const Index width = example.enc.states.cols();
  if (frames == 0) throw InputError("training example without encoder frames");
  check_regions(static_cast<Index>(example.tokens.size()), example.regions);

  const double scale = 1.0 / std::sqrt(static_cast<double>(width));
  double loss = 0.0;
  DecoderState state = init_decoder_state(params);
  int consumed = params.bos_id();

  for (std::size_t i = 0; i < example.tokens.size(); ++i) {
    state = advance_state(params, state, consumed);
    const Vector& emb_out = state.h.back();
    const Vector query = matvec(params.w_query, emb_out);
    const Vector attn = softmax(attention_logits(query, example.enc.states));
    const Vector ctx = example.enc.states.transpose() * attn;
    const Vector combined = matvec(params.w_context, ctx) + matvec(params.w_embed, emb_out);
    const Vector log_probs = log_softmax(matvec(params.w_out, combined) + params.b_out);

    const int label = example.tokens[i];
    const AlignmentRegion& region = example.regions[i];
    double mass = 0.0;
    if (region.region_start < frames) {
      mass = attn.segment(region.region_start, frames - region.region_start).sum();
    }
    loss += -log_probs[label] + cfg.alpha * mass;

    if (grad_w_query != nullptr) {
      // Cross-entropy path: d/dctx = Wc^T Wo^T (p - onehot).
      Vector dlogits = log_probs.array().exp();
      dlogits[label] -= 1.0;
      const Vector dctx = params.w_context.transpose() * (params.w_out.transpose() * dlogits);
      // d/da combines the context read with the constraint indicator.
      Vector da = example.enc.states * dctx;
      if (region.region_start < frames) {
        da.segment(region.region_start, frames - region.region_start).array() += cfg.alpha;
      }
      // Softmax backward, then chain through logits = (K q) * scale.
      const double inner = attn.dot(da);
      const Vector dlogits_attn = (attn.array() * (da.array() - inner)).matrix();
      const Vector dq = (example.enc.states.transpose() * dlogits_attn) * scale;
      grad_w_query->noalias() += dq * emb_out.transpose();
    }
    consumed = label;
  }
  return loss;
}

TrainStats train_attention(DecoderParams& params, const std::vector<TrainingExample>& examples,
                           const TrainConfig& cfg) {
  if (examples.empty()) throw InputError("no training examples");
  if (cfg.steps < 0 || !(cfg.learning_rate > 0.0)) throw ConfigError("bad training settings");

  Index total_tokens = 0;
  for (const TrainingExample& e : examples) total_tokens += static_cast<Index>(e.tokens.size());
  if (total_tokens == 0) throw InputError("training examples carry no tokens");
  const double norm = 1.0 / static_cast<double>(total_tokens);

  const ConstraintLossConfig loss_cfg{cfg.alpha};
  TrainStats stats;
  for (int step = 0; step <= cfg.steps; ++step) {
    Matrix grad = Matrix::Zero(params.w_query.rows(), params.w_query.cols());
    double joint = 0.0;
    for (const TrainingExample& e : examples) {
      joint += example_joint_loss(params, e, loss_cfg, &grad);
    }
    if (step == 0) stats.initial_joint = joint * norm;
    stats.final_joint = joint * norm;
    if (step == cfg.steps) break;  // last pass only evaluates
    params.w_query.noalias() -= (cfg.learning_rate * norm) * grad;
    ++stats.steps;
  }
  return stats;
}

double future_region_mass(const DecoderParams& params,
                          const std::vector<TrainingExample>& examples) {
  double mass = 0.0;
  Index tokens = 0;
  for (const TrainingExample& e : examples) {
    const Index frames = e.enc.states.rows();
    DecoderState state = init_decoder_state(params);
    int consumed = params.bos_id();
    check_regions(static_cast<Index>(e.tokens.size()), e.regions);
    for (std::size_t i = 0; i < e.tokens.size(); ++i) {
      state = advance_state(params, state, consumed);
      const Vector query = matvec(params.w_query, state.h.back());
      const Vector attn = softmax(attention_logits(query, e.enc.states));
      const AlignmentRegion& region = e.regions[i];
      if (region.region_start < frames) {
        mass += attn.segment(region.region_start, frames - region.region_start).sum();
      }
      ++tokens;
      consumed = e.tokens[i];
    }
  }
  if (tokens == 0) throw InputError("no tokens to analyze");
  return mass / static_cast<double>(tokens);
}

}  // namespace s2s
