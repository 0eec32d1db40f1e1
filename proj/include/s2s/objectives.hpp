// Copyright 2026 the s2s-stream authors
// Attention-constraint loss, its analytic gradient, and the small
// teacher-forced training loop for the attention projection.
//
// Licensed under the Apache License, Version 2.0

#pragma once

#include <vector>

#include "s2s/decoder.hpp"
#include "s2s/encoder.hpp"
#include "s2s/errors.hpp"
#include "s2s/types.hpp"

namespace s2s {

// Penalized frame region of one token: every encoder frame with index >=
// region_start, i.e. all frames at or after the first frame that lies fully
// past the token's aligned end time.
struct AlignmentRegion {
  Index token_index = 0;
  Index region_start = 0;
};

struct ConstraintLossConfig {
  double alpha = 0.05;
};

// alpha * sum over tokens of the attention mass falling inside that token's
// region. attn holds one normalized attention row per token.
double constraint_loss(const Matrix& attn, const std::vector<AlignmentRegion>& regions,
                       const ConstraintLossConfig& cfg);

// Gradient of constraint_loss with respect to the attention logits, one row
// per token: alpha * (a .* r - (a . r) * a) for attention a and region
// indicator r.
Matrix constraint_loss_grad_logits(const Matrix& attn, const std::vector<AlignmentRegion>& regions,
                                   const ConstraintLossConfig& cfg);

// Sequence cross-entropy plus the constraint term. log_probs holds one
// log-normalized row per token; labels are the reference tokens.
double joint_loss(const Matrix& log_probs, const std::vector<int>& labels, const Matrix& attn,
                  const std::vector<AlignmentRegion>& regions, const ConstraintLossConfig& cfg);

// One teacher-forced utterance prepared for training/analysis: final encoder
// states, reference tokens, and the per-token penalty regions.
struct TrainingExample {
  EncoderStates enc;
  std::vector<int> tokens;
  std::vector<AlignmentRegion> regions;
};

struct TrainConfig {
  double alpha = 0.05;
  double learning_rate = 2.0;
  int steps = 120;
};

struct TrainStats {
  double initial_joint = 0.0;
  double final_joint = 0.0;
  int steps = 0;
};

// Teacher-forced joint loss of one example plus its gradient with respect to
// the attention projection w_query (the only trained tensor; the encoder and
// every other decoder tensor stay frozen). Pass grad == nullptr to evaluate
// the loss alone.
double example_joint_loss(const DecoderParams& params, const TrainingExample& example,
                          const ConstraintLossConfig& cfg, Matrix* grad_w_query);

// Plain gradient descent on w_query over the summed joint loss.
TrainStats train_attention(DecoderParams& params, const std::vector<TrainingExample>& examples,
                           const TrainConfig& cfg);

// Mean per-token attention mass inside the penalty regions under teacher
// forcing; the quantity the constraint term drives down.
double future_region_mass(const DecoderParams& params, const std::vector<TrainingExample>& examples);

}  // namespace s2s
