// Copyright 2026 the s2s-stream authors
// Independent reference routes used to cross-check the production paths:
// a full-matrix edit distance, a plain-scan covering endpoint, a scripted
// scorer whose optimum is enumerable, and finite-difference gradient cases.
//
// Licensed under the Apache License, Version 2.0

#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "s2s/objectives.hpp"
#include "s2s/search.hpp"

namespace s2s {

// Full Wagner-Fischer matrix, kept deliberately separate from the rolling-row
// production implementation.
Index edit_distance_reference(const std::vector<int>& reference,
                              const std::vector<int>& hypothesis);

// Covering endpoint by plain left-to-right accumulation.
Index covering_endpoint_reference(const Vector& attn, double theta);

// Scorer with scripted log-probabilities: the distribution after a given
// token prefix is a deterministic function of (seed, prefix), so an
// exhaustive enumeration can rank every sequence independently of the beam.
// The prefix is threaded through DecoderState::h so the search machinery is
// exercised unmodified. Attention is uniform over the frames provided.
class TableScorer final : public Scorer {
 public:
  TableScorer(int vocab, std::uint64_t seed);

  int vocab_total() const override { return vocab_ + 2; }
  int bos_id() const override { return vocab_; }
  int eos_id() const override { return vocab_ + 1; }
  DecoderState init_state() const override;
  StepOutput score(const DecoderState& state, Index position,
                   const EncoderStates& enc) const override;
  DecoderState advance(const DecoderState& state, int token) const override;

  // The scripted distribution itself, by prefix (begin sentinel excluded).
  Vector log_probs_for(const std::vector<int>& prefix) const;

 private:
  int vocab_;
  std::uint64_t seed_;
};

struct RankedSequence {
  std::vector<int> tokens;
  double score = 0.0;
};

// Every length-`length` sequence over the real tokens, scored by the table
// and ranked exactly like the search ranks hypotheses.
std::vector<RankedSequence> exhaustive_rank(const TableScorer& table, int length);

// Small randomized teacher-forced instance for gradient checking.
struct GradCheckCase {
  DecoderParams params;
  TrainingExample example;
  ConstraintLossConfig cfg;
};

GradCheckCase make_grad_case(std::uint64_t seed);

// Max over attention-projection entries of |analytic - fd| / max(|analytic|,
// |fd|, floor).
double grad_check_error(const GradCheckCase& c, double fd_eps = 1e-6, double floor = 1e-8);

}  // namespace s2s
