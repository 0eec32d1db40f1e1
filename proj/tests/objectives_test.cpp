// Copyright 2026 the s2s-stream authors
//
// Licensed under the Apache License, Version 2.0

#include <doctest.h>

#include <cmath>
#include <vector>

#include "s2s/kernels.hpp"
#include "s2s/objectives.hpp"
#include "s2s/rng.hpp"
#include "s2s/selfcheck.hpp"

using namespace s2s;

namespace {

DecoderParams small_decoder(std::uint64_t seed) {
  Rng rng(seed);
  const Index vocab_total = 5, embed = 3, hidden = 4, enc_width = 3, combine = 4;
  DecoderParams p;
  p.embedding = 0.5 * rng.gaussian_matrix(vocab_total, embed);
  for (int l = 0; l < 2; ++l) {
    RecurrentCellParams cell;
    const Index in = l == 0 ? embed : hidden;
    cell.w_input = 0.4 * rng.gaussian_matrix(4 * hidden, in);
    cell.w_recurrent = 0.4 * rng.gaussian_matrix(4 * hidden, hidden);
    cell.bias = 0.2 * rng.gaussian_vector(4 * hidden);
    p.layers.push_back(std::move(cell));
  }
  p.w_query = 0.6 * rng.gaussian_matrix(enc_width, hidden);
  p.w_context = 0.6 * rng.gaussian_matrix(combine, enc_width);
  p.w_embed = 0.6 * rng.gaussian_matrix(combine, hidden);
  p.w_out = 0.6 * rng.gaussian_matrix(vocab_total, combine);
  p.b_out = 0.2 * rng.gaussian_vector(vocab_total);
  return p;
}

TrainingExample small_example(std::uint64_t seed, Index frames, std::vector<int> tokens,
                              Index region_start) {
  Rng rng(seed);
  TrainingExample e;
  e.enc.states = rng.gaussian_matrix(frames, 3);
  e.enc.stable_upto = frames;
  e.tokens = std::move(tokens);
  for (Index i = 0; i < static_cast<Index>(e.tokens.size()); ++i) {
    e.regions.push_back(AlignmentRegion{i, region_start});
  }
  return e;
}

}  // namespace

TEST_SUITE("objectives") {

TEST_CASE("constraint loss sums masked attention mass") {
  Matrix attn(2, 4);
  attn << 0.1, 0.2, 0.3, 0.4,  //
      0.25, 0.25, 0.25, 0.25;
  std::vector<AlignmentRegion> regions{{0, 2}, {1, 4}};
  ConstraintLossConfig cfg;
  cfg.alpha = 0.05;
  // Row 0 contributes 0.3 + 0.4; row 1's region starts past the last frame.
  CHECK(constraint_loss(attn, regions, cfg) == doctest::Approx(0.05 * 0.7).epsilon(1e-12));
  cfg.alpha = 0.0;
  CHECK(constraint_loss(attn, regions, cfg) == 0.0);
  cfg.alpha = 1.0;
  regions[0].region_start = 0;
  regions[1].region_start = 0;
  CHECK(constraint_loss(attn, regions, cfg) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("constraint loss validates its inputs") {
  Matrix attn = Matrix::Constant(2, 3, 1.0 / 3.0);
  ConstraintLossConfig cfg;
  CHECK_THROWS_AS(constraint_loss(attn, {{0, 0}}, cfg), ShapeError);
  CHECK_THROWS_AS(constraint_loss(attn, {{0, 0}, {5, 0}}, cfg), InputError);
  CHECK_THROWS_AS(constraint_loss(attn, {{0, -1}, {1, 0}}, cfg), InputError);
  ConstraintLossConfig bad;
  bad.alpha = -0.1;
  CHECK_THROWS_AS(constraint_loss(attn, {{0, 0}, {1, 0}}, bad), InputError);
}

TEST_CASE("constraint gradient matches finite differences through the softmax") {
  Rng rng(11);
  const Index tokens = 3, frames = 5;
  Matrix logits = rng.gaussian_matrix(tokens, frames);
  std::vector<AlignmentRegion> regions{{0, 3}, {1, 1}, {2, 5}};
  ConstraintLossConfig cfg;
  cfg.alpha = 0.7;

  Matrix attn(tokens, frames);
  for (Index r = 0; r < tokens; ++r) attn.row(r) = softmax(logits.row(r).transpose()).transpose();
  const Matrix grad = constraint_loss_grad_logits(attn, regions, cfg);

  for (Index r = 0; r < tokens; ++r) {
    const AlignmentRegion region = regions[static_cast<std::size_t>(r)];
    const auto mass_of = [&](const Vector& row_logits) {
      const Vector a = softmax(row_logits);
      double m = 0.0;
      for (Index t = region.region_start; t < frames; ++t) m += a(t);
      return cfg.alpha * m;
    };
    const Vector fd = finite_diff_grad(mass_of, logits.row(r).transpose());
    for (Index t = 0; t < frames; ++t) {
      CHECK(grad(r, t) == doctest::Approx(fd(t)).epsilon(1e-6));
    }
  }
}

TEST_CASE("joint loss adds cross entropy to the constraint term") {
  Matrix log_probs(2, 3);
  log_probs << std::log(0.5), std::log(0.25), std::log(0.25),  //
      std::log(0.1), std::log(0.6), std::log(0.3);
  Matrix attn(2, 2);
  attn << 0.75, 0.25, 0.5, 0.5;
  std::vector<AlignmentRegion> regions{{0, 1}, {1, 1}};
  ConstraintLossConfig cfg;
  cfg.alpha = 0.1;
  const double want = -std::log(0.5) - std::log(0.6) + 0.1 * (0.25 + 0.5);
  CHECK(joint_loss(log_probs, {0, 1}, attn, regions, cfg) == doctest::Approx(want).epsilon(1e-12));
  CHECK_THROWS_AS(joint_loss(log_probs, {0}, attn, regions, cfg), ShapeError);
  CHECK_THROWS_AS(joint_loss(log_probs, {0, 7}, attn, regions, cfg), InputError);
}

TEST_CASE("example joint loss agrees with a decode_step walkthrough") {
  const DecoderParams p = small_decoder(21);
  const TrainingExample e = small_example(22, 6, {1, 0, 2}, 3);
  ConstraintLossConfig cfg;
  cfg.alpha = 0.3;

  double manual = 0.0;
  DecoderState state = init_decoder_state(p);
  int consumed = p.bos_id();
  for (std::size_t i = 0; i < e.tokens.size(); ++i) {
    const StepOutput out = decode_step(p, state, consumed, e.enc);
    const AlignmentRegion& r = e.regions[i];
    double mass = 0.0;
    for (Index t = r.region_start; t < out.attention.size(); ++t) mass += out.attention(t);
    manual += -out.log_probs(e.tokens[i]) + cfg.alpha * mass;
    state = out.new_state;
    consumed = e.tokens[i];
  }
  CHECK(example_joint_loss(p, e, cfg, nullptr) == doctest::Approx(manual).epsilon(1e-12));
}

TEST_CASE("analytic w_query gradient matches direct finite differences") {
  DecoderParams p = small_decoder(31);
  const TrainingExample e = small_example(32, 5, {0, 2, 1}, 2);
  ConstraintLossConfig cfg;
  cfg.alpha = 0.4;

  Matrix grad = Matrix::Zero(p.w_query.rows(), p.w_query.cols());
  example_joint_loss(p, e, cfg, &grad);

  const double eps = 1e-6;
  for (Index r = 0; r < p.w_query.rows(); ++r) {
    for (Index c = 0; c < p.w_query.cols(); ++c) {
      const double keep = p.w_query(r, c);
      p.w_query(r, c) = keep + eps;
      const double up = example_joint_loss(p, e, cfg, nullptr);
      p.w_query(r, c) = keep - eps;
      const double down = example_joint_loss(p, e, cfg, nullptr);
      p.w_query(r, c) = keep;
      const double fd = (up - down) / (2.0 * eps);
      CHECK(grad(r, c) == doctest::Approx(fd).epsilon(1e-5));
    }
  }
}

TEST_CASE("generated gradient-check instances stay within tolerance") {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const GradCheckCase c = make_grad_case(seed);
    CHECK(grad_check_error(c) <= 1e-4);
  }
}

TEST_CASE("training the attention projection lowers the joint loss and future mass") {
  DecoderParams p = small_decoder(41);
  std::vector<TrainingExample> examples{
      small_example(42, 8, {1, 0, 2, 1}, 4),
      small_example(43, 7, {2, 2, 0}, 3),
  };
  TrainConfig cfg;
  cfg.alpha = 1.0;
  cfg.learning_rate = 0.3;
  cfg.steps = 80;

  const double mass_before = future_region_mass(p, examples);
  const TrainStats stats = train_attention(p, examples, cfg);
  const double mass_after = future_region_mass(p, examples);

  CHECK(stats.steps == 80);
  CHECK(stats.final_joint < stats.initial_joint);
  CHECK(mass_after < mass_before);
  CHECK(mass_after >= 0.0);
  CHECK(mass_before <= 1.0 + 1e-12);
}

TEST_CASE("training rejects degenerate setups") {
  DecoderParams p = small_decoder(51);
  TrainConfig cfg;
  CHECK_THROWS_AS(train_attention(p, {}, cfg), InputError);
  std::vector<TrainingExample> empty_tokens{small_example(52, 4, {}, 2)};
  CHECK_THROWS_AS(train_attention(p, empty_tokens, cfg), InputError);
  std::vector<TrainingExample> ok{small_example(53, 4, {0}, 2)};
  TrainConfig bad = cfg;
  bad.learning_rate = 0.0;
  CHECK_THROWS_AS(train_attention(p, ok, bad), ConfigError);
}

}  // TEST_SUITE
