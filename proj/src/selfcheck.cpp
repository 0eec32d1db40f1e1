// Copyright 2026 the s2s-stream authors
//
// Licensed under the Apache License, Version 2.0

#include "s2s/selfcheck.hpp"

#include <algorithm>
#include <cmath>

#include "s2s/kernels.hpp"
#include "s2s/rng.hpp"

namespace s2s {
namespace {

std::uint64_t mix_hash(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  return h;
}

std::vector<int> prefix_from_state(const DecoderState& state, int bos) {
  std::vector<int> prefix;
  if (state.h.empty()) return prefix;
  const Vector& path = state.h.front();
  for (Index i = 0; i < path.size(); ++i) {
    const int tok = static_cast<int>(std::lround(path[i]));
    if (i == 0 && tok == bos) continue;
    prefix.push_back(tok);
  }
  return prefix;
}

}  // namespace

Index edit_distance_reference(const std::vector<int>& reference,
                              const std::vector<int>& hypothesis) {
  const std::size_t n = reference.size();
  const std::size_t m = hypothesis.size();
  std::vector<std::vector<Index>> d(n + 1, std::vector<Index>(m + 1, 0));
  for (std::size_t i = 0; i <= n; ++i) d[i][0] = static_cast<Index>(i);
  for (std::size_t j = 0; j <= m; ++j) d[0][j] = static_cast<Index>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const Index sub = d[i - 1][j - 1] + (reference[i - 1] == hypothesis[j - 1] ? 0 : 1);
      d[i][j] = std::min({sub, d[i - 1][j] + 1, d[i][j - 1] + 1});
    }
  }
  return d[n][m];
}

Index covering_endpoint_reference(const Vector& attn, double theta) {
  if (attn.size() == 0) throw InputError("empty attention");
  Index last_nonzero = 0;
  double acc = 0.0;
  for (Index t = 0; t < attn.size(); ++t) {
    if (attn[t] > 0.0) last_nonzero = t;
    acc += attn[t];
    if (acc >= theta - 1e-12) return t;
  }
  return last_nonzero;
}

TableScorer::TableScorer(int vocab, std::uint64_t seed) : vocab_(vocab), seed_(seed) {
  if (vocab < 1) throw ConfigError("TableScorer needs at least one token");
}

DecoderState TableScorer::init_state() const {
  DecoderState state;
  state.h = {Vector(0)};
  state.c = {};
  state.last_token = -1;
  return state;
}

StepOutput TableScorer::score(const DecoderState& state, Index /*position*/,
                              const EncoderStates& enc) const {
  if (enc.states.rows() == 0) throw InputError("TableScorer needs at least one frame");
  StepOutput out;
  out.log_probs = log_probs_for(prefix_from_state(state, bos_id()));
  out.attention =
      Vector::Constant(enc.states.rows(), 1.0 / static_cast<double>(enc.states.rows()));
  return out;
}

DecoderState TableScorer::advance(const DecoderState& state, int token) const {
  if (token < 0 || token >= vocab_total()) throw InputError("token id out of range");
  DecoderState next = state;
  Vector& path = next.h.front();
  path.conservativeResize(path.size() + 1);
  path[path.size() - 1] = static_cast<double>(token);
  next.last_token = token;
  return next;
}

Vector TableScorer::log_probs_for(const std::vector<int>& prefix) const {
  std::uint64_t h = mix_hash(seed_, 0x5354u);
  for (int tok : prefix) h = mix_hash(h, static_cast<std::uint64_t>(tok) + 1);
  Rng rng(h);
  Vector logits = rng.gaussian_vector(vocab_total());
  logits[bos_id()] = -50.0;  // the begin sentinel is never a continuation
  return log_softmax(logits);
}

std::vector<RankedSequence> exhaustive_rank(const TableScorer& table, int length) {
  if (length < 1) throw InputError("length must be positive");
  std::vector<RankedSequence> out;
  std::vector<int> seq;
  const int vocab = table.vocab_total() - 2;
  const auto recurse = [&](const auto& self, double score) -> void {
    if (static_cast<int>(seq.size()) == length) {
      out.push_back({seq, score});
      return;
    }
    const Vector lp = table.log_probs_for(seq);
    for (int v = 0; v < vocab; ++v) {
      seq.push_back(v);
      self(self, score + lp[v]);
      seq.pop_back();
    }
  };
  recurse(recurse, 0.0);
  std::sort(out.begin(), out.end(), [](const RankedSequence& a, const RankedSequence& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.tokens < b.tokens;
  });
  return out;
}

GradCheckCase make_grad_case(std::uint64_t seed) {
  Rng rng(seed);
  const Index width = 6;    // encoder width
  const Index frames = 7;
  const Index embed = 3;
  const Index hidden = 5;
  const Index combine = 4;
  const int vocab = 4;

  GradCheckCase c;
  c.cfg.alpha = 0.05;
  c.params.embedding = 0.6 * rng.gaussian_matrix(vocab + 2, embed);
  for (int layer = 0; layer < 2; ++layer) {
    RecurrentCellParams cell;
    const Index in = layer == 0 ? embed : hidden;
    cell.w_input = 0.5 * rng.gaussian_matrix(4 * hidden, in);
    cell.w_recurrent = 0.5 * rng.gaussian_matrix(4 * hidden, hidden);
    cell.bias = 0.2 * rng.gaussian_vector(4 * hidden);
    c.params.layers.push_back(std::move(cell));
  }
  c.params.w_query = 0.7 * rng.gaussian_matrix(width, hidden);
  c.params.w_context = 0.7 * rng.gaussian_matrix(combine, width);
  c.params.w_embed = 0.7 * rng.gaussian_matrix(combine, hidden);
  c.params.w_out = 0.7 * rng.gaussian_matrix(vocab + 2, combine);
  c.params.b_out = 0.2 * rng.gaussian_vector(vocab + 2);

  c.example.enc.states = 0.8 * rng.gaussian_matrix(frames, width);
  c.example.enc.stable_upto = frames;
  const int tokens = 3;
  for (int i = 0; i < tokens; ++i) {
    c.example.tokens.push_back(static_cast<int>(rng.uniform_int(0, vocab - 1)));
    AlignmentRegion r;
    r.token_index = i;
    r.region_start = rng.uniform_int(1, frames);  // empty region allowed
    c.example.regions.push_back(r);
  }
  return c;
}

double grad_check_error(const GradCheckCase& c, double fd_eps, double floor) {
  Matrix analytic = Matrix::Zero(c.params.w_query.rows(), c.params.w_query.cols());
  example_joint_loss(c.params, c.example, c.cfg, &analytic);

  DecoderParams probe = c.params;
  double worst = 0.0;
  for (Index r = 0; r < probe.w_query.rows(); ++r) {
    for (Index col = 0; col < probe.w_query.cols(); ++col) {
      const double saved = probe.w_query(r, col);
      probe.w_query(r, col) = saved + fd_eps;
      const double up = example_joint_loss(probe, c.example, c.cfg, nullptr);
      probe.w_query(r, col) = saved - fd_eps;
      const double down = example_joint_loss(probe, c.example, c.cfg, nullptr);
      probe.w_query(r, col) = saved;
      const double fd = (up - down) / (2.0 * fd_eps);
      const double a = analytic(r, col);
      const double denom = std::max({std::abs(a), std::abs(fd), floor});
      worst = std::max(worst, std::abs(a - fd) / denom);
    }
  }
  return worst;
}

}  // namespace s2s
