// Copyright 2026 the s2s-stream authors
// Prefix-committing incremental beam search over a growing encoder frontier.
//
// Licensed under the Apache License, Version 2.0

#pragma once

#include <limits>
#include <map>
#include <string>
#include <vector>

#include "s2s/decoder.hpp"
#include "s2s/encoder.hpp"
#include "s2s/endpoint.hpp"
#include "s2s/errors.hpp"

namespace s2s {

enum class CommitStrategy { kOffline, kImmortal, kFirstRanked, kCombined };

std::string to_string(CommitStrategy s);
CommitStrategy commit_strategy_from_string(const std::string& name);

struct SearchConfig {
  int beam_size = 8;
  double theta = 0.95;
  // Deltas are measured in encoder frames; infinity disables the strategy's
  // mid-stream commits.
  double delta_immortal = std::numeric_limits<double>::infinity();
  double delta_first_ranked = std::numeric_limits<double>::infinity();
  CommitStrategy strategy = CommitStrategy::kOffline;
  int max_tokens = 48;  // cap on full hypothesis length

  void validate() const;
};

struct Hypothesis {
  std::vector<int> tokens;  // full path, committed prefix included
  double score = 0.0;       // sum of per-step log probabilities
  DecoderState state;       // recurrence after consuming begin sentinel + tokens
  std::vector<EndpointState> endpoints;  // one per token
  bool finished = false;                 // ended with the end sentinel
};

// Strict-weak order used everywhere hypotheses compete: higher score first,
// then lexicographically smaller token sequence (which also prefers the
// shorter of two prefix-related sequences).
bool better_hypothesis(const Hypothesis& a, const Hypothesis& b);

struct CommitEntry {
  double stream_time_ms = 0.0;
  int token = -1;
  std::string tag;  // "immortal", "first_ranked" or "close"
};

struct CommitLog {
  std::vector<CommitEntry> entries;
  std::vector<int> tokens() const;
};

// Scoring interface: the search never touches model weights directly, so
// oracle tests can drive it with scripted score tables.
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual int vocab_total() const = 0;
  virtual int bos_id() const = 0;
  virtual int eos_id() const = 0;
  virtual DecoderState init_state() const = 0;
  // Distribution + attention for position `position` of a hypothesis whose
  // tokens were already consumed into `state`.
  virtual StepOutput score(const DecoderState& state, Index position,
                           const EncoderStates& enc) const = 0;
  virtual DecoderState advance(const DecoderState& state, int token) const = 0;
};

// Scorer backed by the attention decoder.
class ModelScorer final : public Scorer {
 public:
  explicit ModelScorer(const DecoderParams& params) : params_(params) {}
  int vocab_total() const override { return static_cast<int>(params_.vocab_total()); }
  int bos_id() const override { return params_.bos_id(); }
  int eos_id() const override { return params_.eos_id(); }
  DecoderState init_state() const override { return init_decoder_state(params_); }
  StepOutput score(const DecoderState& state, Index position,
                   const EncoderStates& enc) const override;
  DecoderState advance(const DecoderState& state, int token) const override;

 private:
  const DecoderParams& params_;
};

// Root hypothesis: empty path with the begin sentinel consumed.
Hypothesis make_root(const Scorer& scorer);

// One synchronous expansion: every active hypothesis is expanded by every
// legal token, the pooled candidates are cut to beam_size, and candidates
// ending in the end sentinel come back marked finished. Every input must
// start with `prefix` and be unfinished.
std::vector<Hypothesis> beam_step(const std::vector<Hypothesis>& hyps, const Scorer& scorer,
                                  const EncoderStates& enc, const SearchConfig& cfg,
                                  const std::vector<int>& prefix, bool allow_eos = true);

struct BatchResult {
  Hypothesis best;
  std::vector<Hypothesis> finished;  // ranked
  std::vector<Hypothesis> active;    // ranked leftovers when the length cap hit
};

// Offline beam search from the given roots until every hypothesis finishes
// or reaches cfg.max_tokens.
BatchResult batch_beam_search(const Scorer& scorer, const EncoderStates& enc,
                              const SearchConfig& cfg, std::vector<Hypothesis> roots,
                              bool allow_eos = true);
BatchResult batch_beam_search(const Scorer& scorer, const EncoderStates& enc,
                              const SearchConfig& cfg);

// Number of tokens past committed_len that every hypothesis shares and whose
// endpoints are fixed (scanned front to back, stopping at the first miss).
Index immortal_prefix_commit(const std::vector<Hypothesis>& hyps, Index committed_len,
                             const SearchConfig& cfg);

// Number of tokens past committed_len of the best-ranked hypothesis whose
// endpoints trail the frontier by more than delta_first_ranked.
Index first_ranked_commit(const Hypothesis& best, Index committed_len, Index frontier,
                          const SearchConfig& cfg);

// Max of the two rules, applied to the best-ranked hypothesis's tokens.
Index combined_commit(const std::vector<Hypothesis>& hyps, Index committed_len, Index frontier,
                      const SearchConfig& cfg);

struct TickResult {
  std::vector<CommitEntry> new_commits;
  Hypothesis best;
  std::vector<Hypothesis> hypotheses;  // the tick's ranked candidate set
  Index frontier = 0;
  Index stable_upto = 0;
};

// Drives one utterance: call tick() with the growing encoder states each time
// more audio arrives, closing the stream on the final call. Committed tokens
// are never revised; the search re-roots at the committed prefix.
class StreamingSearch {
 public:
  StreamingSearch(const Scorer& scorer, const SearchConfig& cfg);

  TickResult tick(const EncoderStates& enc, bool stream_closed, double stream_time_ms);

  const CommitLog& log() const { return log_; }
  const std::vector<int>& committed() const { return committed_; }
  bool closed() const { return closed_; }

 private:
  bool mid_stream_commits_possible() const;
  std::vector<Hypothesis> open_search(const Hypothesis& root, const EncoderStates& enc);
  Hypothesis make_committed_root() const;
  void commit_tokens(const Hypothesis& source, Index count, Index immortal_count,
                     double stream_time_ms, std::vector<CommitEntry>* out);

  const Scorer& scorer_;
  SearchConfig cfg_;
  std::vector<int> committed_;
  std::vector<EndpointState> committed_endpoints_;
  DecoderState root_state_;
  CommitLog log_;
  bool closed_ = false;
  Index last_frontier_ = 0;
  double last_time_ms_ = -std::numeric_limits<double>::infinity();
  // Recurrent states are encoder-independent, so they are cached per path and
  // reused across ticks instead of being recomputed.
  std::map<std::vector<int>, DecoderState> state_cache_;
  // Endpoint continuity: the endpoint observed last tick for the token
  // emitted from a given prefix, keyed by that prefix.
  std::map<std::vector<int>, EndpointState> prev_endpoints_;
};

}  // namespace s2s
