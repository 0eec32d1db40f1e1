// Copyright 2026 the s2s-stream authors
//
// Licensed under the Apache License, Version 2.0

#include "s2s/search.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace s2s {
namespace {

// Lexicographic comparison of (parent_tokens + token) sequences without
// materializing the concatenation.
bool concat_lex_less(const std::vector<int>& pa, int a, const std::vector<int>& pb, int b) {
  const std::size_t la = pa.size() + 1;
  const std::size_t lb = pb.size() + 1;
  const std::size_t n = std::min(la, lb);
  for (std::size_t i = 0; i < n; ++i) {
    const int xa = i < pa.size() ? pa[i] : a;
    const int xb = i < pb.size() ? pb[i] : b;
    if (xa != xb) return xa < xb;
  }
  return la < lb;
}

struct Candidate {
  Index parent = 0;
  int token = -1;
  double score = 0.0;
};

void sort_and_trim(std::vector<Candidate>& cands, const std::vector<Hypothesis>& parents,
                   int beam_size) {
  std::sort(cands.begin(), cands.end(), [&](const Candidate& x, const Candidate& y) {
    if (x.score != y.score) return x.score > y.score;
    return concat_lex_less(parents[x.parent].tokens, x.token, parents[y.parent].tokens, y.token);
  });
  if (cands.size() > static_cast<std::size_t>(beam_size)) cands.resize(beam_size);
}

bool starts_with(const std::vector<int>& seq, const std::vector<int>& prefix) {
  if (seq.size() < prefix.size()) return false;
  return std::equal(prefix.begin(), prefix.end(), seq.begin());
}

}  // namespace

std::string to_string(CommitStrategy s) {
  switch (s) {
    case CommitStrategy::kOffline: return "offline";
    case CommitStrategy::kImmortal: return "immortal";
    case CommitStrategy::kFirstRanked: return "first_ranked";
    case CommitStrategy::kCombined: return "combined";
  }
  throw ConfigError("unknown commit strategy");
}

CommitStrategy commit_strategy_from_string(const std::string& name) {
  if (name == "offline") return CommitStrategy::kOffline;
  if (name == "immortal") return CommitStrategy::kImmortal;
  if (name == "first_ranked") return CommitStrategy::kFirstRanked;
  if (name == "combined") return CommitStrategy::kCombined;
  throw ConfigError("unknown commit strategy '" + name + "'");
}

void SearchConfig::validate() const {
  if (beam_size < 1) throw ConfigError("beam_size must be at least 1");
  if (!(theta > 0.0) || theta > 1.0) throw ConfigError("theta must lie in (0, 1]");
  if (std::isnan(delta_immortal) || delta_immortal < 0.0)
    throw ConfigError("delta_immortal must be non-negative");
  if (std::isnan(delta_first_ranked) || delta_first_ranked < 0.0)
    throw ConfigError("delta_first_ranked must be non-negative");
  if (max_tokens < 1) throw ConfigError("max_tokens must be at least 1");
}

bool better_hypothesis(const Hypothesis& a, const Hypothesis& b) {
  if (a.score != b.score) return a.score > b.score;
  return std::lexicographical_compare(a.tokens.begin(), a.tokens.end(), b.tokens.begin(),
                                      b.tokens.end());
}

std::vector<int> CommitLog::tokens() const {
  std::vector<int> out;
  out.reserve(entries.size());
  for (const CommitEntry& e : entries) out.push_back(e.token);
  return out;
}

StepOutput ModelScorer::score(const DecoderState& state, Index /*position*/,
                              const EncoderStates& enc) const {
  return readout(params_, state, enc);
}

DecoderState ModelScorer::advance(const DecoderState& state, int token) const {
  return advance_state(params_, state, token);
}

Hypothesis make_root(const Scorer& scorer) {
  Hypothesis root;
  root.state = scorer.advance(scorer.init_state(), scorer.bos_id());
  return root;
}

std::vector<Hypothesis> beam_step(const std::vector<Hypothesis>& hyps, const Scorer& scorer,
                                  const EncoderStates& enc, const SearchConfig& cfg,
                                  const std::vector<int>& prefix, bool allow_eos) {
  cfg.validate();
  if (hyps.empty()) throw SearchError("beam_step requires at least one hypothesis");
  if (enc.states.rows() == 0) throw SearchError("beam_step requires a non-empty frontier");
  const int vocab = scorer.vocab_total();
  const int bos = scorer.bos_id();
  const int eos = scorer.eos_id();

  std::vector<StepOutput> outs(hyps.size());
  std::vector<Candidate> cands;
  cands.reserve(hyps.size() * static_cast<std::size_t>(vocab));
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    const Hypothesis& h = hyps[i];
    if (h.finished) throw SearchError("beam_step received a finished hypothesis");
    if (!starts_with(h.tokens, prefix))
      throw SearchError("hypothesis does not extend the committed prefix");
    outs[i] = scorer.score(h.state, static_cast<Index>(h.tokens.size()), enc);
    for (int v = 0; v < vocab; ++v) {
      if (v == bos) continue;
      if (v == eos && !allow_eos) continue;
      const double lp = outs[i].log_probs(v);
      if (std::isnan(lp)) throw SearchError("NaN log probability during expansion");
      if (lp == std::numeric_limits<double>::infinity())
        throw SearchError("non-finite log probability during expansion");
      cands.push_back({static_cast<Index>(i), v, h.score + lp});
    }
  }
  sort_and_trim(cands, hyps, cfg.beam_size);

  std::vector<Hypothesis> next;
  next.reserve(cands.size());
  for (const Candidate& c : cands) {
    const Hypothesis& parent = hyps[c.parent];
    Hypothesis child;
    child.tokens = parent.tokens;
    child.tokens.push_back(c.token);
    child.score = c.score;
    child.state = scorer.advance(parent.state, c.token);
    child.endpoints = parent.endpoints;
    child.endpoints.push_back(update_fixation(EndpointState{}, outs[c.parent].attention,
                                              enc.states.rows(), cfg.theta, cfg.delta_immortal));
    child.finished = c.token == eos;
    next.push_back(std::move(child));
  }
  return next;
}

BatchResult batch_beam_search(const Scorer& scorer, const EncoderStates& enc,
                              const SearchConfig& cfg, std::vector<Hypothesis> roots,
                              bool allow_eos) {
  cfg.validate();
  if (roots.empty()) throw SearchError("batch_beam_search requires a root hypothesis");
  const std::vector<int> prefix = roots.front().tokens;

  BatchResult result;
  std::vector<Hypothesis> active = std::move(roots);
  while (!active.empty()) {
    if (static_cast<int>(active.front().tokens.size()) >= cfg.max_tokens) {
      // Length cap: the survivors stay unfinished.
      for (Hypothesis& h : active) result.active.push_back(std::move(h));
      break;
    }
    std::vector<Hypothesis> next = beam_step(active, scorer, enc, cfg, prefix, allow_eos);
    active.clear();
    for (Hypothesis& h : next) {
      if (h.finished)
        result.finished.push_back(std::move(h));
      else
        active.push_back(std::move(h));
    }
  }
  std::sort(result.finished.begin(), result.finished.end(), better_hypothesis);
  std::sort(result.active.begin(), result.active.end(), better_hypothesis);
  if (!result.finished.empty() &&
      (result.active.empty() || better_hypothesis(result.finished.front(), result.active.front())))
    result.best = result.finished.front();
  else if (!result.active.empty())
    result.best = result.active.front();
  else
    throw SearchError("search produced no hypotheses");
  return result;
}

BatchResult batch_beam_search(const Scorer& scorer, const EncoderStates& enc,
                              const SearchConfig& cfg) {
  return batch_beam_search(scorer, enc, cfg, {make_root(scorer)}, true);
}

Index immortal_prefix_commit(const std::vector<Hypothesis>& hyps, Index committed_len,
                             const SearchConfig& cfg) {
  if (hyps.empty()) return 0;
  Index min_len = std::numeric_limits<Index>::max();
  for (const Hypothesis& h : hyps) {
    if (static_cast<Index>(h.tokens.size()) < committed_len)
      throw SearchError("hypothesis shorter than the committed prefix");
    min_len = std::min(min_len, static_cast<Index>(h.tokens.size()));
  }
  (void)cfg;
  Index count = 0;
  for (Index pos = committed_len; pos < min_len; ++pos) {
    const int token = hyps.front().tokens[static_cast<std::size_t>(pos)];
    bool agree = true;
    bool fixed = true;
    for (const Hypothesis& h : hyps) {
      agree = agree && h.tokens[static_cast<std::size_t>(pos)] == token;
      fixed = fixed && h.endpoints[static_cast<std::size_t>(pos)].fixed;
    }
    if (!agree || !fixed) break;
    ++count;
  }
  return count;
}

Index first_ranked_commit(const Hypothesis& best, Index committed_len, Index frontier,
                          const SearchConfig& cfg) {
  if (static_cast<Index>(best.tokens.size()) < committed_len)
    throw SearchError("hypothesis shorter than the committed prefix");
  Index count = 0;
  for (Index pos = committed_len; pos < static_cast<Index>(best.tokens.size()); ++pos) {
    const EndpointState& ep = best.endpoints[static_cast<std::size_t>(pos)];
    if (ep.t_c < 0) break;
    if (static_cast<double>(ep.t_c) < static_cast<double>(frontier) - cfg.delta_first_ranked)
      ++count;
    else
      break;
  }
  return count;
}

Index combined_commit(const std::vector<Hypothesis>& hyps, Index committed_len, Index frontier,
                      const SearchConfig& cfg) {
  if (hyps.empty()) return 0;
  const Index imm = immortal_prefix_commit(hyps, committed_len, cfg);
  const Index fr = first_ranked_commit(hyps.front(), committed_len, frontier, cfg);
  return std::max(imm, fr);
}

StreamingSearch::StreamingSearch(const Scorer& scorer, const SearchConfig& cfg)
    : scorer_(scorer), cfg_(cfg) {
  cfg_.validate();
  root_state_ = scorer_.advance(scorer_.init_state(), scorer_.bos_id());
}

bool StreamingSearch::mid_stream_commits_possible() const {
  const bool inf_imm = std::isinf(cfg_.delta_immortal);
  const bool inf_fr = std::isinf(cfg_.delta_first_ranked);
  switch (cfg_.strategy) {
    case CommitStrategy::kOffline: return false;
    case CommitStrategy::kImmortal: return !inf_imm;
    case CommitStrategy::kFirstRanked: return !inf_fr;
    case CommitStrategy::kCombined: return !inf_imm || !inf_fr;
  }
  return false;
}

Hypothesis StreamingSearch::make_committed_root() const {
  Hypothesis root;
  root.tokens = committed_;
  root.score = 0.0;  // rebased: only relative suffix scores matter
  root.state = root_state_;
  root.endpoints = committed_endpoints_;
  return root;
}

std::vector<Hypothesis> StreamingSearch::open_search(const Hypothesis& root,
                                                     const EncoderStates& enc) {
  const Index frontier = enc.states.rows();
  const int vocab = scorer_.vocab_total();
  const int bos = scorer_.bos_id();
  const int eos = scorer_.eos_id();

  std::map<std::vector<int>, EndpointState> next_endpoints;
  std::vector<Hypothesis> resting;
  std::vector<Hypothesis> gen = {root};
  while (!gen.empty()) {
    std::vector<StepOutput> outs(gen.size());
    std::vector<EndpointState> eps(gen.size());
    std::vector<char> rests(gen.size(), 0);
    std::vector<Candidate> cands;
    for (std::size_t i = 0; i < gen.size(); ++i) {
      const Hypothesis& h = gen[i];
      if (static_cast<int>(h.tokens.size()) >= cfg_.max_tokens) {
        rests[i] = 1;
        resting.push_back(h);
        continue;
      }
      outs[i] = scorer_.score(h.state, static_cast<Index>(h.tokens.size()), enc);
      // A hypothesis rests for this tick when its next-position readout would
      // pick the end sentinel; the stream being open, the sentinel itself is
      // never emitted.
      int argmax = -1;
      double best_lp = -std::numeric_limits<double>::infinity();
      for (int v = 0; v < vocab; ++v) {
        if (v == bos) continue;
        const double lp = outs[i].log_probs(v);
        if (std::isnan(lp)) throw SearchError("NaN log probability during expansion");
        if (lp > best_lp) {
          best_lp = lp;
          argmax = v;
        }
      }
      if (argmax == eos) {
        rests[i] = 1;
        resting.push_back(h);
        continue;
      }
      // Endpoint magistrate for the children this parent spawns: continue the
      // fixation thread recorded for this prefix on the previous tick.
      EndpointState prev;
      if (auto it = prev_endpoints_.find(h.tokens); it != prev_endpoints_.end()) prev = it->second;
      eps[i] = update_fixation(prev, outs[i].attention, frontier, cfg_.theta, cfg_.delta_immortal);
      next_endpoints[h.tokens] = eps[i];
      for (int v = 0; v < vocab; ++v) {
        if (v == bos || v == eos) continue;
        cands.push_back({static_cast<Index>(i), v, h.score + outs[i].log_probs(v)});
      }
    }
    if (cands.empty()) break;
    sort_and_trim(cands, gen, cfg_.beam_size);
    std::vector<Hypothesis> next;
    next.reserve(cands.size());
    for (const Candidate& c : cands) {
      const Hypothesis& parent = gen[c.parent];
      Hypothesis child;
      child.tokens = parent.tokens;
      child.tokens.push_back(c.token);
      child.score = c.score;
      if (auto it = state_cache_.find(child.tokens); it != state_cache_.end()) {
        child.state = it->second;
      } else {
        child.state = scorer_.advance(parent.state, c.token);
        state_cache_.emplace(child.tokens, child.state);
      }
      child.endpoints = parent.endpoints;
      child.endpoints.push_back(eps[c.parent]);
      next.push_back(std::move(child));
    }
    gen = std::move(next);
  }
  prev_endpoints_ = std::move(next_endpoints);

  std::sort(resting.begin(), resting.end(), better_hypothesis);
  if (resting.size() > static_cast<std::size_t>(cfg_.beam_size))
    resting.resize(static_cast<std::size_t>(cfg_.beam_size));
  return resting;
}

void StreamingSearch::commit_tokens(const Hypothesis& source, Index count, Index immortal_count,
                                    double stream_time_ms, std::vector<CommitEntry>* out) {
  for (Index k = 0; k < count; ++k) {
    const Index pos = static_cast<Index>(committed_.size());
    const int token = source.tokens[static_cast<std::size_t>(pos)];
    CommitEntry entry;
    entry.stream_time_ms = stream_time_ms;
    entry.token = token;
    if (closed_)
      entry.tag = "close";
    else
      entry.tag = k < immortal_count ? "immortal" : "first_ranked";
    log_.entries.push_back(entry);
    if (out != nullptr) out->push_back(entry);
    committed_.push_back(token);
    committed_endpoints_.push_back(source.endpoints[static_cast<std::size_t>(pos)]);
  }
  if (count > 0 && !closed_) {
    if (auto it = state_cache_.find(committed_); it != state_cache_.end()) {
      root_state_ = it->second;
    } else {
      // Should not happen (every surviving prefix is cached), but recompute
      // deterministically rather than fail.
      DecoderState st = scorer_.advance(scorer_.init_state(), scorer_.bos_id());
      for (int tok : committed_) st = scorer_.advance(st, tok);
      root_state_ = st;
    }
  }
}

TickResult StreamingSearch::tick(const EncoderStates& enc, bool stream_closed,
                                 double stream_time_ms) {
  if (closed_) throw InputError("tick called after the stream closed");
  if (enc.states.rows() < last_frontier_) throw InputError("encoder frontier shrank");
  if (stream_time_ms < last_time_ms_) throw InputError("stream time moved backwards");
  last_frontier_ = enc.states.rows();
  last_time_ms_ = stream_time_ms;

  TickResult res;
  res.frontier = enc.states.rows();
  res.stable_upto = enc.stable_upto;

  if (enc.states.rows() == 0) {
    if (stream_closed) closed_ = true;
    res.best = make_committed_root();
    res.hypotheses = {res.best};
    return res;
  }

  if (stream_closed) {
    closed_ = true;
    BatchResult batch = batch_beam_search(scorer_, enc, cfg_, {make_committed_root()}, true);
    Hypothesis best = batch.best;
    Index tail = static_cast<Index>(best.tokens.size()) - static_cast<Index>(committed_.size());
    if (!best.tokens.empty() && best.tokens.back() == scorer_.eos_id()) --tail;
    commit_tokens(best, tail, 0, stream_time_ms, &res.new_commits);
    res.best = std::move(best);
    res.hypotheses = std::move(batch.finished);
    for (Hypothesis& h : batch.active) res.hypotheses.push_back(std::move(h));
    return res;
  }

  if (!mid_stream_commits_possible()) {
    // Offline strategy (or all deltas infinite): no mid-stream work to do.
    res.best = make_committed_root();
    res.hypotheses = {res.best};
    return res;
  }

  std::vector<Hypothesis> ranked = open_search(make_committed_root(), enc);
  if (ranked.empty()) {
    res.best = make_committed_root();
    res.hypotheses = {res.best};
    return res;
  }

  const Index committed_len = static_cast<Index>(committed_.size());
  Index imm = 0;
  Index fr = 0;
  if (cfg_.strategy == CommitStrategy::kImmortal || cfg_.strategy == CommitStrategy::kCombined)
    imm = immortal_prefix_commit(ranked, committed_len, cfg_);
  if (cfg_.strategy == CommitStrategy::kFirstRanked || cfg_.strategy == CommitStrategy::kCombined)
    fr = first_ranked_commit(ranked.front(), committed_len, res.frontier, cfg_);
  Index total = 0;
  switch (cfg_.strategy) {
    case CommitStrategy::kImmortal: total = imm; break;
    case CommitStrategy::kFirstRanked: total = fr; break;
    case CommitStrategy::kCombined: total = std::max(imm, fr); break;
    case CommitStrategy::kOffline: total = 0; break;
  }
  commit_tokens(ranked.front(), total, imm, stream_time_ms, &res.new_commits);
  res.best = ranked.front();
  res.hypotheses = std::move(ranked);
  return res;
}

}  // namespace s2s
