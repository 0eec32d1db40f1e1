// Copyright 2026 the s2s-stream authors
//
// Licensed under the Apache License, Version 2.0

#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "s2s/search.hpp"
#include "s2s/selfcheck.hpp"

using namespace s2s;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

EncoderStates frames(Index rows) {
  EncoderStates enc;
  enc.states = Matrix::Zero(rows, 1);
  enc.stable_upto = rows;
  enc.input_frames = rows * 4;
  return enc;
}

// Path-threading state shared by the scripted scorers below: the consumed
// token sequence lives in DecoderState::h.front(), like the TableScorer.
DecoderState empty_path_state() {
  DecoderState s;
  s.h = {Vector(0)};
  s.last_token = -1;
  return s;
}

DecoderState append_token(const DecoderState& state, int token) {
  DecoderState next = state;
  Vector& path = next.h.front();
  path.conservativeResize(path.size() + 1);
  path[path.size() - 1] = static_cast<double>(token);
  next.last_token = token;
  return next;
}

// Scorer scripting a single reference transcript with per-token alignment
// frames. Position p's token becomes audible once the frontier passes its
// alignment frame a[p]; before that (and past the end of the transcript) the
// end sentinel dominates, which makes hypotheses rest. Attention is a point
// mass on a[p], so covering endpoints are exact and stop moving immediately.
class ScriptScorer final : public Scorer {
 public:
  ScriptScorer(std::vector<int> truth, std::vector<Index> align)
      : truth_(std::move(truth)), align_(std::move(align)) {}

  int vocab_total() const override { return 5; }  // 3 real tokens + sentinels
  int bos_id() const override { return 3; }
  int eos_id() const override { return 4; }
  DecoderState init_state() const override { return empty_path_state(); }
  DecoderState advance(const DecoderState& state, int token) const override {
    return append_token(state, token);
  }

  StepOutput score(const DecoderState& /*state*/, Index position,
                   const EncoderStates& enc) const override {
    const Index f = enc.states.rows();
    const std::size_t p = static_cast<std::size_t>(position);
    const bool done = p >= truth_.size();
    const bool audible = !done && f > align_[p];
    Vector logits = Vector::Zero(5);
    logits(bos_id()) = -100.0;
    logits(eos_id()) = audible ? -100.0 : 10.0;
    if (audible) logits(truth_[p]) = 8.0;
    StepOutput out;
    out.log_probs = log_softmax(logits);
    out.attention = Vector::Zero(f);
    const Index peak = done ? f - 1 : std::min<Index>(align_[p], f - 1);
    out.attention(peak) = 1.0;
    return out;
  }

 private:
  std::vector<int> truth_;
  std::vector<Index> align_;
};

// Every continuation equally likely: exposes the deterministic tie-break.
class UniformScorer final : public Scorer {
 public:
  int vocab_total() const override { return 5; }
  int bos_id() const override { return 3; }
  int eos_id() const override { return 4; }
  DecoderState init_state() const override { return empty_path_state(); }
  DecoderState advance(const DecoderState& state, int token) const override {
    return append_token(state, token);
  }
  StepOutput score(const DecoderState&, Index, const EncoderStates& enc) const override {
    StepOutput out;
    out.log_probs = Vector::Constant(5, -std::log(5.0));
    out.attention = Vector::Constant(enc.states.rows(), 1.0 / enc.states.rows());
    return out;
  }
};

class PoisonScorer final : public Scorer {
 public:
  explicit PoisonScorer(double value) : value_(value) {}
  int vocab_total() const override { return 4; }
  int bos_id() const override { return 2; }
  int eos_id() const override { return 3; }
  DecoderState init_state() const override { return empty_path_state(); }
  DecoderState advance(const DecoderState& state, int token) const override {
    return append_token(state, token);
  }
  StepOutput score(const DecoderState&, Index, const EncoderStates& enc) const override {
    StepOutput out;
    out.log_probs = Vector::Constant(4, -1.0);
    out.log_probs(0) = value_;
    out.attention = Vector::Constant(enc.states.rows(), 1.0 / enc.states.rows());
    return out;
  }

 private:
  double value_;
};

Hypothesis crafted(std::vector<int> tokens, double score, std::vector<Index> t_c,
                   std::vector<bool> fixed) {
  Hypothesis h;
  h.tokens = std::move(tokens);
  h.score = score;
  for (std::size_t i = 0; i < t_c.size(); ++i) {
    EndpointState ep;
    ep.t_c = t_c[i];
    ep.fixed = fixed[i];
    h.endpoints.push_back(ep);
  }
  return h;
}

SearchConfig script_config(CommitStrategy strategy, double d_imm, double d_fr) {
  SearchConfig cfg;
  cfg.beam_size = 2;
  cfg.theta = 0.95;
  cfg.strategy = strategy;
  cfg.delta_immortal = d_imm;
  cfg.delta_first_ranked = d_fr;
  return cfg;
}

struct ScriptRun {
  CommitLog log;
  std::vector<std::vector<int>> committed_after_tick;
};

// Drives the scripted stream one encoder frame per tick, closing at frame 12.
ScriptRun run_script(const SearchConfig& cfg) {
  const ScriptScorer scorer({0, 0, 0}, {2, 5, 8});
  StreamingSearch search(scorer, cfg);
  ScriptRun run;
  for (Index f = 1; f <= 12; ++f) {
    search.tick(frames(f), f == 12, 100.0 * static_cast<double>(f));
    run.committed_after_tick.push_back(search.committed());
  }
  run.log = search.log();
  return run;
}

}  // namespace

TEST_SUITE("search") {

TEST_CASE("table scorer is deterministic and prefix sensitive") {
  const TableScorer a(4, 99);
  const TableScorer b(4, 99);
  const TableScorer c(4, 100);
  const Vector pa = a.log_probs_for({1, 2});
  CHECK((pa - b.log_probs_for({1, 2})).cwiseAbs().maxCoeff() == 0.0);
  CHECK((pa - a.log_probs_for({2, 1})).cwiseAbs().maxCoeff() > 1e-6);
  CHECK((pa - c.log_probs_for({1, 2})).cwiseAbs().maxCoeff() > 1e-6);
  CHECK(std::exp(pa(a.bos_id())) <= 1e-20);
}

TEST_CASE("beam equal to the whole tree reproduces the exhaustive ranking") {
  for (std::uint64_t seed : {7ull, 8ull, 9ull}) {
    const TableScorer table(3, seed);
    const int len = 3;
    SearchConfig cfg;
    cfg.beam_size = 27;  // 3^3: nothing is ever pruned
    cfg.max_tokens = len;
    const BatchResult got = batch_beam_search(table, frames(5), cfg, {make_root(table)}, false);
    const std::vector<RankedSequence> want = exhaustive_rank(table, len);
    REQUIRE(got.active.size() == want.size());
    CHECK(got.finished.empty());
    for (std::size_t i = 0; i < want.size(); ++i) {
      CHECK(got.active[i].tokens == want[i].tokens);
      CHECK(got.active[i].score == doctest::Approx(want[i].score).epsilon(1e-12));
    }
  }
}

TEST_CASE("ties break toward the lexicographically smaller sequence") {
  const UniformScorer scorer;
  SearchConfig cfg;
  cfg.beam_size = 4;
  const std::vector<Hypothesis> out =
      beam_step({make_root(scorer)}, scorer, frames(3), cfg, {}, true);
  REQUIRE(out.size() == 4);
  CHECK(out[0].tokens == std::vector<int>{0});
  CHECK(out[1].tokens == std::vector<int>{1});
  CHECK(out[2].tokens == std::vector<int>{2});
  CHECK(out[3].tokens == std::vector<int>{4});  // end sentinel last by token id
  CHECK(out[3].finished);
  CHECK_FALSE(out[0].finished);
}

TEST_CASE("beam_step rejects malformed inputs") {
  const UniformScorer scorer;
  SearchConfig cfg;
  CHECK_THROWS_AS(beam_step({}, scorer, frames(2), cfg, {}, true), SearchError);
  CHECK_THROWS_AS(beam_step({make_root(scorer)}, scorer, frames(0), cfg, {}, true), SearchError);
  Hypothesis finished = make_root(scorer);
  finished.finished = true;
  CHECK_THROWS_AS(beam_step({finished}, scorer, frames(2), cfg, {}, true), SearchError);
  Hypothesis off_prefix = make_root(scorer);
  CHECK_THROWS_AS(beam_step({off_prefix}, scorer, frames(2), cfg, {1}, true), SearchError);
}

TEST_CASE("non-finite scores surface as search errors") {
  SearchConfig cfg;
  const PoisonScorer nan_scorer(std::numeric_limits<double>::quiet_NaN());
  CHECK_THROWS_AS(beam_step({make_root(nan_scorer)}, nan_scorer, frames(2), cfg, {}, true),
                  SearchError);
  const PoisonScorer inf_scorer(kInf);
  CHECK_THROWS_AS(beam_step({make_root(inf_scorer)}, inf_scorer, frames(2), cfg, {}, true),
                  SearchError);
  const PoisonScorer neg_inf(-kInf);  // impossible continuations are legal
  CHECK_NOTHROW(beam_step({make_root(neg_inf)}, neg_inf, frames(2), cfg, {}, true));
}

TEST_CASE("immortal commit needs agreement and fixed endpoints") {
  SearchConfig cfg;
  const std::vector<Hypothesis> agree_fixed{
      crafted({5, 7, 1}, -1.0, {2, 6, 9}, {true, true, true}),
      crafted({5, 7, 2}, -2.0, {2, 6, 9}, {true, true, false}),
  };
  CHECK(immortal_prefix_commit(agree_fixed, 0, cfg) == 2);
  CHECK(immortal_prefix_commit(agree_fixed, 1, cfg) == 1);
  CHECK(immortal_prefix_commit(agree_fixed, 2, cfg) == 0);

  const std::vector<Hypothesis> unfixed{
      crafted({5, 7}, -1.0, {2, 6}, {true, false}),
      crafted({5, 7}, -2.0, {2, 6}, {true, true}),
  };
  CHECK(immortal_prefix_commit(unfixed, 0, cfg) == 1);

  const std::vector<Hypothesis> disagree_first{
      crafted({5}, -1.0, {2}, {true}),
      crafted({6}, -2.0, {2}, {true}),
  };
  CHECK(immortal_prefix_commit(disagree_first, 0, cfg) == 0);

  // The scan clips at the shortest hypothesis.
  const std::vector<Hypothesis> uneven{
      crafted({5, 7, 1}, -1.0, {2, 6, 9}, {true, true, true}),
      crafted({5}, -2.0, {2}, {true}),
  };
  CHECK(immortal_prefix_commit(uneven, 0, cfg) == 1);
  CHECK(immortal_prefix_commit({}, 0, cfg) == 0);
  CHECK_THROWS_AS(immortal_prefix_commit(uneven, 2, cfg), SearchError);
}

TEST_CASE("first-ranked commit follows the endpoint lag rule") {
  SearchConfig cfg;
  cfg.delta_first_ranked = 10.0;
  const Hypothesis best = crafted({5, 7, 1}, -1.0, {2, 6, 30}, {false, false, false});
  // Frontier 20: positions with t_c < 20 - 10 qualify until the first miss.
  CHECK(first_ranked_commit(best, 0, 20, cfg) == 2);
  CHECK(first_ranked_commit(best, 1, 20, cfg) == 1);
  CHECK(first_ranked_commit(best, 0, 12, cfg) == 0);  // 2 < 12-10 fails: strictly
  CHECK(first_ranked_commit(best, 0, 13, cfg) == 1);
  CHECK(first_ranked_commit(best, 0, 41, cfg) == 3);
  // Boundary is strict: t_c = 2 against frontier 12 and delta 10 stays put.
  const Hypothesis edge = crafted({5}, -1.0, {2}, {false});
  CHECK(first_ranked_commit(edge, 0, 12, cfg) == 0);
  CHECK(first_ranked_commit(edge, 0, 13, cfg) == 1);
  // Unobserved endpoints (t_c = -1) block the scan entirely.
  const Hypothesis unseen = crafted({5, 7}, -1.0, {-1, 2}, {false, false});
  CHECK(first_ranked_commit(unseen, 0, 50, cfg) == 0);
  SearchConfig inf_cfg;
  CHECK(first_ranked_commit(best, 0, 1000, inf_cfg) == 0);
  CHECK_THROWS_AS(first_ranked_commit(best, 4, 20, cfg), SearchError);
}

TEST_CASE("combined commit takes the larger of the two rules") {
  SearchConfig cfg;
  cfg.delta_first_ranked = 10.0;
  const std::vector<Hypothesis> hyps{
      crafted({5, 7, 1}, -1.0, {2, 6, 30}, {true, false, false}),
      crafted({5, 9}, -2.0, {2, 6}, {true, false}),
  };
  // Immortal commits 1 (agreement + fixed at position 0 only); first-ranked
  // commits 2 at frontier 20.
  CHECK(immortal_prefix_commit(hyps, 0, cfg) == 1);
  CHECK(first_ranked_commit(hyps.front(), 0, 20, cfg) == 2);
  CHECK(combined_commit(hyps, 0, 20, cfg) == 2);
  SearchConfig no_fr = cfg;
  no_fr.delta_first_ranked = kInf;
  CHECK(combined_commit(hyps, 0, 20, no_fr) == 1);
}

TEST_CASE("scripted stream: immortal strategy commits as endpoints fix") {
  const ScriptRun run = run_script(script_config(CommitStrategy::kImmortal, 2.0, kInf));
  REQUIRE(run.log.entries.size() == 3);
  CHECK(run.log.entries[0].tag == "immortal");
  CHECK(run.log.entries[0].stream_time_ms == 600.0);
  CHECK(run.log.entries[1].tag == "immortal");
  CHECK(run.log.entries[1].stream_time_ms == 900.0);
  CHECK(run.log.entries[2].tag == "close");
  CHECK(run.log.entries[2].stream_time_ms == 1200.0);
  CHECK(run.log.tokens() == std::vector<int>{0, 0, 0});
}

TEST_CASE("scripted stream: first-ranked strategy commits by lag alone") {
  const ScriptRun run = run_script(script_config(CommitStrategy::kFirstRanked, kInf, 3.0));
  REQUIRE(run.log.entries.size() == 3);
  CHECK(run.log.entries[0].tag == "first_ranked");
  CHECK(run.log.entries[0].stream_time_ms == 600.0);
  CHECK(run.log.entries[1].tag == "first_ranked");
  CHECK(run.log.entries[1].stream_time_ms == 900.0);
  CHECK(run.log.entries[2].tag == "close");
  CHECK(run.log.tokens() == std::vector<int>{0, 0, 0});
}

TEST_CASE("scripted stream: aggressive combined lag commits everything mid-stream") {
  const ScriptRun run = run_script(script_config(CommitStrategy::kCombined, 2.0, 1.0));
  REQUIRE(run.log.entries.size() == 3);
  CHECK(run.log.entries[0].tag == "first_ranked");
  CHECK(run.log.entries[0].stream_time_ms == 400.0);
  CHECK(run.log.entries[1].tag == "first_ranked");
  CHECK(run.log.entries[1].stream_time_ms == 700.0);
  CHECK(run.log.entries[2].tag == "first_ranked");
  CHECK(run.log.entries[2].stream_time_ms == 1000.0);
  CHECK(run.log.tokens() == std::vector<int>{0, 0, 0});
}

TEST_CASE("scripted stream: offline strategy commits only at close") {
  const ScriptRun run = run_script(script_config(CommitStrategy::kOffline, kInf, kInf));
  REQUIRE(run.log.entries.size() == 3);
  for (const CommitEntry& e : run.log.entries) {
    CHECK(e.tag == "close");
    CHECK(e.stream_time_ms == 1200.0);
  }
  CHECK(run.log.tokens() == std::vector<int>{0, 0, 0});
}

TEST_CASE("committed prefixes only ever grow, under every strategy") {
  for (const SearchConfig& cfg :
       {script_config(CommitStrategy::kImmortal, 2.0, kInf),
        script_config(CommitStrategy::kFirstRanked, kInf, 3.0),
        script_config(CommitStrategy::kCombined, 2.0, 1.0),
        script_config(CommitStrategy::kOffline, kInf, kInf)}) {
    const ScriptRun run = run_script(cfg);
    for (std::size_t i = 1; i < run.committed_after_tick.size(); ++i) {
      const std::vector<int>& prev = run.committed_after_tick[i - 1];
      const std::vector<int>& cur = run.committed_after_tick[i];
      REQUIRE(cur.size() >= prev.size());
      CHECK(std::equal(prev.begin(), prev.end(), cur.begin()));
    }
    CHECK(run.committed_after_tick.back() == std::vector<int>{0, 0, 0});
  }
}

TEST_CASE("the length cap truncates the transcript") {
  const ScriptScorer scorer({0, 0, 0}, {2, 5, 8});
  SearchConfig cfg = script_config(CommitStrategy::kImmortal, 2.0, kInf);
  cfg.max_tokens = 2;
  StreamingSearch search(scorer, cfg);
  for (Index f = 1; f <= 12; ++f) {
    search.tick(frames(f), f == 12, 100.0 * static_cast<double>(f));
  }
  CHECK(search.committed() == std::vector<int>{0, 0});
}

TEST_CASE("a stream closed on its first tick decodes offline") {
  const ScriptScorer scorer({0, 0, 0}, {2, 5, 8});
  StreamingSearch search(scorer, script_config(CommitStrategy::kCombined, 2.0, 1.0));
  const TickResult res = search.tick(frames(12), true, 1200.0);
  CHECK(search.committed() == std::vector<int>{0, 0, 0});
  CHECK(res.new_commits.size() == 3);
  for (const CommitEntry& e : res.new_commits) CHECK(e.tag == "close");
  CHECK(search.closed());
}

TEST_CASE("stream validation catches misuse") {
  const ScriptScorer scorer({0}, {1});
  StreamingSearch search(scorer, script_config(CommitStrategy::kOffline, kInf, kInf));
  search.tick(frames(0), false, 0.0);  // an empty frontier is fine
  search.tick(frames(4), false, 100.0);
  CHECK_THROWS_AS(search.tick(frames(2), false, 200.0), InputError);
  CHECK_THROWS_AS(search.tick(frames(4), false, 50.0), InputError);
  search.tick(frames(6), true, 300.0);
  CHECK_THROWS_AS(search.tick(frames(6), true, 400.0), InputError);
}

TEST_CASE("search config validation") {
  SearchConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  SearchConfig bad = cfg;
  bad.beam_size = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.theta = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.theta = 1.5;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.delta_immortal = -1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.max_tokens = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CHECK(commit_strategy_from_string("combined") == CommitStrategy::kCombined);
  CHECK(to_string(CommitStrategy::kFirstRanked) == "first_ranked");
  CHECK_THROWS_AS(commit_strategy_from_string("bogus"), ConfigError);
}

}  // TEST_SUITE
