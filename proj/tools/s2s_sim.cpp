// Copyright 2026 the s2s-stream authors
// Command-line driver: corpus generation, model construction, streaming
// decode, setting sweeps, and self-checks against the shipped oracles.
//
// Licensed under the Apache License, Version 2.0

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "s2s/corpus.hpp"
#include "s2s/selfcheck.hpp"
#include "s2s/simulate.hpp"
#include "s2s/tensor_io.hpp"
#include "s2s/toy_model.hpp"

namespace {

using namespace s2s;

std::vector<int> parse_tokens(const std::string& text) {
  std::vector<int> tokens;
  std::istringstream is(text);
  int v = 0;
  while (is >> v) tokens.push_back(v);
  return tokens;
}

void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw InputError("cannot open '" + path + "' for writing");
  os << text;
}

int run_gen_corpus(const CorpusSpec& spec, const std::string& out_dir) {
  const std::vector<SyntheticUtterance> utts = generate_corpus(spec);
  write_corpus(out_dir, utts);
  std::cout << "wrote " << utts.size() << " utterances to " << out_dir << "\n";
  return 0;
}

int run_build_model(const ToyModelSpec& spec, const std::string& out_path) {
  const ModelParams model = build_toy_model(spec);
  save_model(out_path, model);
  std::cout << "wrote " << to_string(spec.policy) << " model (" << model_tensors(model).size()
            << " tensors) to " << out_path << "\n";
  return 0;
}

int run_decode(const std::string& model_path, const std::string& features_path,
               const std::string& reference_text, const RunConfig& cfg) {
  const ModelParams model = load_model(model_path);
  const FeatureSequence feats = load_features(features_path);
  const std::vector<int> reference = parse_tokens(reference_text);
  const StreamResult res = run_stream(model, feats, reference, cfg, features_path);
  std::cout << format_commit_log(res.log);
  if (!reference_text.empty()) {
    std::printf("# wer=%.6f latency=%.6f tokens=%zu\n", res.report.wer, res.report.latency,
                res.transcript.size());
  }
  return 0;
}

int run_sweep_cmd(const std::string& model_path, const std::string& corpus_dir,
                  const std::vector<std::string>& strategies, const std::vector<int>& beams,
                  const std::vector<double>& deltas, const RunConfig& base, int limit,
                  const std::string& out_path) {
  const ModelParams model = load_model(model_path);
  std::vector<UtteranceData> utts = load_utterances(corpus_dir);
  if (limit > 0 && static_cast<int>(utts.size()) > limit)
    utts.resize(static_cast<std::size_t>(limit));

  std::vector<SweepSetting> settings;
  for (const std::string& name : strategies) {
    const CommitStrategy strategy = commit_strategy_from_string(name);
    for (int beam : beams) {
      if (strategy == CommitStrategy::kOffline) {
        settings.push_back({strategy, beam, std::numeric_limits<double>::infinity(),
                            std::numeric_limits<double>::infinity()});
        continue;
      }
      for (double d : deltas) {
        SweepSetting s;
        s.strategy = strategy;
        s.beam = beam;
        s.delta_immortal = strategy == CommitStrategy::kFirstRanked
                               ? std::numeric_limits<double>::infinity()
                               : d;
        s.delta_first_ranked = strategy == CommitStrategy::kImmortal
                                   ? std::numeric_limits<double>::infinity()
                                   : d;
        settings.push_back(s);
      }
    }
  }
  const std::vector<SweepRow> rows = run_sweep(model, utts, settings, base);
  write_text(out_path, to_csv(rows));
  if (out_path != "-")
    std::cout << "wrote " << rows.size() << " rows (" << settings.size() << " settings x "
              << utts.size() << " utterances + summaries) to " << out_path << "\n";
  return 0;
}

int run_grad_check(int instances, double tolerance, std::uint64_t seed) {
  double worst = 0.0;
  int failures = 0;
  for (int i = 0; i < instances; ++i) {
    const GradCheckCase c = make_grad_case(seed + static_cast<std::uint64_t>(i));
    const double err = grad_check_error(c);
    worst = std::max(worst, err);
    if (err > tolerance) ++failures;
  }
  std::printf("grad-check: %d instances, worst relative error %.3e, tolerance %.1e\n", instances,
              worst, tolerance);
  if (failures > 0) {
    std::fprintf(stderr, "grad-check: %d instances exceeded tolerance\n", failures);
    return 1;
  }
  return 0;
}

int run_oracle_check(int trials, std::uint64_t seed) {
  Rng rng(seed);
  int bad = 0;

  // Edit distance vs the full-matrix reference.
  for (int i = 0; i < trials; ++i) {
    const int vocab = static_cast<int>(rng.uniform_int(2, 8));
    std::vector<int> a(static_cast<std::size_t>(rng.uniform_int(0, 12)));
    std::vector<int> b(static_cast<std::size_t>(rng.uniform_int(0, 12)));
    for (int& x : a) x = static_cast<int>(rng.uniform_int(0, vocab - 1));
    for (int& x : b) x = static_cast<int>(rng.uniform_int(0, vocab - 1));
    if (edit_distance(a, b) != edit_distance_reference(a, b)) ++bad;
  }
  std::printf("oracle-check edit-distance: %d trials, %d mismatches\n", trials, bad);

  // Covering endpoint vs the plain-scan reference.
  int bad_ep = 0;
  for (int i = 0; i < trials; ++i) {
    const Index n = rng.uniform_int(1, 40);
    Vector attn(n);
    for (Index t = 0; t < n; ++t) attn[t] = rng.uniform();
    attn /= attn.sum();
    const double theta = rng.uniform(0.05, 1.0);
    if (covering_endpoint(attn, theta) != covering_endpoint_reference(attn, theta)) ++bad_ep;
  }
  std::printf("oracle-check endpoint: %d trials, %d mismatches\n", trials, bad_ep);

  // Beam search at full width vs exhaustive enumeration.
  int bad_beam = 0;
  const int beam_trials = std::min(trials, 50);
  for (int i = 0; i < beam_trials; ++i) {
    const int vocab = static_cast<int>(rng.uniform_int(2, 4));
    const int length = static_cast<int>(rng.uniform_int(2, 4));
    const TableScorer table(vocab, seed + static_cast<std::uint64_t>(1000 + i));
    const std::vector<RankedSequence> truth = exhaustive_rank(table, length);
    EncoderStates enc;
    enc.states = Matrix::Zero(5, 1);
    enc.stable_upto = 5;
    SearchConfig cfg;
    cfg.beam_size = static_cast<int>(truth.size());
    cfg.max_tokens = length;
    const BatchResult res = batch_beam_search(table, enc, cfg, {make_root(table)}, false);
    if (res.active.size() != truth.size()) {
      ++bad_beam;
      continue;
    }
    for (std::size_t k = 0; k < truth.size(); ++k) {
      if (res.active[k].tokens != truth[k].tokens ||
          std::abs(res.active[k].score - truth[k].score) > 1e-9) {
        ++bad_beam;
        break;
      }
    }
  }
  std::printf("oracle-check beam: %d trials, %d mismatches\n", beam_trials, bad_beam);

  return (bad + bad_ep + bad_beam) > 0 ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"streaming attention decoder simulator"};
  app.require_subcommand(1);

  // gen-corpus
  CorpusSpec corpus_spec;
  std::string corpus_out = "corpus";
  auto* gen = app.add_subcommand("gen-corpus", "generate a synthetic corpus");
  gen->add_option("--out", corpus_out, "output directory");
  gen->add_option("--utterances", corpus_spec.utterances, "number of utterances");
  gen->add_option("--seed", corpus_spec.seed, "corpus seed");
  gen->add_option("--sigma", corpus_spec.noise_sigma, "feature noise sigma");
  gen->add_option("--vocab", corpus_spec.vocab, "token vocabulary size");
  gen->add_option("--feat-dim", corpus_spec.feat_dim, "feature dimensionality");
  gen->add_option("--min-tokens", corpus_spec.min_tokens, "min tokens per utterance");
  gen->add_option("--max-tokens", corpus_spec.max_tokens, "max tokens per utterance");
  gen->add_option("--trail-frames", corpus_spec.trail_frames, "trailing silence, encoder frames");

  // build-model
  ToyModelSpec model_spec;
  std::string model_out = "model.s2sw";
  std::string policy_name = "chunked";
  std::string backward_name = "constant";
  auto* build = app.add_subcommand("build-model", "construct model weights");
  build->add_option("--out", model_out, "output weight file");
  build->add_option("--policy", policy_name, "unidirectional|bidirectional|chunked");
  build->add_option("--chunk-size", model_spec.chunk_size, "chunk size, encoder frames");
  build->add_option("--backward-init", backward_name, "constant|previous_chunk");
  build->add_option("--vocab", model_spec.vocab, "token vocabulary size");
  build->add_option("--feat-dim", model_spec.feat_dim, "feature dimensionality");

  // shared decode/sweep settings
  RunConfig run_cfg;
  std::string strategy_name = "offline";
  std::string model_path = "model.s2sw";

  // decode
  std::string features_path;
  std::string reference_text;
  auto* decode = app.add_subcommand("decode", "stream one utterance, print the commit log");
  decode->add_option("--model", model_path, "weight file")->required();
  decode->add_option("--features", features_path, "feature file")->required();
  decode->add_option("--reference", reference_text, "reference tokens, space separated");
  decode->add_option("--strategy", strategy_name, "offline|immortal|first_ranked|combined");
  decode->add_option("--beam", run_cfg.search.beam_size, "beam size");
  decode->add_option("--theta", run_cfg.search.theta, "endpoint coverage threshold");
  decode->add_option("--delta-immortal", run_cfg.search.delta_immortal,
                     "fixation lag, encoder frames");
  decode->add_option("--delta-first-ranked", run_cfg.search.delta_first_ranked,
                     "first-ranked lag, encoder frames");
  decode->add_option("--max-tokens", run_cfg.search.max_tokens, "hypothesis length cap");
  decode->add_option("--tick-ms", run_cfg.tick_ms, "stream tick, milliseconds");

  // sweep
  std::string corpus_dir = "corpus";
  std::string sweep_out = "-";
  std::vector<std::string> sweep_strategies = {"first_ranked"};
  std::vector<int> sweep_beams = {8};
  std::vector<double> sweep_deltas = {10, 30, 50, 70};
  int sweep_limit = 0;
  auto* sweep = app.add_subcommand("sweep", "decode a corpus across settings, emit CSV");
  sweep->add_option("--model", model_path, "weight file")->required();
  sweep->add_option("--corpus", corpus_dir, "corpus directory")->required();
  sweep->add_option("--strategies", sweep_strategies, "strategies to sweep")->delimiter(',');
  sweep->add_option("--beams", sweep_beams, "beam sizes")->delimiter(',');
  sweep->add_option("--deltas", sweep_deltas, "delta values, encoder frames")->delimiter(',');
  sweep->add_option("--theta", run_cfg.search.theta, "endpoint coverage threshold");
  sweep->add_option("--max-tokens", run_cfg.search.max_tokens, "hypothesis length cap");
  sweep->add_option("--tick-ms", run_cfg.tick_ms, "stream tick, milliseconds");
  sweep->add_option("--limit", sweep_limit, "use only the first N utterances");
  sweep->add_option("--out", sweep_out, "CSV path, '-' for stdout");

  // grad-check
  int grad_instances = 100;
  double grad_tolerance = 1e-4;
  std::uint64_t grad_seed = 17;
  auto* grad = app.add_subcommand("grad-check", "finite-difference gradient check");
  grad->add_option("--instances", grad_instances, "number of random instances");
  grad->add_option("--tolerance", grad_tolerance, "max relative error");
  grad->add_option("--seed", grad_seed, "base seed");

  // oracle-check
  int oracle_trials = 200;
  std::uint64_t oracle_seed = 23;
  auto* oracle = app.add_subcommand("oracle-check", "cross-check fast paths against oracles");
  oracle->add_option("--trials", oracle_trials, "trials per suite");
  oracle->add_option("--seed", oracle_seed, "base seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return run_gen_corpus(corpus_spec, corpus_out);
    if (build->parsed()) {
      model_spec.policy = encoder_policy_from_string(policy_name);
      model_spec.backward_init = backward_init_from_string(backward_name);
      return run_build_model(model_spec, model_out);
    }
    if (decode->parsed()) {
      run_cfg.search.strategy = commit_strategy_from_string(strategy_name);
      return run_decode(model_path, features_path, reference_text, run_cfg);
    }
    if (sweep->parsed())
      return run_sweep_cmd(model_path, corpus_dir, sweep_strategies, sweep_beams, sweep_deltas,
                           run_cfg, sweep_limit, sweep_out);
    if (grad->parsed()) return run_grad_check(grad_instances, grad_tolerance, grad_seed);
    if (oracle->parsed()) return run_oracle_check(oracle_trials, oracle_seed);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
