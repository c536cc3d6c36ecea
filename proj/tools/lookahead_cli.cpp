// Command-line front end. Exit codes: 0 success, 1 usage error,
// 2 data/format error, 3 runtime/capacity error.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lookahead/experiment.hpp"

namespace fs = std::filesystem;
using namespace lookahead;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kRuntime = 3 };

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_text(path, text);
  }
}

std::size_t resolve_threads(std::size_t flag) { return flag > 0 ? flag : default_threads(); }

struct GenCorpusArgs {
  std::string config;
  std::string out_dir;
  std::optional<std::size_t> vocab_size, context_length, sentences, test_sentences;
  std::optional<double> mean_length, length_stddev, peakedness;
  std::optional<std::uint64_t> seed;
};

void run_gen_corpus(const GenCorpusArgs& a) {
  Json syn = Json::object();
  std::size_t test_sentences = 0;
  std::uint64_t seed = 0;
  if (!a.config.empty()) {
    const Json cfg = read_json_file(a.config);
    const Json corpus = cfg.value("corpus", Json::object());
    syn = corpus.value("synthetic", Json::object());
    test_sentences = corpus.value("test_sentences", std::size_t{0});
    seed = cfg.value("seed", std::uint64_t{0});
  }
  if (a.vocab_size) syn["vocab_size"] = *a.vocab_size;
  if (a.context_length) syn["context_length"] = *a.context_length;
  if (a.sentences) syn["n_sentences"] = *a.sentences;
  if (a.mean_length) syn["mean_length"] = *a.mean_length;
  if (a.length_stddev) syn["length_stddev"] = *a.length_stddev;
  if (a.peakedness) syn["peakedness"] = *a.peakedness;
  if (a.seed) syn["seed"] = *a.seed;
  if (a.test_sentences) test_sentences = *a.test_sentences;
  if (!syn.contains("seed")) syn["seed"] = seed;

  Json cfg{{"version", kConfigSchemaVersion},
           {"corpus", {{"synthetic", syn}, {"test_sentences", std::max<std::size_t>(test_sentences, 1)}}},
           {"strategies", Json::array({{{"type", "greedy"}}})}};
  auto parsed = parse_experiment_config(cfg);
  parsed.test_sentences = test_sentences;
  auto spec = *parsed.synthetic;
  spec.n_sentences += test_sentences;
  const auto syn_corpus = generate_synthetic(spec);

  std::error_code ec;
  fs::create_directories(a.out_dir, ec);
  if (ec) throw DataError("cannot create output directory " + a.out_dir + ": " + ec.message());
  const auto& pairs = syn_corpus.corpus.pairs;
  const auto split = pairs.end() - static_cast<std::ptrdiff_t>(test_sentences);
  const auto& vocab = syn_corpus.corpus.vocab;
  const auto dir = fs::path(a.out_dir);
  write_corpus(std::vector<SentencePair>(pairs.begin(), split), vocab, TokenizeMode::kWhitespace,
               (dir / "train.src").string(), (dir / "train.tgt").string());
  if (test_sentences > 0) {
    write_corpus(std::vector<SentencePair>(split, pairs.end()), vocab, TokenizeMode::kWhitespace,
                 (dir / "test.src").string(), (dir / "test.tgt").string());
  }
  save_model(AnyModel(syn_corpus.model), (dir / "generator.lkam").string());
  std::cerr << "wrote " << pairs.size() - test_sentences << " training and " << test_sentences
            << " test pairs to " << a.out_dir << "\n";
}

struct TrainArgs {
  std::string source, target, mode = "whitespace", out, trace;
  std::size_t order = 3;
  bool no_source = false;
  double gamma = 0.0, lr = 0.1;
  std::size_t epochs = 10, batch_size = 32;
  std::uint64_t seed = 0;
};

void run_train(const TrainArgs& a) {
  const auto corpus = load_corpus(a.source, a.target, parse_tokenize_mode(a.mode));
  TrainConfig tc;
  tc.gamma = a.gamma;
  tc.learning_rate = a.lr;
  tc.epochs = a.epochs;
  tc.batch_size = a.batch_size;
  tc.seed = a.seed;
  tc.validate();
  if (a.order < 1) throw UsageError("--order must be >= 1");
  const bool src = !a.no_source;
  auto model = make_ngram_model(corpus.vocab, a.order, src, corpus.pairs);
  const auto events = extract_events(a.order, src, corpus.pairs);
  auto res = train(std::move(model), events, tc);
  save_model(AnyModel(std::move(res.model)), a.out);
  if (!a.trace.empty()) {
    std::vector<Json> records;
    for (const auto& e : res.trace) {
      records.push_back(
          {{"kind", "train_epoch"}, {"gamma", a.gamma}, {"epoch", e.epoch}, {"nll", e.nll}, {"eos_loss", e.eos_loss},
           {"total", e.total}});
    }
    emit(a.trace, to_ndjson(records));
  }
}

struct DecodeArgs {
  std::string model, source, mode = "whitespace", out, stats, strategy = "greedy";
  std::size_t k = 1, beta = 1, rollouts = 20, max_length = 0, threads = 0;
  std::uint64_t seed = 0;
};

void run_decode(const DecodeArgs& a) {
  const auto model = load_model(a.model);
  const auto mode = parse_tokenize_mode(a.mode);
  const auto sources = load_sources(a.source, mode, model.vocabulary());
  Strategy s;
  s.kind = parse_strategy_kind(a.strategy);
  s.k = a.k;
  s.beam_width = a.beta;
  s.n_rollouts = a.rollouts;
  const auto results = model.visit(
      [&](const auto& m) { return decode_all(m, sources, s, a.max_length, a.seed, resolve_threads(a.threads)); });
  std::string text;
  std::vector<Json> records;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    text += decode_text(r.tokens, model.vocabulary(), mode);
    text += '\n';
    records.push_back({{"kind", "sentence"},
                       {"index", i},
                       {"strategy", s.label()},
                       {"score", r.score},
                       {"length", strip_token(std::span<const TokenId>(r.tokens), kEos).size()},
                       {"finished", r.finished()},
                       {"nodes_expanded", r.stats.nodes_expanded},
                       {"paths_pruned", r.stats.paths_pruned},
                       {"leaves_evaluated", r.stats.leaves_evaluated}});
  }
  emit(a.out, text);
  if (!a.stats.empty()) emit(a.stats, to_ndjson(records));
}

struct EvaluateArgs {
  std::string hyp, ref, mode = "whitespace", out;
  std::vector<std::size_t> min_lengths;
  bool smooth = false;
};

void run_evaluate(const EvaluateArgs& a) {
  const auto mode = parse_tokenize_mode(a.mode);
  const auto hyp_lines = read_lines(a.hyp);
  const auto ref_lines = read_lines(a.ref);
  if (hyp_lines.size() != ref_lines.size()) {
    throw IngestionError("hypothesis and reference line counts differ", std::min(hyp_lines.size(), ref_lines.size()) + 1);
  }
  if (ref_lines.empty()) throw DataError("reference file is empty: " + a.ref);
  using Seq = std::vector<std::string>;
  std::vector<Seq> h, r;
  for (const auto& l : hyp_lines) h.push_back(tokenize(l, mode));
  for (const auto& l : ref_lines) r.push_back(tokenize(l, mode));
  const auto rep = evaluate(std::span<const Seq>(h), std::span<const Seq>(r), a.min_lengths, BleuOptions{a.smooth});
  Json out{{"kind", "evaluation"},
           {"sentences", h.size()},
           {"bleu", rep.bleu},
           {"n_gram_precisions", rep.n_gram_precisions},
           {"brevity_penalty", rep.brevity_penalty},
           {"avg_length_diff", rep.avg_length_diff},
           {"hypothesis_length", rep.hypothesis_length},
           {"reference_length", rep.reference_length}};
  Json buckets = Json::array();
  for (const auto& [min_len, b] : rep.per_bucket) {
    buckets.push_back(
        {{"min_target_length", min_len}, {"bleu", b.bleu}, {"avg_length_diff", b.avg_length_diff}, {"count", b.count}});
  }
  out["per_bucket"] = buckets;
  emit(a.out, out.dump() + "\n");
}

struct SweepArgs {
  std::string config, out, csv;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads, sentences, k, rollouts;
  std::optional<std::vector<double>> gammas;
  bool timing = false;
};

Json overridden_config(const SweepArgs& a) {
  Json j = read_json_file(a.config);
  if (!j.is_object()) throw UsageError("config must be a JSON object");
  if (a.seed) j["seed"] = *a.seed;
  if (a.threads) j["threads"] = *a.threads;
  if (a.timing) j["timing"] = true;
  if (a.gammas) j["train"]["gammas"] = *a.gammas;
  if (!a.out.empty()) j["output"]["ndjson"] = a.out;
  if (!a.csv.empty()) j["output"]["csv"] = a.csv;
  if (a.sentences) j["bench"]["sentences"] = *a.sentences;
  if (a.k) j["bench"]["k"] = *a.k;
  if (a.rollouts) j["bench"]["n_rollouts"] = *a.rollouts;
  return j;
}

void run_sweep(const SweepArgs& a) {
  const auto cfg = parse_experiment_config(overridden_config(a));
  const auto res = run_experiment(cfg);
  emit(cfg.ndjson_path, to_ndjson(res.records));
  if (!cfg.csv_path.empty()) write_text(cfg.csv_path, results_csv(cfg, res.cells));
}

void run_bench_cmd(const SweepArgs& a) {
  const auto cfg = parse_experiment_config(overridden_config(a));
  const auto res = run_bench(cfg);
  emit(cfg.ndjson_path, to_ndjson(res.records));
  for (const auto& e : res.entries) {
    std::cerr << e.strategy.label() << ": " << e.mean_seconds * 1e3 << " ms/sentence, " << e.mean_nodes
              << " nodes/sentence over " << e.sentences << " sentences\n";
  }
  std::cerr << "rollout / look-ahead time ratio: " << res.ratio() << "\n";
}

void add_sweep_options(CLI::App* cmd, SweepArgs& a, bool bench) {
  cmd->add_option("-c,--config", a.config, "Experiment config (JSON)")->required();
  cmd->add_option("-o,--out", a.out, "NDJSON output path (overrides output.ndjson; '-' for stdout)");
  cmd->add_option("--seed", a.seed, "Global seed (overrides config)");
  cmd->add_option("--threads", a.threads, "Worker threads (overrides config and $LOOKAHEAD_THREADS)");
  cmd->add_option("--gamma", a.gammas, "EOS-loss weights to train (overrides train.gammas)");
  if (bench) {
    cmd->add_option("--sentences", a.sentences, "Number of benchmark sentences");
    cmd->add_option("-k", a.k, "Look-ahead depth");
    cmd->add_option("--rollouts", a.rollouts, "Rollouts per candidate token");
  } else {
    cmd->add_option("--csv", a.csv, "CSV output path (overrides output.csv)");
    cmd->add_flag("--timing", a.timing, "Record wall-clock time in the results");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"k-step look-ahead decoding experiments"};
  app.set_version_flag("--version", LOOKAHEAD_VERSION);
  app.require_subcommand(1);

  GenCorpusArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-corpus", "Generate a synthetic parallel corpus and its generating model");
  gen_cmd->add_option("-o,--out-dir", gen.out_dir, "Output directory")->required();
  gen_cmd->add_option("-c,--config", gen.config, "Read corpus.synthetic from this config");
  gen_cmd->add_option("--vocab-size", gen.vocab_size, "Vocabulary size including reserved tokens");
  gen_cmd->add_option("--context-length", gen.context_length, "Generator context length");
  gen_cmd->add_option("--sentences", gen.sentences, "Training sentence pairs");
  gen_cmd->add_option("--test-sentences", gen.test_sentences, "Test sentence pairs");
  gen_cmd->add_option("--mean-length", gen.mean_length, "Mean sentence length");
  gen_cmd->add_option("--length-stddev", gen.length_stddev, "Sentence length standard deviation");
  gen_cmd->add_option("--peakedness", gen.peakedness, "Probability mass of each context's preferred token");
  gen_cmd->add_option("--seed", gen.seed, "Generator seed");

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train an n-gram softmax model");
  train_cmd->add_option("--source", tr.source, "Source sentences, one per line")->required();
  train_cmd->add_option("--target", tr.target, "Target sentences, one per line")->required();
  train_cmd->add_option("-o,--out", tr.out, "Model output path")->required();
  train_cmd->add_option("--mode", tr.mode, "Tokenization: whitespace | character")->capture_default_str();
  train_cmd->add_option("--order", tr.order, "n-gram order")->capture_default_str();
  train_cmd->add_flag("--no-source", tr.no_source, "Ignore the source (unconditional language model)");
  train_cmd->add_option("--gamma", tr.gamma, "Auxiliary EOS loss weight")->capture_default_str();
  train_cmd->add_option("--lr", tr.lr, "Learning rate")->capture_default_str();
  train_cmd->add_option("--epochs", tr.epochs, "Epochs")->capture_default_str();
  train_cmd->add_option("--batch-size", tr.batch_size, "Mini-batch size")->capture_default_str();
  train_cmd->add_option("--seed", tr.seed, "Shuffle seed")->capture_default_str();
  train_cmd->add_option("--trace", tr.trace, "Write the per-epoch loss trace (NDJSON) here");

  DecodeArgs dec;
  auto* decode_cmd = app.add_subcommand("decode", "Decode source sentences with one strategy");
  decode_cmd->add_option("-m,--model", dec.model, "Model file")->required();
  decode_cmd->add_option("--source", dec.source, "Source sentences, one per line")->required();
  decode_cmd->add_option("-o,--out", dec.out, "Hypothesis output path (default stdout)");
  decode_cmd->add_option("--stats", dec.stats, "Per-sentence search statistics (NDJSON)");
  decode_cmd->add_option("--mode", dec.mode, "Tokenization: whitespace | character")->capture_default_str();
  decode_cmd->add_option("-s,--strategy", dec.strategy, "greedy | lookahead | oracle | beam | rollout")
      ->capture_default_str();
  decode_cmd->add_option("-k", dec.k, "Look-ahead / rollout depth")->capture_default_str();
  decode_cmd->add_option("--beta", dec.beta, "Beam width")->capture_default_str();
  decode_cmd->add_option("--rollouts", dec.rollouts, "Rollouts per candidate token")->capture_default_str();
  decode_cmd->add_option("--max-length", dec.max_length, "Length budget (0: 2 * source length + 10)");
  decode_cmd->add_option("--seed", dec.seed, "Rollout seed")->capture_default_str();
  decode_cmd->add_option("--threads", dec.threads, "Worker threads (default $LOOKAHEAD_THREADS or 1)");

  EvaluateArgs ev;
  auto* eval_cmd = app.add_subcommand("evaluate", "Score hypotheses against references");
  eval_cmd->add_option("--hyp", ev.hyp, "Hypotheses, one per line")->required();
  eval_cmd->add_option("--ref", ev.ref, "References, one per line")->required();
  eval_cmd->add_option("--mode", ev.mode, "Tokenization: whitespace | character")->capture_default_str();
  eval_cmd->add_option("--min-length", ev.min_lengths, "Report a bucket for references at least this long");
  eval_cmd->add_flag("--smooth", ev.smooth, "Smooth zero n-gram match counts");
  eval_cmd->add_option("-o,--out", ev.out, "Report output path (default stdout)");

  SweepArgs sw;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run every configured (gamma x strategy) cell");
  add_sweep_options(sweep_cmd, sw, false);

  SweepArgs bn;
  auto* bench_cmd = app.add_subcommand("bench", "Time look-ahead against the rollout baseline");
  add_sweep_options(bench_cmd, bn, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*gen_cmd) run_gen_corpus(gen);
    if (*train_cmd) run_train(tr);
    if (*decode_cmd) run_decode(dec);
    if (*eval_cmd) run_evaluate(ev);
    if (*sweep_cmd) run_sweep(sw);
    if (*bench_cmd) run_bench_cmd(bn);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const RuntimeFailure& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return kRuntime;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return kRuntime;
  }
  return kOk;
}
