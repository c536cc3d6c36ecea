#pragma once

// Experiment runner: corpus -> (trained model per gamma) -> decode the test
// split with every configured strategy -> one result record per cell.
//
// Config schema (version 1), every field optional unless noted:
//
//   {
//     "version": 1,                       // required
//     "name": "length_trend",
//     "seed": 1,                          // default for every other seed
//     "threads": 0,                       // 0: $LOOKAHEAD_THREADS, else 1
//     "timing": false,                    // write wall_time (breaks byte-identity)
//     "max_length": 0,                    // 0: 2 * |source| + 10
//     "corpus": {
//       "synthetic": { "vocab_size": 20, "context_length": 2, "n_sentences": 1000,
//                      "mean_length": 10, "length_stddev": 3, "peakedness": 0.6,
//                      "source_conditioned": true, "seed": <seed> },
//       "test_sentences": 200,
//       -- or --
//       "files": { "train_source": "...", "train_target": "...",
//                  "test_source": "...", "test_target": "...", "mode": "whitespace" }
//     },
//     "model": { "type": "ngram" | "generator", "order": 3, "source_conditioned": true },
//     "train": { "gammas": [0.0], "learning_rate": 0.1, "epochs": 10,
//                "batch_size": 32, "seed": <seed> },
//     "strategies": [ { "type": "greedy" },
//                     { "type": "lookahead", "k": [1, 2, 3] },
//                     { "type": "oracle", "k": [2] },
//                     { "type": "beam", "beta": [1, 10] },
//                     { "type": "rollout", "k": [3], "n_rollouts": [20] } ],
//     "eval": { "min_target_lengths": [0, 25], "smooth": false },
//     "bench": { "sentences": 100, "k": 3, "n_rollouts": 20 },
//     "output": { "ndjson": "results.ndjson", "csv": "results.csv" }
//   }

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "lookahead/any_model.hpp"
#include "lookahead/corpus.hpp"
#include "lookahead/decoders.hpp"
#include "lookahead/metrics.hpp"
#include "lookahead/model_io.hpp"
#include "lookahead/synthetic.hpp"
#include "lookahead/training.hpp"

#ifndef LOOKAHEAD_VERSION
#define LOOKAHEAD_VERSION "0.0.0"
#endif

namespace lookahead {

using Json = nlohmann::json;

inline constexpr int kConfigSchemaVersion = 1;
inline constexpr int kResultSchemaVersion = 1;
inline constexpr const char* kThreadsEnvVar = "LOOKAHEAD_THREADS";

enum class StrategyKind { kGreedy, kLookahead, kOracle, kBeam, kRollout };

inline std::string_view to_string(StrategyKind k) {
  switch (k) {
    case StrategyKind::kGreedy: return "greedy";
    case StrategyKind::kLookahead: return "lookahead";
    case StrategyKind::kOracle: return "oracle";
    case StrategyKind::kBeam: return "beam";
    case StrategyKind::kRollout: return "rollout";
  }
  return "?";
}

inline StrategyKind parse_strategy_kind(std::string_view s) {
  if (s == "greedy") return StrategyKind::kGreedy;
  if (s == "lookahead" || s == "la") return StrategyKind::kLookahead;
  if (s == "oracle") return StrategyKind::kOracle;
  if (s == "beam") return StrategyKind::kBeam;
  if (s == "rollout" || s == "mcts") return StrategyKind::kRollout;
  throw UsageError("unknown strategy: " + std::string(s));
}

/// One fully specified decoding strategy (a single sweep cell's decoder).
struct Strategy {
  StrategyKind kind = StrategyKind::kGreedy;
  std::size_t k = 1;
  std::size_t beam_width = 1;
  std::size_t n_rollouts = 20;

  std::string label() const {
    switch (kind) {
      case StrategyKind::kGreedy: return "greedy";
      case StrategyKind::kLookahead: return std::to_string(k) + "-LA";
      case StrategyKind::kOracle: return std::to_string(k) + "-LA-oracle";
      case StrategyKind::kBeam: return "beam(B=" + std::to_string(beam_width) + ")";
      case StrategyKind::kRollout: return "rollout(k=" + std::to_string(k) + ",n=" + std::to_string(n_rollouts) + ")";
    }
    return "?";
  }

  void validate() const {
    if (k < 1) throw UsageError("strategy " + label() + ": k must be >= 1");
    if (beam_width < 1) throw UsageError("strategy " + label() + ": beta must be >= 1");
    if (n_rollouts < 1) throw UsageError("strategy " + label() + ": n_rollouts must be >= 1");
  }
};

/// Decodes one source with `s`. `seed` only matters for rollouts.
template <SequenceModel M>
DecodeResult decode_with(const M& model, std::span<const TokenId> source, const Strategy& s, std::size_t max_length,
                         std::uint64_t seed) {
  switch (s.kind) {
    case StrategyKind::kGreedy: return greedy_decode(model, source, max_length);
    case StrategyKind::kLookahead: return lookahead_decode(model, source, {.k = s.k, .max_length = max_length});
    case StrategyKind::kOracle: return lookahead_oracle(model, source, {.k = s.k, .max_length = max_length});
    case StrategyKind::kBeam:
      return beam_decode(model, source, {.beam_width = s.beam_width, .max_length = max_length}).best;
    case StrategyKind::kRollout:
      return rollout_decode(model, source,
                            {.k = s.k, .n_rollouts = s.n_rollouts, .max_length = max_length, .seed = seed});
  }
  throw UsageError("unknown strategy");
}

/// Per-sentence rollout seed; independent of thread assignment.
inline std::uint64_t sentence_seed(std::uint64_t seed, std::size_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::size_t default_threads() {
  if (const char* env = std::getenv(kThreadsEnvVar)) {
    try {
      const long n = std::stol(env);
      if (n >= 1) return static_cast<std::size_t>(n);
    } catch (const std::exception&) {
    }
    throw UsageError(std::string(kThreadsEnvVar) + " must be a positive integer");
  }
  return 1;
}

/// Decodes every source. Sentence i always lands in slot i and uses
/// sentence_seed(seed, i), so the output does not depend on `threads`.
template <SequenceModel M>
std::vector<DecodeResult> decode_all(const M& model, const std::vector<std::vector<TokenId>>& sources,
                                     const Strategy& s, std::size_t max_length, std::uint64_t seed,
                                     std::size_t threads) {
  s.validate();
  std::vector<DecodeResult> out(sources.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= sources.size()) return;
      try {
        out[i] = decode_with(model, sources[i], s, max_length, sentence_seed(seed, i));
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next = sources.size();
        return;
      }
    }
  };
  threads = std::max<std::size_t>(1, std::min(threads, sources.size()));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

struct CorpusSplit {
  Vocabulary vocab;
  TokenizeMode mode = TokenizeMode::kWhitespace;
  std::vector<SentencePair> train;
  std::vector<SentencePair> test;
  std::optional<TableModel> generator;
};

struct ExperimentConfig {
  Json raw;  // effective config (after overrides), hashed into every record
  std::string name = "experiment";
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  bool timing = false;
  std::size_t max_length = 0;

  std::optional<SyntheticCorpusSpec> synthetic;
  std::size_t test_sentences = 200;
  struct Files {
    std::string train_source, train_target, test_source, test_target;
    TokenizeMode mode = TokenizeMode::kWhitespace;
  };
  std::optional<Files> files;

  bool use_generator = false;
  std::size_t order = 3;
  bool source_conditioned = true;

  std::vector<double> gammas{0.0};
  TrainConfig train;

  std::vector<Strategy> strategies;
  std::vector<std::size_t> min_target_lengths;
  bool smooth = false;

  std::size_t bench_sentences = 100;
  std::size_t bench_k = 3;
  std::size_t bench_rollouts = 20;

  std::string ndjson_path;
  std::string csv_path;
};

namespace detail {

template <class T>
std::vector<T> as_list(const Json& j, const char* key, std::vector<T> fallback) {
  if (!j.contains(key)) return fallback;
  const Json& v = j.at(key);
  if (v.is_array()) return v.get<std::vector<T>>();
  return {v.get<T>()};
}

inline std::size_t as_count(const Json& j, const char* key, std::size_t fallback) {
  if (!j.contains(key)) return fallback;
  const auto v = j.at(key).get<long long>();
  if (v < 0) throw UsageError(std::string("config field '") + key + "' must be >= 0");
  return static_cast<std::size_t>(v);
}

}  // namespace detail

/// Parses a config document. Throws UsageError on schema violations.
inline ExperimentConfig parse_experiment_config(const Json& j) {
  ExperimentConfig c;
  try {
    if (!j.is_object()) throw UsageError("config must be a JSON object");
    if (j.value("version", 0) != kConfigSchemaVersion) {
      throw UsageError("config 'version' must be " + std::to_string(kConfigSchemaVersion));
    }
    c.raw = j;
    c.name = j.value("name", c.name);
    c.seed = j.value("seed", std::uint64_t{0});
    const std::size_t threads = detail::as_count(j, "threads", 0);
    c.threads = threads == 0 ? default_threads() : threads;
    c.timing = j.value("timing", false);
    c.max_length = detail::as_count(j, "max_length", 0);

    const Json corpus = j.value("corpus", Json::object());
    if (corpus.contains("files")) {
      const Json& f = corpus.at("files");
      ExperimentConfig::Files files;
      files.train_source = f.at("train_source").get<std::string>();
      files.train_target = f.at("train_target").get<std::string>();
      files.test_source = f.at("test_source").get<std::string>();
      files.test_target = f.at("test_target").get<std::string>();
      files.mode = parse_tokenize_mode(f.value("mode", std::string("whitespace")));
      c.files = files;
    } else {
      const Json s = corpus.value("synthetic", Json::object());
      SyntheticCorpusSpec spec;
      spec.vocab_size = detail::as_count(s, "vocab_size", spec.vocab_size);
      spec.context_length = detail::as_count(s, "context_length", spec.context_length);
      spec.n_sentences = detail::as_count(s, "n_sentences", spec.n_sentences);
      spec.mean_length = s.value("mean_length", spec.mean_length);
      spec.length_stddev = s.value("length_stddev", spec.length_stddev);
      spec.peakedness = s.value("peakedness", spec.peakedness);
      spec.source_conditioned = s.value("source_conditioned", spec.source_conditioned);
      spec.seed = s.value("seed", c.seed);
      spec.validate();
      c.synthetic = spec;
      c.test_sentences = detail::as_count(corpus, "test_sentences", c.test_sentences);
      if (c.test_sentences < 1) throw UsageError("corpus.test_sentences must be >= 1");
    }

    const Json model = j.value("model", Json::object());
    const std::string type = model.value("type", std::string("ngram"));
    if (type == "generator") {
      if (!c.synthetic) throw UsageError("model.type 'generator' needs a synthetic corpus");
      c.use_generator = true;
    } else if (type != "ngram") {
      throw UsageError("model.type must be 'ngram' or 'generator'");
    }
    c.order = detail::as_count(model, "order", c.order);
    if (c.order < 1) throw UsageError("model.order must be >= 1");
    c.source_conditioned = model.value("source_conditioned", c.source_conditioned);

    const Json train = j.value("train", Json::object());
    c.gammas = detail::as_list<double>(train, "gammas", c.gammas);
    if (c.gammas.empty()) throw UsageError("train.gammas must not be empty");
    c.train.learning_rate = train.value("learning_rate", c.train.learning_rate);
    c.train.epochs = detail::as_count(train, "epochs", c.train.epochs);
    c.train.batch_size = detail::as_count(train, "batch_size", c.train.batch_size);
    c.train.seed = train.value("seed", c.seed);
    for (double g : c.gammas) {
      TrainConfig probe = c.train;
      probe.gamma = g;
      probe.validate();
    }

    if (!j.contains("strategies") || !j.at("strategies").is_array()) {
      throw UsageError("config needs a 'strategies' array");
    }
    for (const Json& s : j.at("strategies")) {
      const auto kind = parse_strategy_kind(s.at("type").get<std::string>());
      Strategy base;
      base.kind = kind;
      switch (kind) {
        case StrategyKind::kGreedy:
          c.strategies.push_back(base);
          break;
        case StrategyKind::kLookahead:
        case StrategyKind::kOracle:
          for (std::size_t k : detail::as_list<std::size_t>(s, "k", {1})) {
            base.k = k;
            c.strategies.push_back(base);
          }
          break;
        case StrategyKind::kBeam:
          for (std::size_t b : detail::as_list<std::size_t>(s, "beta", {1})) {
            base.beam_width = b;
            c.strategies.push_back(base);
          }
          break;
        case StrategyKind::kRollout:
          for (std::size_t k : detail::as_list<std::size_t>(s, "k", {3})) {
            for (std::size_t n : detail::as_list<std::size_t>(s, "n_rollouts", {20})) {
              base.k = k;
              base.n_rollouts = n;
              c.strategies.push_back(base);
            }
          }
          break;
      }
    }
    if (c.strategies.empty()) throw UsageError("config lists no decoding strategies");
    for (const auto& s : c.strategies) s.validate();

    const Json eval = j.value("eval", Json::object());
    c.min_target_lengths = detail::as_list<std::size_t>(eval, "min_target_lengths", {});
    c.smooth = eval.value("smooth", false);

    const Json bench = j.value("bench", Json::object());
    c.bench_sentences = detail::as_count(bench, "sentences", c.bench_sentences);
    c.bench_k = detail::as_count(bench, "k", c.bench_k);
    c.bench_rollouts = detail::as_count(bench, "n_rollouts", c.bench_rollouts);

    const Json out = j.value("output", Json::object());
    c.ndjson_path = out.value("ndjson", std::string());
    c.csv_path = out.value("csv", std::string());
  } catch (const Json::exception& e) {
    throw UsageError(std::string("invalid config: ") + e.what());
  }
  return c;
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file: " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw UsageError("config file " + path + " is not valid JSON: " + e.what());
  }
}

/// Hash of the result-affecting part of a config: everything except
/// "output" and "threads".
inline std::string config_hash(const Json& raw) {
  Json relevant = raw;
  if (relevant.is_object()) {
    relevant.erase("output");
    relevant.erase("threads");
  }
  const std::string text = relevant.dump();
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(std::span<const unsigned char>(
                    reinterpret_cast<const unsigned char*>(text.data()), text.size()))));
  return buf;
}

inline CorpusSplit load_split(const ExperimentConfig& cfg) {
  CorpusSplit split;
  if (cfg.files) {
    const auto train = load_corpus(cfg.files->train_source, cfg.files->train_target, cfg.files->mode);
    const auto test = load_corpus(cfg.files->test_source, cfg.files->test_target, cfg.files->mode, train.vocab);
    split.vocab = train.vocab;
    split.mode = cfg.files->mode;
    split.train = train.pairs;
    split.test = test.pairs;
    return split;
  }
  auto spec = *cfg.synthetic;
  spec.n_sentences += cfg.test_sentences;
  auto syn = generate_synthetic(spec);
  split.vocab = syn.corpus.vocab;
  auto& pairs = syn.corpus.pairs;
  split.train.assign(pairs.begin(), pairs.end() - static_cast<std::ptrdiff_t>(cfg.test_sentences));
  split.test.assign(pairs.end() - static_cast<std::ptrdiff_t>(cfg.test_sentences), pairs.end());
  split.generator = std::move(syn.model);
  return split;
}

/// One model under evaluation: the trained n-gram for one gamma, or the
/// synthetic generator itself.
struct ModelVariant {
  std::optional<double> gamma;
  AnyModel model;
  std::vector<EpochLoss> trace;
};

inline std::vector<ModelVariant> build_models(const ExperimentConfig& cfg, const CorpusSplit& split) {
  std::vector<ModelVariant> out;
  if (cfg.use_generator) {
    out.push_back({std::nullopt, AnyModel(*split.generator), {}});
    return out;
  }
  if (split.train.empty()) throw UsageError("training split is empty");
  const auto base = make_ngram_model(split.vocab, cfg.order, cfg.source_conditioned, split.train);
  const auto events = extract_events(cfg.order, cfg.source_conditioned, split.train);
  for (double g : cfg.gammas) {
    TrainConfig tc = cfg.train;
    tc.gamma = g;
    auto res = train(base, events, tc);
    out.push_back({g, AnyModel(std::move(res.model)), std::move(res.trace)});
  }
  return out;
}

/// Aggregate of one decoded test split.
struct CellResult {
  Strategy strategy;
  std::optional<double> gamma;
  EvalReport report;
  double avg_length = 0.0;  // decoded tokens per sentence, EOS excluded
  SearchStats stats;
  std::size_t sentences = 0;
  std::vector<std::vector<TokenId>> hypotheses;  // EOS stripped
};

inline CellResult evaluate_cell(const ExperimentConfig& cfg, const ModelVariant& variant,
                                const std::vector<SentencePair>& test, const Strategy& s) {
  std::vector<std::vector<TokenId>> sources, refs;
  for (const auto& p : test) {
    sources.push_back(p.source);
    refs.push_back(p.target);
  }
  const auto decoded = variant.model.visit(
      [&](const auto& m) { return decode_all(m, sources, s, cfg.max_length, cfg.seed, cfg.threads); });
  CellResult cell;
  cell.strategy = s;
  cell.gamma = variant.gamma;
  cell.sentences = test.size();
  double total_len = 0.0;
  for (const auto& r : decoded) {
    cell.hypotheses.push_back(strip_token(std::span<const TokenId>(r.tokens), kEos));
    total_len += static_cast<double>(cell.hypotheses.back().size());
    cell.stats += r.stats;
  }
  cell.avg_length = total_len / static_cast<double>(std::max<std::size_t>(1, decoded.size()));
  using Seq = std::vector<TokenId>;
  cell.report = evaluate(std::span<const Seq>(cell.hypotheses), std::span<const Seq>(refs), cfg.min_target_lengths,
                         BleuOptions{cfg.smooth});
  return cell;
}

struct ExperimentResult {
  std::vector<Json> records;
  std::vector<CellResult> cells;
};

namespace detail {

inline Json record_header(const ExperimentConfig& cfg, const char* kind) {
  return Json{{"kind", kind},
              {"experiment", cfg.name},
              {"config_hash", config_hash(cfg.raw)},
              {"seed", cfg.seed},
              {"versions",
               {{"lookahead", LOOKAHEAD_VERSION},
                {"result_schema", kResultSchemaVersion},
                {"config_schema", kConfigSchemaVersion},
                {"model_format", kModelFormatVersion}}}};
}

inline Json gamma_json(std::optional<double> g) { return g ? Json(*g) : Json(nullptr); }

inline Json cell_record(const ExperimentConfig& cfg, const CellResult& c) {
  Json r = record_header(cfg, "decode");
  r["gamma"] = gamma_json(c.gamma);
  r["strategy"] = std::string(to_string(c.strategy.kind));
  r["label"] = c.strategy.label();
  const bool has_k = c.strategy.kind == StrategyKind::kLookahead || c.strategy.kind == StrategyKind::kOracle ||
                     c.strategy.kind == StrategyKind::kRollout;
  r["k"] = has_k ? Json(c.strategy.k) : Json(nullptr);
  r["beta"] = c.strategy.kind == StrategyKind::kBeam ? Json(c.strategy.beam_width) : Json(nullptr);
  r["n_rollouts"] = c.strategy.kind == StrategyKind::kRollout ? Json(c.strategy.n_rollouts) : Json(nullptr);
  r["sentences"] = c.sentences;
  r["bleu"] = c.report.bleu;
  r["n_gram_precisions"] = c.report.n_gram_precisions;
  r["brevity_penalty"] = c.report.brevity_penalty;
  r["avg_length_diff"] = c.report.avg_length_diff;
  r["avg_length"] = c.avg_length;
  Json buckets = Json::array();
  for (const auto& [min_len, b] : c.report.per_bucket) {
    buckets.push_back({{"min_target_length", min_len},
                       {"bleu", b.bleu},
                       {"avg_length_diff", b.avg_length_diff},
                       {"count", b.count}});
  }
  r["per_bucket"] = buckets;
  r["nodes_expanded"] = c.stats.nodes_expanded;
  r["paths_pruned"] = c.stats.paths_pruned;
  r["leaves_evaluated"] = c.stats.leaves_evaluated;
  r["wall_time"] = cfg.timing ? c.stats.wall_time : 0.0;
  return r;
}

template <class E>
[[noreturn]] void rethrow_in_cell(const std::string& cell, const E& e) {
  const std::string msg = "cell " + cell + ": " + e.what();
  if (dynamic_cast<const UsageError*>(&e)) throw UsageError(msg);
  if (dynamic_cast<const FormatError*>(&e)) throw FormatError(msg);
  if (dynamic_cast<const DataError*>(&e)) throw DataError(msg);
  if (dynamic_cast<const CapacityError*>(&e)) throw CapacityError(msg);
  if (dynamic_cast<const TrainingError*>(&e)) throw TrainingError(msg);
  throw RuntimeFailure(msg);
}

}  // namespace detail

/// Runs every (model variant x strategy) cell. Records are produced in a
/// fixed order: training traces first (one per epoch per gamma), then one
/// decode record per cell.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  if (cfg.strategies.empty()) throw UsageError("config lists no decoding strategies");
  const auto split = load_split(cfg);
  if (split.test.empty()) throw UsageError("test split is empty");
  const auto variants = build_models(cfg, split);

  ExperimentResult out;
  for (const auto& v : variants) {
    for (const auto& e : v.trace) {
      Json r = detail::record_header(cfg, "train_epoch");
      r["gamma"] = detail::gamma_json(v.gamma);
      r["epoch"] = e.epoch;
      r["nll"] = e.nll;
      r["eos_loss"] = e.eos_loss;
      r["total"] = e.total;
      out.records.push_back(std::move(r));
    }
  }
  for (const auto& v : variants) {
    for (const auto& s : cfg.strategies) {
      const std::string cell =
          s.label() + (v.gamma ? " gamma=" + Json(*v.gamma).dump() : std::string(" generator"));
      try {
        out.cells.push_back(evaluate_cell(cfg, v, split.test, s));
      } catch (const std::exception& e) {
        detail::rethrow_in_cell(cell, e);
      }
      out.records.push_back(detail::cell_record(cfg, out.cells.back()));
    }
  }
  return out;
}

/// CSV with one row per decode cell.
inline std::string results_csv(const ExperimentConfig& cfg, const std::vector<CellResult>& cells) {
  std::ostringstream os;
  os << "strategy,k,beta,gamma,bleu,avg_length_diff,nodes_expanded,wall_time\n";
  auto num = [](double x) { return Json(x).dump(); };
  for (const auto& c : cells) {
    const bool has_k = c.strategy.kind != StrategyKind::kGreedy && c.strategy.kind != StrategyKind::kBeam;
    os << to_string(c.strategy.kind) << ',' << (has_k ? std::to_string(c.strategy.k) : "") << ','
       << (c.strategy.kind == StrategyKind::kBeam ? std::to_string(c.strategy.beam_width) : "") << ','
       << (c.gamma ? num(*c.gamma) : "") << ',' << num(c.report.bleu) << ',' << num(c.report.avg_length_diff) << ','
       << c.stats.nodes_expanded << ',' << num(cfg.timing ? c.stats.wall_time : 0.0) << '\n';
  }
  return os.str();
}

inline std::string to_ndjson(const std::vector<Json>& records) {
  std::string out;
  for (const auto& r : records) {
    out += r.dump();
    out += '\n';
  }
  return out;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open output file: " + path);
  out << text;
  if (!out) throw DataError("failed writing output file: " + path);
}

struct BenchEntry {
  Strategy strategy;
  double mean_seconds = 0.0;
  double mean_nodes = 0.0;
  std::size_t sentences = 0;
};

struct BenchResult {
  std::vector<BenchEntry> entries;  // look-ahead first, rollout second
  std::vector<Json> records;
  double ratio() const { return entries.at(1).mean_seconds / entries.at(0).mean_seconds; }
};

/// Times look-ahead (k) against the rollout baseline (k, n) on the same
/// test sentences, single-threaded. Uses the first model variant.
inline BenchResult run_bench(const ExperimentConfig& cfg) {
  const auto split = load_split(cfg);
  auto variants = build_models(cfg, split);
  const auto& variant = variants.front();
  const std::size_t n = std::min(cfg.bench_sentences, split.test.size());
  if (n == 0) throw UsageError("bench needs at least one test sentence");
  const std::vector<Strategy> strategies{
      {StrategyKind::kLookahead, cfg.bench_k, 1, 1},
      {StrategyKind::kRollout, cfg.bench_k, 1, cfg.bench_rollouts},
  };
  BenchResult out;
  for (const auto& s : strategies) {
    s.validate();
    BenchEntry e;
    e.strategy = s;
    e.sentences = n;
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = variant.model.visit([&](const auto& m) {
        return decode_with(m, split.test[i].source, s, cfg.max_length, sentence_seed(cfg.seed, i));
      });
      e.mean_seconds += r.stats.wall_time;
      e.mean_nodes += static_cast<double>(r.stats.nodes_expanded);
    }
    e.mean_seconds /= static_cast<double>(n);
    e.mean_nodes /= static_cast<double>(n);
    out.entries.push_back(e);
  }
  for (const auto& e : out.entries) {
    Json r = detail::record_header(cfg, "bench");
    r["gamma"] = detail::gamma_json(variant.gamma);
    r["strategy"] = std::string(to_string(e.strategy.kind));
    r["label"] = e.strategy.label();
    r["k"] = e.strategy.k;
    r["n_rollouts"] = e.strategy.kind == StrategyKind::kRollout ? Json(e.strategy.n_rollouts) : Json(nullptr);
    r["sentences"] = e.sentences;
    r["mean_seconds_per_sentence"] = e.mean_seconds;
    r["mean_nodes_expanded"] = e.mean_nodes;
    out.records.push_back(std::move(r));
  }
  Json ratio = detail::record_header(cfg, "bench_ratio");
  ratio["rollout_over_lookahead"] = out.ratio();
  out.records.push_back(std::move(ratio));
  return out;
}

}  // namespace lookahead
