#pragma once

// Experiment grid: for every (scheme, training size, fold) cell, recompute
// count statistics and weights from that cell's training subset only, build
// features, train, and score macro-F1 on the held-out fold. The training
// pool of fold f is every document outside f; its subset chain is drawn
// with seed base_seed + f, so subsets are nested across sizes and the fold
// stays untouched. Cells are independent jobs; parallel execution must not
// change any value.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "tfcr/classifier.hpp"
#include "tfcr/corpus.hpp"
#include "tfcr/embed.hpp"
#include "tfcr/metrics.hpp"
#include "tfcr/random.hpp"
#include "tfcr/repr.hpp"
#include "tfcr/tokenize.hpp"
#include "tfcr/version.hpp"
#include "tfcr/weights.hpp"

namespace tfcr {

struct DatasetSpec {
  std::string path;
  CorpusFormat format = CorpusFormat::tsv;
};

struct EmbeddingSpec {
  std::string path;
  EmbeddingFormat format = EmbeddingFormat::auto_detect;
};

inline std::vector<std::size_t> default_training_sizes() {
  std::vector<std::size_t> sizes;
  for (std::size_t s = 1000; s <= 9000; s += 1000) sizes.push_back(s);
  return sizes;
}

struct ExperimentConfig {
  DatasetSpec dataset;
  EmbeddingSpec embeddings;
  std::vector<WeightScheme> schemes = {WeightScheme::none, WeightScheme::tfidf,
                                       WeightScheme::kld, WeightScheme::tfcr};
  std::vector<std::size_t> sizes = default_training_sizes();
  int n_folds = 10;
  BaselineMode baseline_mode = BaselineMode::mean;
  TokenizerConfig tokenizer;
  SmoothingConfig smoothing;
  TrainConfig train;
  bool normalize_features = false;  // optional L2 normalization ablation
  std::uint64_t base_seed = 42;
  std::string output_dir = "results";
  int jobs = 1;
};

struct CellResult {
  WeightScheme scheme = WeightScheme::none;
  std::size_t train_size = 0;
  int fold = 0;
  double macro_f1 = 0.0;
  double wall_seconds = 0.0;
  bool failed = false;
  std::string error;
};

struct AggregateRow {
  WeightScheme scheme = WeightScheme::none;
  std::size_t train_size = 0;
  double mean_macro_f1 = 0.0;
  double std_macro_f1 = 0.0;  // sample standard deviation over folds
  int n_folds = 0;            // folds that actually produced a score
};

struct ResultsTable {
  ExperimentConfig config;
  std::vector<CellResult> cells;  // scheme-major, then size, then fold

  std::size_t failed_count() const {
    std::size_t n = 0;
    for (const auto& c : cells) n += c.failed ? 1 : 0;
    return n;
  }

  std::vector<AggregateRow> aggregates() const {
    std::vector<AggregateRow> out;
    for (WeightScheme scheme : config.schemes) {
      for (std::size_t size : config.sizes) {
        std::vector<double> scores;
        for (const auto& c : cells)
          if (!c.failed && c.scheme == scheme && c.train_size == size)
            scores.push_back(c.macro_f1);
        AggregateRow row;
        row.scheme = scheme;
        row.train_size = size;
        row.n_folds = static_cast<int>(scores.size());
        if (!scores.empty()) {
          double sum = 0.0;
          for (double s : scores) sum += s;
          row.mean_macro_f1 = sum / static_cast<double>(scores.size());
          if (scores.size() > 1) {
            double sq = 0.0;
            for (double s : scores) {
              double d = s - row.mean_macro_f1;
              sq += d * d;
            }
            row.std_macro_f1 =
                std::sqrt(sq / static_cast<double>(scores.size() - 1));
          }
        }
        out.push_back(row);
      }
    }
    return out;
  }
};

// --- config (de)serialization -------------------------------------------------

namespace detail {

inline void check_known_keys(const nlohmann::json& obj,
                             std::initializer_list<const char*> known,
                             const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* key : known)
      if (it.key() == key) ok = true;
    if (!ok)
      throw std::runtime_error("config: unknown key '" + it.key() + "' in " +
                               where);
  }
}

}  // namespace detail

inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["dataset"] = {{"path", cfg.dataset.path},
                  {"format", to_string(cfg.dataset.format)}};
  j["embeddings"] = {{"path", cfg.embeddings.path},
                     {"format", to_string(cfg.embeddings.format)}};
  std::vector<std::string> schemes;
  for (auto s : cfg.schemes) schemes.emplace_back(to_string(s));
  j["schemes"] = schemes;
  j["sizes"] = cfg.sizes;
  j["n_folds"] = cfg.n_folds;
  j["baseline_mode"] = to_string(cfg.baseline_mode);
  j["tokenizer"] = {{"lowercase", cfg.tokenizer.lowercase},
                    {"min_token_len", cfg.tokenizer.min_token_len}};
  j["smoothing"] = {{"epsilon", cfg.smoothing.epsilon}};
  j["train"] = {{"l2_lambda", cfg.train.l2_lambda},
                {"learning_rate", cfg.train.learning_rate},
                {"max_epochs", cfg.train.max_epochs},
                {"tolerance", cfg.train.tolerance},
                {"seed", cfg.train.seed}};
  j["normalize_features"] = cfg.normalize_features;
  j["base_seed"] = cfg.base_seed;
  j["output_dir"] = cfg.output_dir;
  j["jobs"] = cfg.jobs;
  return j;
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  detail::check_known_keys(
      j,
      {"dataset", "embeddings", "schemes", "sizes", "n_folds", "baseline_mode",
       "tokenizer", "smoothing", "train", "normalize_features", "base_seed",
       "output_dir", "jobs"},
      "top level");
  if (!j.contains("dataset") || !j.contains("embeddings"))
    throw std::runtime_error("config: 'dataset' and 'embeddings' are required");

  const auto& ds = j.at("dataset");
  detail::check_known_keys(ds, {"path", "format"}, "dataset");
  cfg.dataset.path = ds.at("path").get<std::string>();
  if (ds.contains("format"))
    cfg.dataset.format =
        corpus_format_from_string(ds.at("format").get<std::string>());

  const auto& em = j.at("embeddings");
  detail::check_known_keys(em, {"path", "format"}, "embeddings");
  cfg.embeddings.path = em.at("path").get<std::string>();
  if (em.contains("format"))
    cfg.embeddings.format =
        embedding_format_from_string(em.at("format").get<std::string>());

  if (j.contains("schemes")) {
    cfg.schemes.clear();
    for (const auto& s : j.at("schemes"))
      cfg.schemes.push_back(weight_scheme_from_string(s.get<std::string>()));
  }
  if (j.contains("sizes"))
    cfg.sizes = j.at("sizes").get<std::vector<std::size_t>>();
  if (j.contains("n_folds")) cfg.n_folds = j.at("n_folds").get<int>();
  if (j.contains("baseline_mode"))
    cfg.baseline_mode =
        baseline_mode_from_string(j.at("baseline_mode").get<std::string>());
  if (j.contains("tokenizer")) {
    const auto& t = j.at("tokenizer");
    detail::check_known_keys(t, {"lowercase", "min_token_len"}, "tokenizer");
    if (t.contains("lowercase"))
      cfg.tokenizer.lowercase = t.at("lowercase").get<bool>();
    if (t.contains("min_token_len"))
      cfg.tokenizer.min_token_len = t.at("min_token_len").get<std::size_t>();
  }
  if (j.contains("smoothing")) {
    const auto& s = j.at("smoothing");
    detail::check_known_keys(s, {"epsilon"}, "smoothing");
    if (s.contains("epsilon")) cfg.smoothing.epsilon = s.at("epsilon").get<double>();
    if (!(cfg.smoothing.epsilon > 0))
      throw std::runtime_error("config: smoothing.epsilon must be > 0");
  }
  if (j.contains("train")) {
    const auto& t = j.at("train");
    detail::check_known_keys(
        t, {"l2_lambda", "learning_rate", "max_epochs", "tolerance", "seed"},
        "train");
    if (t.contains("l2_lambda")) cfg.train.l2_lambda = t.at("l2_lambda").get<double>();
    if (t.contains("learning_rate"))
      cfg.train.learning_rate = t.at("learning_rate").get<double>();
    if (t.contains("max_epochs")) cfg.train.max_epochs = t.at("max_epochs").get<int>();
    if (t.contains("tolerance")) cfg.train.tolerance = t.at("tolerance").get<double>();
    if (t.contains("seed")) cfg.train.seed = t.at("seed").get<std::uint64_t>();
  }
  if (j.contains("normalize_features"))
    cfg.normalize_features = j.at("normalize_features").get<bool>();
  if (j.contains("base_seed")) cfg.base_seed = j.at("base_seed").get<std::uint64_t>();
  if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
  if (j.contains("jobs")) cfg.jobs = j.at("jobs").get<int>();

  if (cfg.schemes.empty()) throw std::runtime_error("config: schemes is empty");
  for (std::size_t i = 0; i + 1 < cfg.sizes.size(); ++i)
    if (cfg.sizes[i] >= cfg.sizes[i + 1])
      throw std::runtime_error("config: sizes must be strictly increasing");
  return cfg;
}

inline ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path.string()));
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(path.string() + ": invalid JSON: " + e.what());
  }
  return config_from_json(j);
}

// --- the experiment -----------------------------------------------------------

class Experiment {
 public:
  explicit Experiment(ExperimentConfig cfg)
      : cfg_(std::move(cfg)),
        corpus_(load_corpus(cfg_.dataset.path, cfg_.dataset.format)),
        model_(load_embeddings(cfg_.embeddings.path, cfg_.embeddings.format)) {
    init();
  }

  // For tests and synthetic experiments: skip the file loads.
  Experiment(ExperimentConfig cfg, LabeledCorpus corpus, EmbeddingModel model)
      : cfg_(std::move(cfg)),
        corpus_(std::move(corpus)),
        model_(std::move(model)) {
    init();
  }

  const ExperimentConfig& config() const { return cfg_; }
  const LabeledCorpus& corpus() const { return corpus_; }
  const EmbeddingModel& embeddings() const { return model_; }
  const FoldAssignment& folds() const { return folds_; }
  const SubsetChain& chain(int fold) const {
    return chains_.at(static_cast<std::size_t>(fold));
  }
  const std::vector<TokenSequence>& tokens() const { return tokens_; }
  const std::vector<int>& label_ids() const { return label_ids_; }

  std::span<const int> subset_ids(std::size_t train_size, int fold) const {
    return chain(fold).subset(size_index(train_size));
  }

  // Weights for one cell, computed from that cell's training subset only.
  WeightTable cell_weight_table(WeightScheme scheme, std::size_t train_size,
                                int fold) const {
    CountTable counts = count_statistics(subset_ids(train_size, fold), tokens_,
                                         label_ids_, corpus_.label_set);
    return build_weight_table(counts, scheme, cfg_.smoothing);
  }

  CellResult run_cell(WeightScheme scheme, std::size_t train_size,
                      int fold) const {
    CellResult cell;
    cell.scheme = scheme;
    cell.train_size = train_size;
    cell.fold = fold;
    auto t0 = std::chrono::steady_clock::now();
    try {
      cell.macro_f1 = evaluate_cell(scheme, train_size, fold);
    } catch (const std::exception& e) {
      cell.failed = true;
      cell.error = e.what();
    }
    cell.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return cell;
  }

  ResultsTable run_all() const {
    struct CellKey {
      WeightScheme scheme;
      std::size_t size;
      int fold;
    };
    std::vector<CellKey> keys;
    for (WeightScheme scheme : cfg_.schemes)
      for (std::size_t size : cfg_.sizes)
        for (int fold = 0; fold < cfg_.n_folds; ++fold)
          keys.push_back({scheme, size, fold});

    std::vector<CellResult> cells(keys.size());
    const int jobs = std::max(1, cfg_.jobs);
    if (jobs == 1) {
      for (std::size_t i = 0; i < keys.size(); ++i)
        cells[i] = run_cell(keys[i].scheme, keys[i].size, keys[i].fold);
    } else {
      std::atomic<std::size_t> next{0};
      auto worker = [&] {
        while (true) {
          std::size_t i = next.fetch_add(1);
          if (i >= keys.size()) break;
          cells[i] = run_cell(keys[i].scheme, keys[i].size, keys[i].fold);
        }
      };
      std::vector<std::thread> pool;
      for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
      for (auto& t : pool) t.join();
    }
    return {cfg_, std::move(cells)};
  }

 private:
  void init() {
    if (cfg_.schemes.empty())
      throw std::invalid_argument("experiment: no schemes configured");
    label_ids_ = corpus_.label_ids();
    tokens_.reserve(corpus_.documents.size());
    for (const auto& doc : corpus_.documents)
      tokens_.push_back(tokenize(doc.text, cfg_.tokenizer));
    folds_ = make_folds(corpus_, cfg_.n_folds, cfg_.base_seed);
    chains_.reserve(static_cast<std::size_t>(cfg_.n_folds));
    for (int f = 0; f < cfg_.n_folds; ++f)
      chains_.push_back(make_subset_chain(folds_.train_ids(f), cfg_.sizes,
                                          cfg_.base_seed + static_cast<std::uint64_t>(f)));
  }

  std::size_t size_index(std::size_t train_size) const {
    for (std::size_t i = 0; i < cfg_.sizes.size(); ++i)
      if (cfg_.sizes[i] == train_size) return i;
    throw std::invalid_argument("experiment: size " +
                                std::to_string(train_size) +
                                " is not in the configured size list");
  }

  Eigen::MatrixXd features_for(std::span<const int> ids, WeightScheme scheme,
                               const WeightTable* weights) const {
    const ReprOptions opts{cfg_.normalize_features};
    const Eigen::Index dim =
        scheme == WeightScheme::none
            ? model_.dim
            : static_cast<Eigen::Index>(corpus_.label_set.k()) * model_.dim;
    Eigen::MatrixXd X(static_cast<Eigen::Index>(ids.size()), dim);
    for (std::size_t r = 0; r < ids.size(); ++r) {
      const auto& toks = tokens_[static_cast<std::size_t>(ids[r])];
      FeatureVector fv =
          scheme == WeightScheme::none
              ? unweighted_repr(toks, model_, cfg_.baseline_mode, opts)
              : weighted_repr(toks, *weights, model_, opts);
      for (Eigen::Index j = 0; j < dim; ++j)
        X(static_cast<Eigen::Index>(r), j) = fv.values[static_cast<std::size_t>(j)];
    }
    return X;
  }

  std::vector<int> labels_for(std::span<const int> ids) const {
    std::vector<int> y(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i)
      y[i] = label_ids_[static_cast<std::size_t>(ids[i])];
    return y;
  }

  double evaluate_cell(WeightScheme scheme, std::size_t train_size,
                       int fold) const {
    std::span<const int> train_docs = subset_ids(train_size, fold);
    std::vector<int> test_vec = folds_.test_ids(fold);
    std::span<const int> test_docs(test_vec.data(), test_vec.size());

    std::optional<WeightTable> weights;
    if (scheme != WeightScheme::none)
      weights.emplace(cell_weight_table(scheme, train_size, fold));

    Eigen::MatrixXd X_train =
        features_for(train_docs, scheme, weights ? &*weights : nullptr);
    Eigen::MatrixXd X_test =
        features_for(test_docs, scheme, weights ? &*weights : nullptr);

    TrainConfig tc = cfg_.train;
    tc.seed = cfg_.base_seed + static_cast<std::uint64_t>(fold);
    LogRegModel model =
        tfcr::train(X_train, labels_for(train_docs), corpus_.label_set, tc);
    std::vector<int> pred = predict(model, X_test);
    return macro_f1(labels_for(test_docs), pred, corpus_.label_set.k());
  }

  ExperimentConfig cfg_;
  LabeledCorpus corpus_;
  EmbeddingModel model_;
  std::vector<TokenSequence> tokens_;
  std::vector<int> label_ids_;
  FoldAssignment folds_;
  std::vector<SubsetChain> chains_;
};

inline ResultsTable run_experiment(const ExperimentConfig& cfg) {
  return Experiment(cfg).run_all();
}

// --- result emission ----------------------------------------------------------

namespace detail {

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path.string());
  return out;
}

}  // namespace detail

// Writes results.csv (fold-level rows), aggregates.csv, one
// curve_<scheme>.csv per scheme, and manifest.json into dir.
inline void emit_results(const ResultsTable& table,
                         const std::filesystem::path& dir) {
  if (table.cells.empty())
    throw std::invalid_argument("emit_results: empty results table");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec)
    throw std::runtime_error("cannot create output directory " + dir.string() +
                             ": " + ec.message());

  {
    auto out = detail::open_output(dir / "results.csv");
    out << "scheme,train_size,fold,macro_f1\n";
    for (const auto& c : table.cells) {
      if (c.failed) continue;
      out << to_string(c.scheme) << ',' << c.train_size << ',' << c.fold << ','
          << format_double(c.macro_f1) << '\n';
    }
    if (!out) throw std::runtime_error("write failed: results.csv");
  }

  const auto aggregates = table.aggregates();
  {
    auto out = detail::open_output(dir / "aggregates.csv");
    out << "scheme,train_size,mean_macro_f1,std_macro_f1\n";
    for (const auto& a : aggregates) {
      if (a.n_folds == 0) continue;
      out << to_string(a.scheme) << ',' << a.train_size << ','
          << format_double(a.mean_macro_f1) << ','
          << format_double(a.std_macro_f1) << '\n';
    }
    if (!out) throw std::runtime_error("write failed: aggregates.csv");
  }

  for (WeightScheme scheme : table.config.schemes) {
    auto out = detail::open_output(
        dir / (std::string("curve_") + to_string(scheme) + ".csv"));
    out << "train_size,mean_macro_f1\n";
    for (const auto& a : aggregates)
      if (a.scheme == scheme && a.n_folds > 0)
        out << a.train_size << ',' << format_double(a.mean_macro_f1) << '\n';
    if (!out) throw std::runtime_error("write failed: curve csv");
  }

  {
    nlohmann::json manifest;
    manifest["library"] = {{"name", "tfcr"}, {"version", kVersion}};
    manifest["generator"] = kRngName;
    manifest["config"] = config_to_json(table.config);
    std::vector<std::uint64_t> subset_seeds;
    for (int f = 0; f < table.config.n_folds; ++f)
      subset_seeds.push_back(table.config.base_seed +
                             static_cast<std::uint64_t>(f));
    manifest["seeds"] = {{"base_seed", table.config.base_seed},
                         {"fold_assignment_seed", table.config.base_seed},
                         {"subset_seeds", subset_seeds}};
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : table.cells) {
      nlohmann::json jc;
      jc["scheme"] = to_string(c.scheme);
      jc["train_size"] = c.train_size;
      jc["fold"] = c.fold;
      if (c.failed) {
        jc["macro_f1"] = nullptr;
        jc["error"] = c.error;
      } else {
        jc["macro_f1"] = c.macro_f1;
      }
      jc["wall_seconds"] = c.wall_seconds;
      jc["failed"] = c.failed;
      cells.push_back(jc);
    }
    manifest["cells"] = cells;
    manifest["failed_cells"] = table.failed_count();
    auto out = detail::open_output(dir / "manifest.json");
    out << manifest.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed: manifest.json");
  }
}

}  // namespace tfcr
