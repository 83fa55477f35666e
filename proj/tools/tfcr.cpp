// Command-line harness: full experiment runs plus subcommands exposing the
// individual stages (weight dumps, feature dumps, train/eval) and a
// 20 Newsgroups directory-to-corpus converter.

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "tfcr/tfcr.hpp"

namespace fs = std::filesystem;

namespace {

struct IngestArgs {
  std::string dataset;
  std::string dataset_format = "tsv";
  tfcr::TokenizerConfig tokenizer;
};

void add_ingest_options(CLI::App* cmd, IngestArgs& args) {
  cmd->add_option("--dataset", args.dataset, "labeled corpus file")->required();
  cmd->add_option("--dataset-format", args.dataset_format,
                  "tsv, csv or jsonl")
      ->default_val("tsv");
  cmd->add_flag_function(
      "--no-lowercase",
      [&args](std::int64_t) { args.tokenizer.lowercase = false; },
      "keep original letter case");
  cmd->add_option("--min-token-len", args.tokenizer.min_token_len,
                  "drop tokens shorter than this many code points");
}

tfcr::LabeledCorpus load(const IngestArgs& args) {
  return tfcr::load_corpus(args.dataset,
                           tfcr::corpus_format_from_string(args.dataset_format));
}

std::vector<tfcr::TokenSequence> tokenize_all(const tfcr::LabeledCorpus& corpus,
                                              const tfcr::TokenizerConfig& cfg) {
  std::vector<tfcr::TokenSequence> tokens;
  tokens.reserve(corpus.documents.size());
  for (const auto& doc : corpus.documents)
    tokens.push_back(tfcr::tokenize(doc.text, cfg));
  return tokens;
}

tfcr::CountTable count_all(const tfcr::LabeledCorpus& corpus,
                           const std::vector<tfcr::TokenSequence>& tokens) {
  std::vector<int> ids(corpus.documents.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int>(i);
  return tfcr::count_statistics(std::span<const int>(ids.data(), ids.size()),
                                tokens, corpus.label_ids(), corpus.label_set);
}

Eigen::MatrixXd feature_matrix(const std::vector<tfcr::TokenSequence>& tokens,
                               tfcr::WeightScheme scheme,
                               const tfcr::WeightTable* weights,
                               const tfcr::EmbeddingModel& model,
                               tfcr::BaselineMode mode, bool normalize) {
  const tfcr::ReprOptions opts{normalize};
  const Eigen::Index dim = scheme == tfcr::WeightScheme::none
                               ? model.dim
                               : static_cast<Eigen::Index>(weights->k()) * model.dim;
  Eigen::MatrixXd X(static_cast<Eigen::Index>(tokens.size()), dim);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    tfcr::FeatureVector fv =
        scheme == tfcr::WeightScheme::none
            ? tfcr::unweighted_repr(tokens[i], model, mode, opts)
            : tfcr::weighted_repr(tokens[i], *weights, model, opts);
    for (Eigen::Index j = 0; j < dim; ++j)
      X(static_cast<Eigen::Index>(i), j) = fv.values[static_cast<std::size_t>(j)];
  }
  return X;
}

// Sanitize one 20ng message into a single TSV-safe line.
std::string flatten_text(const std::string& raw) {
  std::string out;
  out.reserve(raw.size());
  bool last_space = false;
  for (char c : raw) {
    if (c == '\t' || c == '\n' || c == '\r' || c == ' ') {
      if (!last_space && !out.empty()) out += ' ';
      last_space = true;
    } else {
      out += c;
      last_space = false;
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

int run_experiment_cmd(const std::string& config_path, std::uint64_t seed,
                       bool seed_given, int jobs, bool jobs_given,
                       const std::string& out_dir) {
  tfcr::ExperimentConfig cfg = tfcr::load_experiment_config(config_path);
  if (seed_given) cfg.base_seed = seed;
  if (jobs_given) cfg.jobs = jobs;
  if (!out_dir.empty()) cfg.output_dir = out_dir;

  std::cerr << "loading dataset " << cfg.dataset.path << " and embeddings "
            << cfg.embeddings.path << "\n";
  tfcr::Experiment experiment(cfg);
  std::cerr << "corpus: " << experiment.corpus().documents.size()
            << " documents, k=" << experiment.corpus().label_set.k()
            << "; embeddings: " << experiment.embeddings().size()
            << " words, d=" << experiment.embeddings().dim << "\n";
  std::cerr << "grid: " << cfg.schemes.size() << " scheme(s) x "
            << cfg.sizes.size() << " size(s) x " << cfg.n_folds
            << " fold(s), jobs=" << std::max(1, cfg.jobs) << "\n";

  tfcr::ResultsTable table = experiment.run_all();
  tfcr::emit_results(table, cfg.output_dir);

  for (const auto& a : table.aggregates())
    if (a.n_folds > 0)
      std::cout << tfcr::to_string(a.scheme) << " size=" << a.train_size
                << " macro_f1=" << tfcr::format_double(a.mean_macro_f1)
                << " (std=" << tfcr::format_double(a.std_macro_f1)
                << ", folds=" << a.n_folds << ")\n";

  std::size_t failed = table.failed_count();
  if (failed > 0) {
    std::cerr << failed << " cell(s) failed; see "
              << (fs::path(cfg.output_dir) / "manifest.json").string() << "\n";
    return 1;
  }
  std::cerr << "results written to " << cfg.output_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"TF-CR category-weighted embedding text classification"};
  app.require_subcommand(1);

  std::uint64_t seed = 42;
  int jobs = 1;
  auto* seed_opt = app.add_option("--seed", seed, "base random seed");
  auto* jobs_opt = app.add_option("--jobs", jobs, "parallel grid cells");

  // run
  auto* run_cmd = app.add_subcommand("run", "run a full experiment grid");
  std::string config_path, run_out;
  run_cmd->add_option("--config", config_path, "experiment config (JSON)")
      ->required();
  run_cmd->add_option("--out", run_out, "override output directory");

  // weights
  auto* weights_cmd =
      app.add_subcommand("weights", "compute and dump a weight table");
  IngestArgs weights_args;
  add_ingest_options(weights_cmd, weights_args);
  std::string weights_scheme = "tfcr", weights_out;
  double weights_epsilon = tfcr::SmoothingConfig{}.epsilon;
  weights_cmd->add_option("--scheme", weights_scheme, "none, tfidf, kld or tfcr")
      ->default_val("tfcr");
  weights_cmd->add_option("--out", weights_out, "output TSV path")->required();
  weights_cmd->add_option("--epsilon", weights_epsilon, "KLD smoothing epsilon");

  // repr
  auto* repr_cmd =
      app.add_subcommand("repr", "dump document feature vectors as TSV");
  IngestArgs repr_args;
  add_ingest_options(repr_cmd, repr_args);
  std::string repr_emb, repr_emb_format = "auto", repr_scheme = "tfcr",
              repr_out, repr_mode = "mean";
  bool repr_normalize = false;
  double repr_epsilon = tfcr::SmoothingConfig{}.epsilon;
  repr_cmd->add_option("--embeddings", repr_emb, "word vector file")->required();
  repr_cmd->add_option("--embeddings-format", repr_emb_format,
                       "word2vec_text, glove_text or auto");
  repr_cmd->add_option("--scheme", repr_scheme, "none, tfidf, kld or tfcr");
  repr_cmd->add_option("--mode", repr_mode, "sum or mean (scheme=none only)");
  repr_cmd->add_flag("--normalize", repr_normalize, "L2-normalize vectors");
  repr_cmd->add_option("--epsilon", repr_epsilon, "KLD smoothing epsilon");
  repr_cmd->add_option("--out", repr_out, "output TSV path")->required();

  // train
  auto* train_cmd = app.add_subcommand("train", "train a classifier");
  IngestArgs train_args;
  add_ingest_options(train_cmd, train_args);
  std::string train_emb, train_emb_format = "auto", train_scheme = "tfcr",
              train_model_out, train_weights_out, train_mode = "mean";
  bool train_normalize = false;
  tfcr::TrainConfig train_cfg;
  double train_epsilon = tfcr::SmoothingConfig{}.epsilon;
  train_cmd->add_option("--embeddings", train_emb, "word vector file")->required();
  train_cmd->add_option("--embeddings-format", train_emb_format,
                        "word2vec_text, glove_text or auto");
  train_cmd->add_option("--scheme", train_scheme, "none, tfidf, kld or tfcr");
  train_cmd->add_option("--mode", train_mode, "sum or mean (scheme=none only)");
  train_cmd->add_flag("--normalize", train_normalize, "L2-normalize features");
  train_cmd->add_option("--epsilon", train_epsilon, "KLD smoothing epsilon");
  train_cmd->add_option("--model-out", train_model_out, "model output path")
      ->required();
  train_cmd->add_option("--weights-out", train_weights_out,
                        "also dump the weight table (needed by eval)");
  train_cmd->add_option("--l2", train_cfg.l2_lambda, "L2 regularization");
  train_cmd->add_option("--lr", train_cfg.learning_rate, "learning rate");
  train_cmd->add_option("--epochs", train_cfg.max_epochs, "max epochs");
  train_cmd->add_option("--tolerance", train_cfg.tolerance,
                        "relative loss tolerance");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a saved classifier");
  IngestArgs eval_args;
  add_ingest_options(eval_cmd, eval_args);
  std::string eval_emb, eval_emb_format = "auto", eval_model,
              eval_weights, eval_scheme = "tfcr", eval_mode = "mean";
  bool eval_normalize = false;
  eval_cmd->add_option("--embeddings", eval_emb, "word vector file")->required();
  eval_cmd->add_option("--embeddings-format", eval_emb_format,
                       "word2vec_text, glove_text or auto");
  eval_cmd->add_option("--model", eval_model, "model file")->required();
  eval_cmd->add_option("--weights", eval_weights,
                       "weight table TSV from training (omit for scheme=none)");
  eval_cmd->add_option("--scheme", eval_scheme, "scheme the weights were built with");
  eval_cmd->add_option("--mode", eval_mode, "sum or mean (scheme=none only)");
  eval_cmd->add_flag("--normalize", eval_normalize, "L2-normalize features");

  // convert-20ng
  auto* ng_cmd = app.add_subcommand(
      "convert-20ng",
      "convert a 20 Newsgroups directory tree (one subdirectory per group) "
      "into a corpus file");
  std::string ng_in, ng_out, ng_format = "tsv";
  ng_cmd->add_option("--in", ng_in, "root directory")->required();
  ng_cmd->add_option("--out", ng_out, "output corpus path")->required();
  ng_cmd->add_option("--format", ng_format, "tsv or jsonl");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd)
      return run_experiment_cmd(config_path, seed, seed_opt->count() > 0, jobs,
                                jobs_opt->count() > 0, run_out);

    if (*weights_cmd) {
      auto corpus = load(weights_args);
      auto tokens = tokenize_all(corpus, weights_args.tokenizer);
      auto counts = count_all(corpus, tokens);
      auto table = tfcr::build_weight_table(
          counts, tfcr::weight_scheme_from_string(weights_scheme),
          tfcr::SmoothingConfig{weights_epsilon});
      table.export_tsv(fs::path(weights_out));
      std::cerr << "wrote " << table.vocabulary_size() << " words x "
                << table.k() << " categories to " << weights_out << "\n";
      return 0;
    }

    if (*repr_cmd) {
      auto corpus = load(repr_args);
      auto tokens = tokenize_all(corpus, repr_args.tokenizer);
      auto model = tfcr::load_embeddings(
          repr_emb, tfcr::embedding_format_from_string(repr_emb_format));
      auto scheme = tfcr::weight_scheme_from_string(repr_scheme);
      std::vector<tfcr::FeatureVector> rows;
      rows.reserve(tokens.size());
      if (scheme == tfcr::WeightScheme::none) {
        auto mode = tfcr::baseline_mode_from_string(repr_mode);
        for (const auto& t : tokens)
          rows.push_back(tfcr::unweighted_repr(t, model, mode,
                                               {repr_normalize}));
      } else {
        auto counts = count_all(corpus, tokens);
        auto table = tfcr::build_weight_table(counts, scheme,
                                              tfcr::SmoothingConfig{repr_epsilon});
        for (const auto& t : tokens)
          rows.push_back(tfcr::weighted_repr(t, table, model, {repr_normalize}));
      }
      std::ofstream out(repr_out, std::ios::binary);
      if (!out) throw std::runtime_error("cannot write file: " + repr_out);
      tfcr::dump_features_tsv(rows, out);
      std::cerr << "wrote " << rows.size() << " feature rows to " << repr_out
                << "\n";
      return 0;
    }

    if (*train_cmd) {
      auto corpus = load(train_args);
      auto tokens = tokenize_all(corpus, train_args.tokenizer);
      auto model = tfcr::load_embeddings(
          train_emb, tfcr::embedding_format_from_string(train_emb_format));
      auto scheme = tfcr::weight_scheme_from_string(train_scheme);
      std::optional<tfcr::WeightTable> table;
      if (scheme != tfcr::WeightScheme::none) {
        table.emplace(tfcr::build_weight_table(
            count_all(corpus, tokens), scheme,
            tfcr::SmoothingConfig{train_epsilon}));
        if (!train_weights_out.empty())
          table->export_tsv(fs::path(train_weights_out));
      }
      Eigen::MatrixXd X = feature_matrix(
          tokens, scheme, table ? &*table : nullptr, model,
          tfcr::baseline_mode_from_string(train_mode), train_normalize);
      train_cfg.seed = seed;
      auto clf = tfcr::train(X, corpus.label_ids(), corpus.label_set, train_cfg);
      tfcr::save_model(clf, fs::path(train_model_out));
      auto pred = tfcr::predict(clf, X);
      std::cout << "training macro_f1="
                << tfcr::format_double(tfcr::macro_f1(
                       corpus.label_ids(), pred, corpus.label_set.k()))
                << "\n";
      std::cerr << "model written to " << train_model_out << "\n";
      return 0;
    }

    if (*eval_cmd) {
      auto corpus = load(eval_args);
      auto tokens = tokenize_all(corpus, eval_args.tokenizer);
      auto model = tfcr::load_embeddings(
          eval_emb, tfcr::embedding_format_from_string(eval_emb_format));
      auto clf = tfcr::load_model(eval_model);
      auto scheme = tfcr::weight_scheme_from_string(eval_scheme);
      std::optional<tfcr::WeightTable> table;
      if (!eval_weights.empty())
        table.emplace(tfcr::WeightTable::import_tsv_file(eval_weights, scheme));
      if (scheme != tfcr::WeightScheme::none && !table)
        throw std::runtime_error("eval: --weights is required unless --scheme none");
      Eigen::MatrixXd X = feature_matrix(
          tokens, table ? scheme : tfcr::WeightScheme::none,
          table ? &*table : nullptr, model,
          tfcr::baseline_mode_from_string(eval_mode), eval_normalize);
      auto pred = tfcr::predict(clf, X);
      std::vector<int> gold(corpus.documents.size());
      for (const auto& doc : corpus.documents)
        gold[static_cast<std::size_t>(doc.id)] =
            clf.label_set.index_of(doc.label);
      double f1 = tfcr::macro_f1(gold, pred, clf.label_set.k());
      std::cout << "macro_f1=" << tfcr::format_double(f1) << "\n";
      auto prf = tfcr::per_class_prf(gold, pred, clf.label_set.k());
      for (int c = 0; c < clf.label_set.k(); ++c)
        std::cout << clf.label_set.label(c) << " precision="
                  << tfcr::format_double(prf[static_cast<std::size_t>(c)].precision)
                  << " recall="
                  << tfcr::format_double(prf[static_cast<std::size_t>(c)].recall)
                  << " f1="
                  << tfcr::format_double(prf[static_cast<std::size_t>(c)].f1)
                  << "\n";
      return 0;
    }

    if (*ng_cmd) {
      if (ng_format != "tsv" && ng_format != "jsonl")
        throw std::runtime_error("convert-20ng: --format must be tsv or jsonl");
      std::vector<fs::path> groups;
      for (const auto& entry : fs::directory_iterator(ng_in))
        if (entry.is_directory()) groups.push_back(entry.path());
      std::sort(groups.begin(), groups.end());
      if (groups.empty())
        throw std::runtime_error("convert-20ng: no group subdirectories in " +
                                 ng_in);
      std::ofstream out(ng_out, std::ios::binary);
      if (!out) throw std::runtime_error("cannot write file: " + ng_out);
      std::size_t n = 0;
      for (const auto& group : groups) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(group))
          if (entry.is_regular_file()) files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        for (const auto& file : files) {
          std::string text = tfcr::read_file(file.string());
          std::string label = group.filename().string();
          if (ng_format == "tsv") {
            out << label << '\t' << flatten_text(text) << '\n';
          } else {
            nlohmann::json j;
            j["label"] = label;
            j["text"] = text;
            out << j.dump() << '\n';
          }
          ++n;
        }
      }
      if (!out) throw std::runtime_error("write failed: " + ng_out);
      std::cerr << "wrote " << n << " documents from " << groups.size()
                << " groups to " << ng_out << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
