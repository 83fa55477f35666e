#pragma once

// Count statistics over training tokens and per-(word, category) weights.
//
// TF-CR scores word w in category c as
//
//     TF(w,c) * CR(w,c) = (|w_c| / N_c) * (|w_c| / |w|) = |w_c|^2 / (N_c * |w|)
//
// where |w_c| is the number of occurrences of w in c, N_c the total token
// count of c and |w| the occurrences of w across all categories. Frequent,
// category-exclusive words score high; ubiquitous words score low.
//
// TF-IDF here treats each category as one mega-document:
// TF(w,c) * ln(k / cf(w)) with cf(w) the number of categories containing w.
// KLD is the pointwise per-term contribution p * ln(p/q) between the
// in-category and out-of-category unigram distributions, additively
// smoothed and clamped at zero.
//
// Counts must come from training data only; the harness enforces that.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "tfcr/corpus.hpp"
#include "tfcr/tokenize.hpp"
#include "tfcr/util.hpp"

namespace tfcr {

enum class WeightScheme { none, tfidf, kld, tfcr };

inline const char* to_string(WeightScheme s) {
  switch (s) {
    case WeightScheme::none: return "none";
    case WeightScheme::tfidf: return "tfidf";
    case WeightScheme::kld: return "kld";
    case WeightScheme::tfcr: return "tfcr";
  }
  return "?";
}

inline WeightScheme weight_scheme_from_string(std::string_view s) {
  if (s == "none") return WeightScheme::none;
  if (s == "tfidf") return WeightScheme::tfidf;
  if (s == "kld") return WeightScheme::kld;
  if (s == "tfcr") return WeightScheme::tfcr;
  throw std::invalid_argument("unknown weighting scheme: '" + std::string(s) +
                              "' (expected none, tfidf, kld or tfcr)");
}

struct SmoothingConfig {
  double epsilon = 1e-10;  // additive smoothing for the KLD probability ratio
};

struct LabeledTokens {
  TokenSequence tokens;
  int label = 0;  // index into the LabelSet
};

// Per-category word counts |w_c|, category totals N_c and, derived, global
// word counts |w|.
class CountTable {
 public:
  explicit CountTable(LabelSet labels)
      : label_set_(std::move(labels)),
        category_totals_(static_cast<std::size_t>(label_set_.k()), 0) {}

  const LabelSet& label_set() const { return label_set_; }
  int k() const { return label_set_.k(); }

  void add_document(const TokenSequence& tokens, int label_index) {
    if (label_index < 0 || label_index >= k())
      throw std::out_of_range("CountTable: label index out of range");
    auto li = static_cast<std::size_t>(label_index);
    for (const auto& tok : tokens) {
      auto it = counts_.find(tok);
      if (it == counts_.end())
        it = counts_.emplace(tok, std::vector<std::int64_t>(
                                      static_cast<std::size_t>(k()), 0))
                 .first;
      ++it->second[li];
    }
    category_totals_[li] += static_cast<std::int64_t>(tokens.size());
  }

  // |w_c|; 0 for unseen words.
  std::int64_t count(const std::string& word, int category_index) const {
    check_category(category_index);
    auto it = counts_.find(word);
    if (it == counts_.end()) return 0;
    return it->second[static_cast<std::size_t>(category_index)];
  }

  // |w| across all categories; 0 for unseen words.
  std::int64_t word_total(const std::string& word) const {
    auto it = counts_.find(word);
    if (it == counts_.end()) return 0;
    std::int64_t total = 0;
    for (std::int64_t c : it->second) total += c;
    return total;
  }

  // N_c.
  std::int64_t category_total(int category_index) const {
    check_category(category_index);
    return category_totals_[static_cast<std::size_t>(category_index)];
  }

  std::int64_t total_tokens() const {
    std::int64_t total = 0;
    for (std::int64_t c : category_totals_) total += c;
    return total;
  }

  // number of categories with |w_c| > 0
  int category_frequency(const std::string& word) const {
    auto it = counts_.find(word);
    if (it == counts_.end()) return 0;
    int cf = 0;
    for (std::int64_t c : it->second)
      if (c > 0) ++cf;
    return cf;
  }

  const std::unordered_map<std::string, std::vector<std::int64_t>>& words()
      const {
    return counts_;
  }

 private:
  void check_category(int index) const {
    if (index < 0 || index >= k())
      throw std::out_of_range("CountTable: category index out of range");
  }

  LabelSet label_set_;
  std::unordered_map<std::string, std::vector<std::int64_t>> counts_;
  std::vector<std::int64_t> category_totals_;
};

inline CountTable count_statistics(const std::vector<LabeledTokens>& docs,
                                   const LabelSet& labels) {
  if (docs.empty())
    throw std::invalid_argument("count_statistics: empty training set");
  CountTable table(labels);
  for (const auto& d : docs) table.add_document(d.tokens, d.label);
  return table;
}

// Zero-copy variant over a cached tokenization of the full corpus.
inline CountTable count_statistics(std::span<const int> doc_ids,
                                   const std::vector<TokenSequence>& all_tokens,
                                   const std::vector<int>& all_labels,
                                   const LabelSet& labels) {
  if (doc_ids.empty())
    throw std::invalid_argument("count_statistics: empty training set");
  CountTable table(labels);
  for (int id : doc_ids)
    table.add_document(all_tokens.at(static_cast<std::size_t>(id)),
                       all_labels.at(static_cast<std::size_t>(id)));
  return table;
}

// --- scalar scoring formulas ------------------------------------------------
// Shared by the table builder, the pointwise operations and the property
// tests, so all paths evaluate the identical expression.

inline double tfcr_score(std::int64_t wc, std::int64_t nc, std::int64_t w_total) {
  if (wc == 0) return 0.0;
  return (static_cast<double>(wc) * static_cast<double>(wc)) /
         (static_cast<double>(nc) * static_cast<double>(w_total));
}

inline double tfidf_score(std::int64_t wc, std::int64_t nc, int k, int cf) {
  if (wc == 0) return 0.0;
  double tf = static_cast<double>(wc) / static_cast<double>(nc);
  return tf * std::log(static_cast<double>(k) / static_cast<double>(cf));
}

inline double kld_score(std::int64_t wc, std::int64_t nc, std::int64_t w_total,
                        std::int64_t out_total, double epsilon) {
  if (wc == 0) return 0.0;
  double p = static_cast<double>(wc) / static_cast<double>(nc);
  double q = out_total > 0
                 ? static_cast<double>(w_total - wc) / static_cast<double>(out_total)
                 : 0.0;
  double v = p * std::log((p + epsilon) / (q + epsilon));
  return v > 0.0 ? v : 0.0;
}

// --- pointwise operations on a CountTable ------------------------------------

inline double tfcr(const CountTable& counts, const std::string& word,
                   const std::string& category) {
  int ci = counts.label_set().index_of(category);
  return tfcr_score(counts.count(word, ci), counts.category_total(ci),
                    counts.word_total(word));
}

inline double tfidf(const CountTable& counts, const std::string& word,
                    const std::string& category) {
  int ci = counts.label_set().index_of(category);
  return tfidf_score(counts.count(word, ci), counts.category_total(ci),
                     counts.k(), counts.category_frequency(word));
}

inline double kld(const CountTable& counts, const std::string& word,
                  const std::string& category,
                  const SmoothingConfig& smoothing = {}) {
  if (counts.k() < 2)
    throw std::invalid_argument(
        "kld: needs at least 2 categories (out-of-category distribution "
        "undefined)");
  int ci = counts.label_set().index_of(category);
  std::int64_t nc = counts.category_total(ci);
  return kld_score(counts.count(word, ci), nc, counts.word_total(word),
                   counts.total_tokens() - nc, smoothing.epsilon);
}

// --- materialized weight tables ----------------------------------------------

// Scheme-specific score for every (word seen in training, category) pair.
// Reads of unseen words return 0 under every scheme, including `none`.
class WeightTable {
 public:
  WeightTable(WeightScheme scheme, LabelSet labels,
              std::unordered_map<std::string, std::vector<double>> scores)
      : scheme_(scheme),
        label_set_(std::move(labels)),
        scores_(std::move(scores)) {}

  WeightScheme scheme() const { return scheme_; }
  const LabelSet& label_set() const { return label_set_; }
  int k() const { return label_set_.k(); }
  std::size_t vocabulary_size() const { return scores_.size(); }

  // Per-word score row in LabelSet order; nullptr for unseen words.
  const std::vector<double>* row(const std::string& word) const {
    auto it = scores_.find(word);
    return it == scores_.end() ? nullptr : &it->second;
  }

  double score(const std::string& word, int category_index) const {
    if (category_index < 0 || category_index >= k())
      throw std::out_of_range("WeightTable: category index out of range");
    const auto* r = row(word);
    return r ? (*r)[static_cast<std::size_t>(category_index)] : 0.0;
  }

  double score(const std::string& word, const std::string& category) const {
    return score(word, label_set_.index_of(category));
  }

  const std::unordered_map<std::string, std::vector<double>>& entries() const {
    return scores_;
  }

  bool operator==(const WeightTable& other) const {
    return scheme_ == other.scheme_ && label_set_ == other.label_set_ &&
           scores_ == other.scores_;
  }

  // TSV dump `word<TAB>category<TAB>score`, word-sorted, categories in
  // LabelSet order.
  void export_tsv(std::ostream& out) const {
    std::vector<const std::string*> words;
    words.reserve(scores_.size());
    for (const auto& [w, row] : scores_) words.push_back(&w);
    std::sort(words.begin(), words.end(),
              [](const std::string* a, const std::string* b) { return *a < *b; });
    for (const std::string* w : words) {
      const auto& row = scores_.at(*w);
      for (int c = 0; c < k(); ++c)
        out << *w << '\t' << label_set_.label(c) << '\t'
            << format_double(row[static_cast<std::size_t>(c)]) << '\n';
    }
  }

  void export_tsv(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path.string());
    export_tsv(out);
    if (!out) throw std::runtime_error("write failed: " + path.string());
  }

  static WeightTable import_tsv(std::string_view content, WeightScheme scheme,
                                const std::string& source = "<weights>") {
    auto lines = content_lines(content);
    if (lines.empty())
      throw std::runtime_error(source + ": empty weight table");
    struct Entry {
      std::string word, category;
      double score;
    };
    std::vector<Entry> entries;
    std::vector<std::string> categories;
    for (std::size_t i = 0; i < lines.size(); ++i) {
      auto fields = split(strip_cr(lines[i]), '\t');
      if (fields.size() != 3)
        throw std::runtime_error(source + ":" + std::to_string(i + 1) +
                                 ": expected 3 tab-separated fields, got " +
                                 std::to_string(fields.size()));
      double s = 0.0;
      if (!parse_double(fields[2], s))
        throw std::runtime_error(source + ":" + std::to_string(i + 1) +
                                 ": non-numeric score '" +
                                 std::string(fields[2]) + "'");
      entries.push_back({std::string(fields[0]), std::string(fields[1]), s});
      categories.emplace_back(fields[1]);
    }
    LabelSet labels = LabelSet::from_observed(categories);
    std::unordered_map<std::string, std::vector<double>> scores;
    for (const auto& e : entries) {
      auto it = scores.find(e.word);
      if (it == scores.end())
        it = scores.emplace(e.word, std::vector<double>(
                                        static_cast<std::size_t>(labels.k()), 0.0))
                 .first;
      it->second[static_cast<std::size_t>(labels.index_of(e.category))] = e.score;
    }
    return WeightTable(scheme, std::move(labels), std::move(scores));
  }

  static WeightTable import_tsv_file(const std::filesystem::path& path,
                                     WeightScheme scheme) {
    return import_tsv(read_file(path.string()), scheme, path.string());
  }

 private:
  WeightScheme scheme_;
  LabelSet label_set_;
  std::unordered_map<std::string, std::vector<double>> scores_;
};

inline WeightTable build_weight_table(const CountTable& counts,
                                      WeightScheme scheme,
                                      const SmoothingConfig& smoothing = {}) {
  const int k = counts.k();
  if (scheme == WeightScheme::kld && k < 2)
    throw std::invalid_argument(
        "build_weight_table: kld needs at least 2 categories");

  const std::int64_t total = counts.total_tokens();
  std::unordered_map<std::string, std::vector<double>> scores;
  scores.reserve(counts.words().size());
  for (const auto& [word, per_cat] : counts.words()) {
    std::vector<double> row(static_cast<std::size_t>(k), 0.0);
    std::int64_t w_total = 0;
    for (std::int64_t c : per_cat) w_total += c;
    int cf = 0;
    for (std::int64_t c : per_cat)
      if (c > 0) ++cf;
    for (int c = 0; c < k; ++c) {
      auto ci = static_cast<std::size_t>(c);
      std::int64_t wc = per_cat[ci];
      std::int64_t nc = counts.category_total(c);
      switch (scheme) {
        case WeightScheme::none:
          row[ci] = 1.0;
          break;
        case WeightScheme::tfcr:
          row[ci] = tfcr_score(wc, nc, w_total);
          break;
        case WeightScheme::tfidf:
          row[ci] = tfidf_score(wc, nc, k, cf);
          break;
        case WeightScheme::kld:
          row[ci] = kld_score(wc, nc, w_total, total - nc, smoothing.epsilon);
          break;
      }
    }
    scores.emplace(word, std::move(row));
  }
  return WeightTable(scheme, counts.label_set(), std::move(scores));
}

}  // namespace tfcr
