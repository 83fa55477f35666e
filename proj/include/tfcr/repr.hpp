#pragma once

// Document feature vectors. The weighted representation sums, per category,
// the embeddings of the document's tokens scaled by their (word, category)
// weight, then concatenates the k category blocks into one k*d vector. The
// unweighted baseline is the plain sum or mean of token embeddings (d dims).
// OOV tokens contribute nothing; degenerate documents yield zero vectors.

#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "tfcr/embed.hpp"
#include "tfcr/tokenize.hpp"
#include "tfcr/weights.hpp"
#include "tfcr/util.hpp"

namespace tfcr {

enum class ReprLayout { concat_kd, plain_d };

enum class BaselineMode { sum, mean };

inline const char* to_string(BaselineMode m) {
  return m == BaselineMode::sum ? "sum" : "mean";
}

inline BaselineMode baseline_mode_from_string(std::string_view s) {
  if (s == "sum") return BaselineMode::sum;
  if (s == "mean") return BaselineMode::mean;
  throw std::invalid_argument("unknown baseline mode: '" + std::string(s) +
                              "' (expected sum or mean)");
}

struct FeatureVector {
  std::vector<double> values;
  ReprLayout layout = ReprLayout::plain_d;
  int k = 0;  // categories (concat layout only)
  int d = 0;  // embedding dimension
};

struct ReprOptions {
  bool l2_normalize = false;  // off by default; the weighted sum is not
                              // length-normalized
};

namespace detail {

inline void maybe_l2_normalize(std::vector<double>& v, bool enabled) {
  if (!enabled) return;
  double sq = 0.0;
  for (double x : v) sq += x * x;
  if (sq <= 0.0) return;
  double inv = 1.0 / std::sqrt(sq);
  for (double& x : v) x *= inv;
}

}  // namespace detail

// Category-weighted concatenated representation: block c (LabelSet order)
// is sum over tokens t of score(t, c) * embedding(t). Token multiplicity
// counts; tokens that are OOV or score 0 everywhere are skipped.
inline FeatureVector weighted_repr(const TokenSequence& tokens,
                                   const WeightTable& weights,
                                   const EmbeddingModel& model,
                                   const ReprOptions& opts = {}) {
  const int k = weights.k();
  const int d = model.dim;
  FeatureVector fv;
  fv.layout = ReprLayout::concat_kd;
  fv.k = k;
  fv.d = d;
  fv.values.assign(static_cast<std::size_t>(k) * static_cast<std::size_t>(d),
                   0.0);
  for (const auto& tok : tokens) {
    const std::vector<double>* emb = model.lookup(tok);
    if (!emb) continue;
    const std::vector<double>* row = weights.row(tok);
    if (!row) continue;  // unseen at training: weight 0 under every scheme
    for (int c = 0; c < k; ++c) {
      double s = (*row)[static_cast<std::size_t>(c)];
      if (s == 0.0) continue;
      double* block = fv.values.data() + static_cast<std::size_t>(c) * d;
      for (int j = 0; j < d; ++j) block[j] += s * (*emb)[static_cast<std::size_t>(j)];
    }
  }
  detail::maybe_l2_normalize(fv.values, opts.l2_normalize);
  return fv;
}

// Unweighted baseline: sum or mean of in-vocabulary token embeddings. The
// mean of zero in-vocabulary tokens is the zero vector.
inline FeatureVector unweighted_repr(const TokenSequence& tokens,
                                     const EmbeddingModel& model,
                                     BaselineMode mode = BaselineMode::mean,
                                     const ReprOptions& opts = {}) {
  const int d = model.dim;
  FeatureVector fv;
  fv.layout = ReprLayout::plain_d;
  fv.k = 0;
  fv.d = d;
  fv.values.assign(static_cast<std::size_t>(d), 0.0);
  std::size_t in_vocab = 0;
  for (const auto& tok : tokens) {
    const std::vector<double>* emb = model.lookup(tok);
    if (!emb) continue;
    ++in_vocab;
    for (int j = 0; j < d; ++j) fv.values[static_cast<std::size_t>(j)] += (*emb)[static_cast<std::size_t>(j)];
  }
  if (mode == BaselineMode::mean && in_vocab > 0) {
    double inv = 1.0 / static_cast<double>(in_vocab);
    for (double& x : fv.values) x *= inv;
  }
  detail::maybe_l2_normalize(fv.values, opts.l2_normalize);
  return fv;
}

// Debug dump: one row per document, tab-separated values.
inline void dump_features_tsv(const std::vector<FeatureVector>& rows,
                              std::ostream& out) {
  for (const auto& fv : rows) {
    for (std::size_t j = 0; j < fv.values.size(); ++j) {
      if (j) out << '\t';
      out << format_double(fv.values[j]);
    }
    out << '\n';
  }
}

}  // namespace tfcr
