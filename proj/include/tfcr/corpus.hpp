#pragma once

// Labeled-corpus ingestion, the label universe, stratified fold assignment
// and nested training subsets. Everything here is deterministic given
// (inputs, seed); structures are immutable after construction.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "tfcr/random.hpp"
#include "tfcr/util.hpp"

namespace tfcr {

struct LabeledDocument {
  int id = 0;
  std::string text;
  std::string label;
};

// Ordered, duplicate-free category universe. The lexicographic order fixed
// here is reused everywhere: weight tables, block concatenation order and
// classifier outputs.
class LabelSet {
 public:
  LabelSet() = default;

  explicit LabelSet(std::vector<std::string> sorted_unique)
      : labels_(std::move(sorted_unique)) {
    if (labels_.empty())
      throw std::invalid_argument("LabelSet: no labels");
    for (std::size_t i = 0; i + 1 < labels_.size(); ++i)
      if (!(labels_[i] < labels_[i + 1]))
        throw std::invalid_argument("LabelSet: labels not sorted/unique");
    for (std::size_t i = 0; i < labels_.size(); ++i)
      index_[labels_[i]] = static_cast<int>(i);
  }

  static LabelSet from_observed(const std::vector<std::string>& raw) {
    std::vector<std::string> labels(raw);
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    return LabelSet(std::move(labels));
  }

  int k() const { return static_cast<int>(labels_.size()); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& label(int index) const { return labels_.at(index); }

  bool contains(const std::string& label) const {
    return index_.count(label) > 0;
  }

  int index_of(const std::string& label) const {
    auto it = index_.find(label);
    if (it == index_.end())
      throw std::out_of_range("unknown category: '" + label + "'");
    return it->second;
  }

  bool operator==(const LabelSet& other) const {
    return labels_ == other.labels_;
  }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, int> index_;
};

struct LabeledCorpus {
  std::vector<LabeledDocument> documents;
  LabelSet label_set;

  // Label index per document id.
  std::vector<int> label_ids() const {
    std::vector<int> out(documents.size());
    for (const auto& d : documents)
      out[static_cast<std::size_t>(d.id)] = label_set.index_of(d.label);
    return out;
  }
};

enum class CorpusFormat { tsv, csv, jsonl };

inline const char* to_string(CorpusFormat f) {
  switch (f) {
    case CorpusFormat::tsv: return "tsv";
    case CorpusFormat::csv: return "csv";
    case CorpusFormat::jsonl: return "jsonl";
  }
  return "?";
}

inline CorpusFormat corpus_format_from_string(std::string_view s) {
  if (s == "tsv") return CorpusFormat::tsv;
  if (s == "csv") return CorpusFormat::csv;
  if (s == "jsonl") return CorpusFormat::jsonl;
  throw std::invalid_argument("unknown corpus format: '" + std::string(s) +
                              "' (expected tsv, csv or jsonl)");
}

namespace detail {

struct RawRecord {
  std::size_t line = 0;  // 1-based line where the record starts
  std::string label;
  std::string text;
};

[[noreturn]] inline void corpus_error(const std::string& source,
                                      std::size_t line,
                                      const std::string& what) {
  throw std::runtime_error(source + ":" + std::to_string(line) + ": " + what);
}

inline std::vector<RawRecord> parse_tsv(std::string_view content,
                                        const std::string& source) {
  std::vector<RawRecord> records;
  auto lines = content_lines(content);
  std::size_t start = 0;
  if (!lines.empty() && strip_cr(lines[0]) == "label\ttext") start = 1;
  for (std::size_t i = start; i < lines.size(); ++i) {
    std::string_view line = strip_cr(lines[i]);
    auto fields = split(line, '\t');
    if (fields.size() != 2)
      corpus_error(source, i + 1,
                   "expected 2 tab-separated fields, got " +
                       std::to_string(fields.size()));
    records.push_back(
        {i + 1, std::string(fields[0]), std::string(fields[1])});
  }
  return records;
}

// RFC 4180: quoted fields may contain commas, doubled quotes and newlines.
inline std::vector<RawRecord> parse_csv(std::string_view content,
                                        const std::string& source) {
  std::vector<RawRecord> records;
  std::size_t pos = 0;
  std::size_t line = 1;

  // Literal header detection on the raw first line.
  {
    std::size_t eol = content.find('\n');
    std::string_view first =
        strip_cr(content.substr(0, eol == std::string_view::npos
                                       ? content.size()
                                       : eol));
    if (first == "label,text") {
      pos = eol == std::string_view::npos ? content.size() : eol + 1;
      line = 2;
    }
  }

  std::vector<std::string> fields;
  std::string field;
  bool in_quotes = false;
  bool after_quote = false;
  bool record_has_content = false;
  std::size_t record_line = line;

  auto end_field = [&] {
    fields.push_back(std::move(field));
    field.clear();
    after_quote = false;
  };
  auto end_record = [&] {
    if (record_has_content || !fields.empty() || !field.empty()) {
      end_field();
      if (fields.size() != 2)
        corpus_error(source, record_line,
                     "expected 2 comma-separated fields, got " +
                         std::to_string(fields.size()));
      records.push_back({record_line, fields[0], fields[1]});
    }
    fields.clear();
    record_has_content = false;
  };

  while (pos < content.size()) {
    char c = content[pos];
    if (in_quotes) {
      if (c == '"') {
        if (pos + 1 < content.size() && content[pos + 1] == '"') {
          field += '"';
          pos += 2;
        } else {
          in_quotes = false;
          after_quote = true;
          ++pos;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
        ++pos;
      }
      continue;
    }
    if (c == ',') {
      end_field();
      record_has_content = true;
      ++pos;
    } else if (c == '\n') {
      end_record();
      ++line;
      ++pos;
      record_line = line;
    } else if (c == '\r') {
      // Part of a CRLF record terminator; a bare \r is ignored likewise.
      ++pos;
    } else if (c == '"') {
      if (after_quote)
        corpus_error(source, line, "unexpected '\"' after closing quote");
      if (!field.empty())
        corpus_error(source, line, "quote inside unquoted field");
      in_quotes = true;
      record_has_content = true;
      ++pos;
    } else {
      if (after_quote)
        corpus_error(source, line, "unexpected character after closing quote");
      field += c;
      record_has_content = true;
      ++pos;
    }
  }
  if (in_quotes)
    corpus_error(source, record_line, "unterminated quoted field");
  end_record();
  return records;
}

inline std::vector<RawRecord> parse_jsonl(std::string_view content,
                                          const std::string& source) {
  std::vector<RawRecord> records;
  auto lines = content_lines(content);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = strip_cr(lines[i]);
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      corpus_error(source, i + 1, std::string("invalid JSON: ") + e.what());
    }
    if (!obj.is_object())
      corpus_error(source, i + 1, "expected a JSON object");
    if (!obj.contains("label") || !obj["label"].is_string())
      corpus_error(source, i + 1, "missing string field \"label\"");
    if (!obj.contains("text") || !obj["text"].is_string())
      corpus_error(source, i + 1, "missing string field \"text\"");
    records.push_back({i + 1, obj["label"].get<std::string>(),
                       obj["text"].get<std::string>()});
  }
  return records;
}

}  // namespace detail

inline LabeledCorpus parse_corpus(std::string_view content, CorpusFormat format,
                                  const std::string& source = "<corpus>") {
  std::vector<detail::RawRecord> records;
  switch (format) {
    case CorpusFormat::tsv: records = detail::parse_tsv(content, source); break;
    case CorpusFormat::csv: records = detail::parse_csv(content, source); break;
    case CorpusFormat::jsonl:
      records = detail::parse_jsonl(content, source);
      break;
  }
  if (records.empty())
    throw std::runtime_error(source + ": empty corpus (no records)");

  std::vector<std::string> labels;
  labels.reserve(records.size());
  for (const auto& r : records) labels.push_back(r.label);
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  if (labels.size() < 2)
    throw std::runtime_error(source + ": fewer than 2 distinct labels (found " +
                             std::to_string(labels.size()) + ")");

  LabeledCorpus corpus;
  corpus.label_set = LabelSet(std::move(labels));
  corpus.documents.reserve(records.size());
  int id = 0;
  for (auto& r : records)
    corpus.documents.push_back({id++, std::move(r.text), std::move(r.label)});
  return corpus;
}

inline LabeledCorpus load_corpus(const std::filesystem::path& path,
                                 CorpusFormat format) {
  return parse_corpus(read_file(path.string()), format, path.string());
}

// Stratified n-fold assignment: within each label (labels visited in
// LabelSet order) documents are shuffled, then dealt to folds by a rotating
// counter carried across labels so total fold sizes stay balanced too.
struct FoldAssignment {
  int n_folds = 0;
  std::vector<int> fold_of;  // indexed by document id

  std::vector<int> test_ids(int fold) const {
    std::vector<int> out;
    for (std::size_t id = 0; id < fold_of.size(); ++id)
      if (fold_of[id] == fold) out.push_back(static_cast<int>(id));
    return out;
  }

  std::vector<int> train_ids(int fold) const {
    std::vector<int> out;
    for (std::size_t id = 0; id < fold_of.size(); ++id)
      if (fold_of[id] != fold) out.push_back(static_cast<int>(id));
    return out;
  }
};

inline FoldAssignment make_folds(const LabeledCorpus& corpus, int n_folds,
                                 std::uint64_t seed) {
  if (n_folds < 2)
    throw std::invalid_argument("make_folds: n_folds must be >= 2");

  const int k = corpus.label_set.k();
  std::vector<std::vector<int>> by_label(static_cast<std::size_t>(k));
  for (const auto& doc : corpus.documents)
    by_label[static_cast<std::size_t>(corpus.label_set.index_of(doc.label))]
        .push_back(doc.id);

  for (int li = 0; li < k; ++li) {
    const auto& ids = by_label[static_cast<std::size_t>(li)];
    if (ids.size() < static_cast<std::size_t>(n_folds))
      throw std::runtime_error(
          "make_folds: label '" + corpus.label_set.label(li) + "' has " +
          std::to_string(ids.size()) + " documents, fewer than n_folds=" +
          std::to_string(n_folds));
  }

  FoldAssignment fa;
  fa.n_folds = n_folds;
  fa.fold_of.assign(corpus.documents.size(), -1);
  std::mt19937_64 rng(seed);
  int next_fold = 0;
  for (int li = 0; li < k; ++li) {
    auto& ids = by_label[static_cast<std::size_t>(li)];
    fisher_yates(ids, rng);
    for (int id : ids) {
      fa.fold_of[static_cast<std::size_t>(id)] = next_fold;
      next_fold = (next_fold + 1) % n_folds;
    }
  }
  return fa;
}

// Nested training subsets: the pool is shuffled once, and the subset for
// sizes[i] is the first sizes[i] ids of that shuffle, so larger subsets
// contain smaller ones.
struct SubsetChain {
  std::vector<std::size_t> sizes;
  std::vector<int> prefix;  // the full shuffled pool

  std::span<const int> subset(std::size_t size_index) const {
    return {prefix.data(), sizes.at(size_index)};
  }
};

inline SubsetChain make_subset_chain(std::vector<int> train_ids,
                                     std::vector<std::size_t> sizes,
                                     std::uint64_t seed) {
  if (sizes.empty())
    throw std::invalid_argument("make_subset_chain: sizes must be non-empty");
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i)
    if (sizes[i] >= sizes[i + 1])
      throw std::invalid_argument(
          "make_subset_chain: sizes must be strictly increasing");
  if (sizes.back() > train_ids.size())
    throw std::invalid_argument(
        "make_subset_chain: largest size " + std::to_string(sizes.back()) +
        " exceeds training pool of " + std::to_string(train_ids.size()));
  seeded_shuffle(train_ids, seed);
  return {std::move(sizes), std::move(train_ids)};
}

}  // namespace tfcr
