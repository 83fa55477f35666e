#pragma once

// Pre-trained word-vector files: word2vec text format (count/dim header)
// and GloVe text format (no header, dimension inferred). Values are held as
// 64-bit floats regardless of file precision. Models are immutable after
// load; concurrent lookups are safe.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tfcr/util.hpp"

namespace tfcr {

enum class EmbeddingFormat { word2vec_text, glove_text, auto_detect };

inline const char* to_string(EmbeddingFormat f) {
  switch (f) {
    case EmbeddingFormat::word2vec_text: return "word2vec_text";
    case EmbeddingFormat::glove_text: return "glove_text";
    case EmbeddingFormat::auto_detect: return "auto";
  }
  return "?";
}

inline EmbeddingFormat embedding_format_from_string(std::string_view s) {
  if (s == "word2vec_text" || s == "word2vec") return EmbeddingFormat::word2vec_text;
  if (s == "glove_text" || s == "glove") return EmbeddingFormat::glove_text;
  if (s == "auto") return EmbeddingFormat::auto_detect;
  throw std::invalid_argument("unknown embedding format: '" + std::string(s) +
                              "' (expected word2vec_text, glove_text or auto)");
}

struct EmbeddingModel {
  int dim = 0;
  std::string name;
  std::unordered_map<std::string, std::vector<double>> vectors;

  // Load diagnostics: real published files occasionally carry a header
  // count that disagrees with the body, and sometimes repeat words.
  std::size_t duplicates_skipped = 0;
  std::uint64_t declared_vocab = 0;  // word2vec header count; 0 when absent
  bool header_mismatch = false;

  std::size_t size() const { return vectors.size(); }

  // Exact-match lookup; nullptr means out-of-vocabulary (caller skips it).
  const std::vector<double>* lookup(const std::string& token) const {
    auto it = vectors.find(token);
    return it == vectors.end() ? nullptr : &it->second;
  }
};

namespace detail {

[[noreturn]] inline void embed_error(const std::string& source,
                                     std::size_t line,
                                     const std::string& what) {
  throw std::runtime_error(source + ":" + std::to_string(line) + ": " + what);
}

inline bool looks_like_word2vec_header(std::string_view first_line) {
  auto toks = split_ws(strip_cr(first_line));
  if (toks.size() != 2) return false;
  std::uint64_t a = 0, b = 0;
  return parse_uint(toks[0], a) && parse_uint(toks[1], b);
}

// Parses "word v1 .. vd" lines starting at lines[start]; dim 0 means infer
// from the first vector line.
inline void parse_vector_lines(const std::vector<std::string_view>& lines,
                               std::size_t start, const std::string& source,
                               EmbeddingModel& model, int dim) {
  for (std::size_t i = start; i < lines.size(); ++i) {
    auto toks = split_ws(strip_cr(lines[i]));
    if (toks.empty()) embed_error(source, i + 1, "empty line");
    if (dim == 0) {
      if (toks.size() < 2)
        embed_error(source, i + 1, "expected a word and at least 1 component");
      dim = static_cast<int>(toks.size()) - 1;
      model.dim = dim;
    }
    if (static_cast<int>(toks.size()) - 1 != dim)
      embed_error(source, i + 1,
                  "expected " + std::to_string(dim) + " components, got " +
                      std::to_string(toks.size() - 1));
    std::vector<double> vec(static_cast<std::size_t>(dim));
    for (int j = 0; j < dim; ++j) {
      if (!parse_double(toks[static_cast<std::size_t>(j) + 1], vec[static_cast<std::size_t>(j)]))
        embed_error(source, i + 1,
                    "non-numeric component '" +
                        std::string(toks[static_cast<std::size_t>(j) + 1]) + "'");
    }
    // First occurrence wins.
    auto [it, inserted] =
        model.vectors.emplace(std::string(toks[0]), std::move(vec));
    (void)it;
    if (!inserted) ++model.duplicates_skipped;
  }
}

}  // namespace detail

inline EmbeddingModel parse_embeddings(std::string_view content,
                                       EmbeddingFormat format,
                                       const std::string& source = "<embeddings>") {
  auto lines = content_lines(content);
  if (lines.empty())
    throw std::runtime_error(source + ": empty embedding file");

  if (format == EmbeddingFormat::auto_detect)
    format = detail::looks_like_word2vec_header(lines[0])
                 ? EmbeddingFormat::word2vec_text
                 : EmbeddingFormat::glove_text;

  EmbeddingModel model;
  model.name = source;
  if (format == EmbeddingFormat::word2vec_text) {
    auto toks = split_ws(strip_cr(lines[0]));
    std::uint64_t vocab = 0, dim = 0;
    if (toks.size() != 2 || !parse_uint(toks[0], vocab) ||
        !parse_uint(toks[1], dim) || dim == 0)
      detail::embed_error(source, 1,
                          "malformed word2vec header (expected '<vocab> <dim>')");
    model.declared_vocab = vocab;
    model.dim = static_cast<int>(dim);
    detail::parse_vector_lines(lines, 1, source, model, model.dim);
    if (model.vectors.size() != vocab) {
      // Header counts are advisory in the wild; tolerate and warn.
      model.header_mismatch = true;
      std::cerr << "warning: " << source << ": header declares " << vocab
                << " words, parsed " << model.vectors.size() << "\n";
    }
  } else {
    detail::parse_vector_lines(lines, 0, source, model, 0);
  }
  if (model.duplicates_skipped > 0)
    std::cerr << "warning: " << source << ": skipped "
              << model.duplicates_skipped
              << " duplicate word(s) (first occurrence wins)\n";
  return model;
}

inline EmbeddingModel load_embeddings(const std::filesystem::path& path,
                                      EmbeddingFormat format = EmbeddingFormat::auto_detect) {
  EmbeddingModel model =
      parse_embeddings(read_file(path.string()), format, path.string());
  model.name = path.stem().string();
  return model;
}

// GloVe text serialization, word-sorted. Components use shortest
// round-trip formatting, so reloading reproduces the vectors exactly.
inline void save_embeddings_glove(const EmbeddingModel& model,
                                  std::ostream& out) {
  std::vector<const std::string*> words;
  words.reserve(model.vectors.size());
  for (const auto& [w, v] : model.vectors) words.push_back(&w);
  std::sort(words.begin(), words.end(),
            [](const std::string* a, const std::string* b) { return *a < *b; });
  for (const std::string* w : words) {
    out << *w;
    for (double v : model.vectors.at(*w)) out << ' ' << format_double(v);
    out << '\n';
  }
}

inline void save_embeddings_glove(const EmbeddingModel& model,
                                  const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path.string());
  save_embeddings_glove(model, out);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace tfcr
