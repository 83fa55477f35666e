#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <sstream>
#include <string>

#include "tfcr/embed.hpp"
#include "testutil.hpp"

using namespace tfcr;

TEST_CASE("word2vec text format with count/dim header") {
  auto model = parse_embeddings("2 3\na 1 0 0\nb 0 1 0\n",
                                EmbeddingFormat::word2vec_text);
  REQUIRE(model.dim == 3);
  REQUIRE(model.size() == 2);
  REQUIRE(*model.lookup("a") == std::vector<double>{1, 0, 0});
  REQUIRE(model.lookup("z") == nullptr);
  REQUIRE_FALSE(model.header_mismatch);
}

TEST_CASE("glove text format infers the dimension from the first line") {
  auto model = parse_embeddings("a 0.1 0.2\nb 0.3 0.4\n",
                                EmbeddingFormat::glove_text);
  REQUIRE(model.dim == 2);
  REQUIRE(model.size() == 2);
  REQUIRE((*model.lookup("b"))[1] == 0.4);
}

TEST_CASE("auto format detection keys on a two-integer header") {
  REQUIRE(parse_embeddings("2 3\na 1 0 0\nb 0 1 0\n",
                           EmbeddingFormat::auto_detect)
              .declared_vocab == 2);
  // no header: first line is a vector line
  auto glove = parse_embeddings("a 0.5 0.5\nb 1 2\n",
                                EmbeddingFormat::auto_detect);
  REQUIRE(glove.declared_vocab == 0);
  REQUIRE(glove.size() == 2);
  // "x 3" has two tokens but a non-integer first token: glove with d=1
  auto d1 = parse_embeddings("x 3\ny 4\n", EmbeddingFormat::auto_detect);
  REQUIRE(d1.dim == 1);
  REQUIRE(d1.size() == 2);
}

TEST_CASE("advisory header: fewer body lines than declared is a warning") {
  auto model = parse_embeddings("5 3\na 1 0 0\nb 0 1 0\n",
                                EmbeddingFormat::word2vec_text);
  REQUIRE(model.size() == 2);
  REQUIRE(model.declared_vocab == 5);
  REQUIRE(model.header_mismatch);
}

TEST_CASE("duplicate words: first occurrence wins and is counted") {
  auto model = parse_embeddings("a 1 0 0\na 9 9 9\nb 2 2 2\n",
                                EmbeddingFormat::glove_text);
  REQUIRE(model.size() == 2);
  REQUIRE(*model.lookup("a") == std::vector<double>{1, 0, 0});
  REQUIRE(model.duplicates_skipped == 1);
}

TEST_CASE("malformed vector lines are rejected with line numbers") {
  REQUIRE_THROWS_WITH(
      parse_embeddings("2 3\na 1 0 0\nb 0 1\n", EmbeddingFormat::word2vec_text,
                       "v.txt"),
      Catch::Matchers::ContainsSubstring("v.txt:3") &&
          Catch::Matchers::ContainsSubstring("expected 3 components, got 2"));
  REQUIRE_THROWS_WITH(
      parse_embeddings("a 1 2\nb x 2\n", EmbeddingFormat::glove_text),
      Catch::Matchers::ContainsSubstring("non-numeric"));
  REQUIRE_THROWS_WITH(
      parse_embeddings("x y z\na 1 1\n", EmbeddingFormat::word2vec_text),
      Catch::Matchers::ContainsSubstring("header"));
  REQUIRE_THROWS_WITH(parse_embeddings("", EmbeddingFormat::glove_text),
                      Catch::Matchers::ContainsSubstring("empty"));
}

TEST_CASE("values are read as 64-bit floats") {
  auto model =
      parse_embeddings("a 0.1000000000000000055511151231257827 -1e-300\n",
                       EmbeddingFormat::glove_text);
  REQUIRE((*model.lookup("a"))[0] == 0.1);
  REQUIRE((*model.lookup("a"))[1] == -1e-300);
}

TEST_CASE("glove serialization round-trips vectors exactly") {
  std::mt19937_64 rng(2024);
  EmbeddingModel model;
  model.dim = 7;
  for (int w = 0; w < 40; ++w) {
    std::vector<double> v(7);
    for (auto& x : v) {
      // mix of magnitudes, signs and subnormal-ish values
      double mag = std::exp(testutil::uniform(rng, -40.0, 40.0));
      x = (rng() & 1 ? 1.0 : -1.0) * mag * testutil::uniform01(rng);
    }
    model.vectors.emplace("tok" + std::to_string(w), std::move(v));
  }
  std::ostringstream out;
  save_embeddings_glove(model, out);
  auto back = parse_embeddings(out.str(), EmbeddingFormat::glove_text);
  REQUIRE(back.dim == model.dim);
  REQUIRE(back.vectors == model.vectors);
}

TEST_CASE("every lookup returns d components or nothing") {
  auto model = parse_embeddings("a 1 2 3\nb 4 5 6\n", EmbeddingFormat::glove_text);
  for (const auto& word : {"a", "b"})
    REQUIRE(model.lookup(word)->size() == 3);
  REQUIRE(model.lookup("missing") == nullptr);
}

TEST_CASE("load_embeddings reads from disk") {
  testutil::ScratchDir dir("embed");
  testutil::write_file(dir.file("vecs.txt"), "2 2\na 1 2\nb 3 4\n");
  auto model = load_embeddings(dir.file("vecs.txt"));
  REQUIRE(model.dim == 2);
  REQUIRE(model.name == "vecs");
  REQUIRE_THROWS(load_embeddings(dir.file("nope.txt")));
}
