#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "tfcr/repr.hpp"
#include "testutil.hpp"

using namespace tfcr;

namespace {

EmbeddingModel tiny_model() {
  EmbeddingModel m;
  m.dim = 2;
  m.vectors["w1"] = {2.0, -2.0};
  m.vectors["a"] = {1.0, 0.0};
  m.vectors["b"] = {0.0, 1.0};
  return m;
}

WeightTable tiny_weights() {
  // labels c1 < c2; w1 scores 0.5 in c1 and 0 in c2
  std::unordered_map<std::string, std::vector<double>> scores;
  scores["w1"] = {0.5, 0.0};
  scores["a"] = {1.0, 1.0};
  scores["b"] = {1.0, 1.0};
  return WeightTable(WeightScheme::tfcr, LabelSet({"c1", "c2"}),
                     std::move(scores));
}

// Random weight table over the testutil vocabulary with dyadic scores.
WeightTable random_weights(std::mt19937_64& rng, int k, int vocab) {
  std::unordered_map<std::string, std::vector<double>> scores;
  for (int w = 0; w < vocab; ++w) {
    std::vector<double> row(static_cast<std::size_t>(k));
    for (auto& s : row) s = std::abs(testutil::dyadic(rng));
    scores.emplace("w" + std::to_string(w), std::move(row));
  }
  return WeightTable(WeightScheme::tfcr, testutil::label_set_of_size(k),
                     std::move(scores));
}

std::vector<std::string> random_tokens(std::mt19937_64& rng, int vocab,
                                       int max_len) {
  std::vector<std::string> toks;
  int len = static_cast<int>(rng() % static_cast<unsigned>(max_len + 1));
  for (int i = 0; i < len; ++i)
    toks.push_back(testutil::vocab_word(rng, vocab));
  return toks;
}

}  // namespace

TEST_CASE("single-token weighted representation, by hand") {
  auto fv = weighted_repr({"w1"}, tiny_weights(), tiny_model());
  REQUIRE(fv.layout == ReprLayout::concat_kd);
  REQUIRE(fv.k == 2);
  REQUIRE(fv.d == 2);
  REQUIRE(fv.values == std::vector<double>{1.0, -1.0, 0.0, 0.0});
}

TEST_CASE("empty and all-OOV documents give the zero vector") {
  auto fv = weighted_repr({}, tiny_weights(), tiny_model());
  REQUIRE(fv.values == std::vector<double>(4, 0.0));
  auto oov = weighted_repr({"missing", "also-missing"}, tiny_weights(),
                           tiny_model());
  REQUIRE(oov.values == std::vector<double>(4, 0.0));
}

TEST_CASE("token multiplicity: a doubled token doubles the vector") {
  auto once = weighted_repr({"w1"}, tiny_weights(), tiny_model());
  auto twice = weighted_repr({"w1", "w1"}, tiny_weights(), tiny_model());
  for (std::size_t j = 0; j < once.values.size(); ++j)
    REQUIRE(twice.values[j] == 2.0 * once.values[j]);
}

TEST_CASE("tokens unseen at training contribute nothing") {
  EmbeddingModel m = tiny_model();
  m.vectors["not-in-weights"] = {7.0, 7.0};
  auto with_unseen =
      weighted_repr({"w1", "not-in-weights"}, tiny_weights(), m);
  auto without = weighted_repr({"w1"}, tiny_weights(), m);
  REQUIRE(with_unseen.values == without.values);
}

TEST_CASE("unweighted baseline: mean, sum and degenerate cases") {
  auto m = tiny_model();
  auto mean = unweighted_repr({"a", "b"}, m, BaselineMode::mean);
  REQUIRE(mean.layout == ReprLayout::plain_d);
  REQUIRE(mean.values == std::vector<double>{0.5, 0.5});

  auto sum = unweighted_repr({"a", "a", "b"}, m, BaselineMode::sum);
  REQUIRE(sum.values == std::vector<double>{2.0, 1.0});

  auto oov_mean = unweighted_repr({"zz", "yy"}, m, BaselineMode::mean);
  REQUIRE(oov_mean.values == std::vector<double>{0.0, 0.0});
}

TEST_CASE("linearity and permutation invariance on dyadic values") {
  std::mt19937_64 rng(808);
  for (int iter = 0; iter < 60; ++iter) {
    int k = 2 + static_cast<int>(rng() % 4);
    auto weights = random_weights(rng, k, 20);
    auto model = testutil::random_embeddings(rng, 20, 5);
    auto doc1 = random_tokens(rng, 20, 15);
    auto doc2 = random_tokens(rng, 20, 15);

    auto r1 = weighted_repr(doc1, weights, model);
    auto r2 = weighted_repr(doc2, weights, model);

    // concat(doc1, doc2)
    auto joined = doc1;
    joined.insert(joined.end(), doc2.begin(), doc2.end());
    auto rj = weighted_repr(joined, weights, model);
    REQUIRE(rj.values.size() == static_cast<std::size_t>(k) * 5);
    for (std::size_t j = 0; j < rj.values.size(); ++j)
      REQUIRE(rj.values[j] == r1.values[j] + r2.values[j]);

    // shuffled tokens give the identical vector
    auto shuffled = joined;
    tfcr::fisher_yates(shuffled, rng);
    auto rs = weighted_repr(shuffled, weights, model);
    REQUIRE(rs.values == rj.values);
  }
}

TEST_CASE("zeroing one category's weights zeroes exactly that block") {
  std::mt19937_64 rng(809);
  const int k = 3, d = 4, vocab = 12;
  auto model = testutil::random_embeddings(rng, vocab, d);
  auto weights = random_weights(rng, k, vocab);
  auto doc = random_tokens(rng, vocab, 20);
  doc.push_back("w0");  // non-empty
  auto base = weighted_repr(doc, weights, model);

  for (int zero_cat = 0; zero_cat < k; ++zero_cat) {
    std::unordered_map<std::string, std::vector<double>> scores;
    for (int w = 0; w < vocab; ++w) {
      std::string word = "w" + std::to_string(w);
      const auto* row = weights.row(word);
      auto copy = *row;
      copy[static_cast<std::size_t>(zero_cat)] = 0.0;
      scores.emplace(word, std::move(copy));
    }
    WeightTable zeroed(WeightScheme::tfcr, testutil::label_set_of_size(k),
                       std::move(scores));
    auto fv = weighted_repr(doc, zeroed, model);
    for (int c = 0; c < k; ++c)
      for (int j = 0; j < d; ++j) {
        double got = fv.values[static_cast<std::size_t>(c * d + j)];
        double want = c == zero_cat
                          ? 0.0
                          : base.values[static_cast<std::size_t>(c * d + j)];
        REQUIRE(got == want);
      }
  }
}

TEST_CASE("scheme=none weights with sum mode reproduce the unweighted sum "
          "over training vocabulary") {
  std::mt19937_64 rng(810);
  const int k = 3, vocab = 10;
  auto model = testutil::random_embeddings(rng, vocab + 5, 6);

  // weights know only w0..w9; the document also uses w10..w14
  std::unordered_map<std::string, std::vector<double>> scores;
  for (int w = 0; w < vocab; ++w)
    scores.emplace("w" + std::to_string(w),
                   std::vector<double>(static_cast<std::size_t>(k), 1.0));
  WeightTable ones(WeightScheme::none, testutil::label_set_of_size(k),
                   std::move(scores));

  auto doc = random_tokens(rng, vocab + 5, 30);
  auto weighted = weighted_repr(doc, ones, model);

  std::vector<std::string> in_vocab;
  for (const auto& t : doc)
    if (ones.row(t)) in_vocab.push_back(t);
  auto unweighted = unweighted_repr(in_vocab, model, BaselineMode::sum);

  for (int c = 0; c < k; ++c)
    for (int j = 0; j < 6; ++j)
      REQUIRE(weighted.values[static_cast<std::size_t>(c * 6 + j)] ==
              unweighted.values[static_cast<std::size_t>(j)]);
}

TEST_CASE("optional L2 normalization") {
  std::mt19937_64 rng(811);
  auto model = testutil::random_embeddings(rng, 10, 4);
  auto weights = random_weights(rng, 2, 10);
  ReprOptions normalize{true};

  auto fv = weighted_repr({"w1", "w2", "w3"}, weights, model, normalize);
  double norm = 0.0;
  for (double v : fv.values) norm += v * v;
  REQUIRE_THAT(std::sqrt(norm), Catch::Matchers::WithinAbs(1.0, 1e-12));

  // zero vectors stay zero instead of dividing by zero
  auto zero = weighted_repr({}, weights, model, normalize);
  REQUIRE(zero.values == std::vector<double>(8, 0.0));

  auto base = unweighted_repr({"w1"}, model, BaselineMode::mean, normalize);
  double bn = 0.0;
  for (double v : base.values) bn += v * v;
  REQUIRE_THAT(std::sqrt(bn), Catch::Matchers::WithinAbs(1.0, 1e-12));
}
