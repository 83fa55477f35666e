#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "tfcr/corpus.hpp"
#include "tfcr/harness.hpp"
#include "tfcr/weights.hpp"
#include "testutil.hpp"

#ifndef TFCR_CLI_PATH
#error "TFCR_CLI_PATH must point at the built CLI binary"
#endif

namespace {

int run_cli(const std::string& args, const std::filesystem::path& log) {
  std::string cmd = std::string(TFCR_CLI_PATH) + " " + args + " >" +
                    log.string() + " 2>&1";
  int status = std::system(cmd.c_str());
  if (status < 0) return -1;
  return WEXITSTATUS(status);
}

struct Fixture {
  testutil::ScratchDir dir{"cli"};

  Fixture() {
    std::mt19937_64 rng(2222);
    std::string tsv;
    for (int i = 0; i < 60; ++i) {
      int cat = static_cast<int>(rng() % 2);
      std::string text;
      int len = 4 + static_cast<int>(rng() % 6);
      for (int t = 0; t < len; ++t) {
        if (t) text += ' ';
        text += "c" + std::to_string(cat) + "tok" +
                std::to_string(rng() % 8u);
      }
      tsv += "cat" + std::to_string(cat) + "\t" + text + "\n";
    }
    testutil::write_file(dir.file("data.tsv"), tsv);

    std::string vecs;
    for (int cat = 0; cat < 2; ++cat)
      for (int w = 0; w < 8; ++w) {
        vecs += "c" + std::to_string(cat) + "tok" + std::to_string(w);
        for (int j = 0; j < 5; ++j)
          vecs += " " + tfcr::format_double(2.0 * testutil::uniform01(rng) - 1.0);
        vecs += "\n";
      }
    testutil::write_file(dir.file("vecs.txt"), vecs);

    nlohmann::json config = {
        {"dataset", {{"path", dir.file("data.tsv").string()}, {"format", "tsv"}}},
        {"embeddings",
         {{"path", dir.file("vecs.txt").string()}, {"format", "glove_text"}}},
        {"schemes", {"none", "tfcr"}},
        {"sizes", {10, 20}},
        {"n_folds", 2},
        {"train", {{"max_epochs", 50}}},
        {"base_seed", 5},
        {"output_dir", dir.file("out").string()},
    };
    testutil::write_file(dir.file("config.json"), config.dump(2));
  }
};

}  // namespace

TEST_CASE_METHOD(Fixture, "run executes the grid and writes result files") {
  int rc = run_cli("run --config " + dir.file("config.json").string(),
                   dir.file("run.log"));
  INFO(tfcr::read_file(dir.file("run.log").string()));
  REQUIRE(rc == 0);

  auto results = tfcr::read_file((dir.file("out") / "results.csv").string());
  auto lines = tfcr::content_lines(results);
  REQUIRE(lines.size() == 1 + 2 * 2 * 2);  // header + scheme x size x fold

  // rerun with --jobs 2 into another directory: byte-identical results
  int rc2 = run_cli("--jobs 2 run --config " + dir.file("config.json").string() +
                        " --out " + dir.file("out2").string(),
                    dir.file("run2.log"));
  REQUIRE(rc2 == 0);
  REQUIRE(tfcr::read_file((dir.file("out2") / "results.csv").string()) ==
          results);
}

TEST_CASE_METHOD(Fixture, "run exits non-zero when cells fail") {
  nlohmann::json config = nlohmann::json::parse(
      tfcr::read_file(dir.file("config.json").string()));
  config["sizes"] = {1, 20};  // single-document training sets cannot train
  config["output_dir"] = dir.file("out_fail").string();
  testutil::write_file(dir.file("config_fail.json"), config.dump());

  int rc = run_cli("run --config " + dir.file("config_fail.json").string(),
                   dir.file("fail.log"));
  REQUIRE(rc == 1);
  std::ifstream mf(dir.file("out_fail") / "manifest.json");
  auto manifest = nlohmann::json::parse(mf);
  REQUIRE(manifest["failed_cells"].get<int>() > 0);
}

TEST_CASE_METHOD(Fixture, "weights subcommand dumps an importable table") {
  int rc = run_cli("weights --dataset " + dir.file("data.tsv").string() +
                       " --scheme tfcr --out " + dir.file("w.tsv").string(),
                   dir.file("weights.log"));
  REQUIRE(rc == 0);
  auto table = tfcr::WeightTable::import_tsv_file(dir.file("w.tsv"),
                                                  tfcr::WeightScheme::tfcr);
  REQUIRE(table.k() == 2);
  REQUIRE(table.vocabulary_size() > 0);
  // disjoint vocabulary: every word is category-exclusive, so its own
  // category score is positive and the other category's is zero
  for (const auto& [word, row] : table.entries()) {
    int own = word[1] == '0' ? 0 : 1;
    REQUIRE(row[static_cast<std::size_t>(own)] > 0.0);
    REQUIRE(row[static_cast<std::size_t>(1 - own)] == 0.0);
  }
}

TEST_CASE_METHOD(Fixture, "repr subcommand dumps one row per document") {
  int rc = run_cli("repr --dataset " + dir.file("data.tsv").string() +
                       " --embeddings " + dir.file("vecs.txt").string() +
                       " --scheme tfcr --out " + dir.file("features.tsv").string(),
                   dir.file("repr.log"));
  REQUIRE(rc == 0);
  auto lines =
      tfcr::content_lines(tfcr::read_file(dir.file("features.tsv").string()));
  REQUIRE(lines.size() == 60);
  REQUIRE(tfcr::split(lines[0], '\t').size() == 2 * 5);  // k*d columns
}

TEST_CASE_METHOD(Fixture, "train then eval round-trips through model files") {
  int rc = run_cli("train --dataset " + dir.file("data.tsv").string() +
                       " --embeddings " + dir.file("vecs.txt").string() +
                       " --scheme tfcr --model-out " + dir.file("m.txt").string() +
                       " --weights-out " + dir.file("mw.tsv").string(),
                   dir.file("train.log"));
  REQUIRE(rc == 0);

  int rc2 = run_cli("eval --dataset " + dir.file("data.tsv").string() +
                        " --embeddings " + dir.file("vecs.txt").string() +
                        " --model " + dir.file("m.txt").string() +
                        " --weights " + dir.file("mw.tsv").string() +
                        " --scheme tfcr",
                    dir.file("eval.log"));
  REQUIRE(rc2 == 0);
  auto log = tfcr::read_file(dir.file("eval.log").string());
  REQUIRE(log.find("macro_f1=") != std::string::npos);
}

TEST_CASE_METHOD(Fixture, "convert-20ng flattens a directory tree to TSV") {
  auto root = dir.file("ng");
  std::filesystem::create_directories(root / "alt.atheism");
  std::filesystem::create_directories(root / "sci.space");
  testutil::write_file(root / "alt.atheism" / "001",
                       "From: someone\n\nFirst message\twith a tab\n");
  testutil::write_file(root / "alt.atheism" / "002", "Second message\n");
  testutil::write_file(root / "sci.space" / "010", "Orbital mechanics\n");

  int rc = run_cli("convert-20ng --in " + root.string() + " --out " +
                       dir.file("ng.tsv").string(),
                   dir.file("ng.log"));
  REQUIRE(rc == 0);
  auto corpus = tfcr::load_corpus(dir.file("ng.tsv"), tfcr::CorpusFormat::tsv);
  REQUIRE(corpus.documents.size() == 3);
  REQUIRE(corpus.label_set.labels() ==
          std::vector<std::string>{"alt.atheism", "sci.space"});
  REQUIRE(corpus.documents[0].text.find('\t') == std::string::npos);
}

TEST_CASE_METHOD(Fixture, "bad invocations exit non-zero") {
  REQUIRE(run_cli("run --config /nonexistent.json", dir.file("bad1.log")) != 0);
  REQUIRE(run_cli("weights --dataset /nonexistent.tsv --out x.tsv",
                  dir.file("bad2.log")) != 0);
  REQUIRE(run_cli("definitely-not-a-subcommand", dir.file("bad3.log")) != 0);
}
