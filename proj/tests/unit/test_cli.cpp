#include <gtest/gtest.h>

#include <json.hpp>

#include "support/cli_fixture.hpp"

using testgen::run_cli;

namespace {

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

nlohmann::json load_json(const std::string& path) { return nlohmann::json::parse(testgen::read_file(path)); }

}  // namespace

TEST(Cli, HelpAndUnknownFlags) {
  EXPECT_EQ(run_cli({"--help"}).code, 0);
  for (const char* sub : {"score", "rank", "correlate", "sweep", "ablate", "train-lfm", "check"}) {
    const auto r = run_cli({sub, "--help"});
    EXPECT_EQ(r.code, 0) << sub;
    EXPECT_NE(r.out.find("--"), std::string::npos) << sub;
  }
  EXPECT_EQ(run_cli({"score", "--bogus"}).code, 1);
  EXPECT_EQ(run_cli({}).code, 1);
  EXPECT_EQ(run_cli({"frobnicate"}).code, 1);
}

TEST(Cli, ScoreGleuOnReferencesIsOne) {
  testgen::CliFixture fx;
  const auto out = fx.path("r.json");
  const auto r = run_cli({"score", "--metric", "gleu", "--source", fx.path("src.txt"), "--ref",
                          fx.path("ref0.txt"), "--hyp", "perfect=" + fx.path("ref0.txt"), "--seed", "1",
                          "--output", out});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = load_json(out);
  EXPECT_EQ(j["format_version"], 1);
  ASSERT_EQ(j["systems"].size(), 1u);
  for (const auto& v : j["systems"][0]["per_sentence"]) EXPECT_EQ(v.get<double>(), 1.0);
  EXPECT_EQ(j["systems"][0]["corpus_score"].get<double>(), 1.0);
}

TEST(Cli, ScoreErrorCountOnCleanText) {
  testgen::CliFixture fx;
  const auto r = run_cli({"score", "--metric", "error-count", "--source", fx.path("src.txt"), "--hyp",
                          "clean=" + fx.path("ref0.txt"), "--wordlist", fx.path("words.txt"), "--output",
                          fx.path("e.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = load_json(fx.path("e.json"));
  for (const auto& v : j["systems"][0]["per_sentence"]) EXPECT_EQ(v.get<double>(), 1.0);
}

TEST(Cli, UsageErrors) {
  testgen::CliFixture fx;
  // m2 without gold
  EXPECT_EQ(run_cli(concat({"score", "--metric", "m2"}, fx.corpus_args())).code, 1);
  // no hypotheses
  EXPECT_EQ(run_cli({"score", "--metric", "error-count", "--source", fx.path("src.txt")}).code, 1);
  // unknown metric
  EXPECT_EQ(run_cli(concat({"score", "--metric", "bleu"}, fx.corpus_args())).code, 1);
  // both --m2 and --source
  EXPECT_EQ(run_cli(concat({"score", "--metric", "gleu", "--m2", fx.path("src.txt")}, fx.corpus_args())).code, 1);
}

TEST(Cli, ValidationErrors) {
  testgen::CliFixture fx;
  testgen::write_file(fx.path("short.txt"), "one line\n");
  auto r = run_cli({"score", "--metric", "gleu", "--source", fx.path("src.txt"), "--ref", fx.path("ref0.txt"),
                    "--hyp", "x=" + fx.path("short.txt"), "--seed", "1"});
  EXPECT_EQ(r.code, 2) << r.err;
  EXPECT_FALSE(r.err.empty());
  r = run_cli({"score", "--metric", "gleu", "--source", fx.path("missing.txt"), "--ref", fx.path("ref0.txt"),
               "--hyp", fx.path("ref0.txt"), "--seed", "1"});
  EXPECT_EQ(r.code, 2) << r.err;
  testgen::write_file(fx.path("bad.m2"), "S a b\nA 5 6|||X|||c|||REQUIRED|||-NONE-|||0\n");
  r = run_cli({"score", "--metric", "m2", "--m2", fx.path("bad.m2"), "--hyp", fx.path("short.txt")});
  EXPECT_EQ(r.code, 2) << r.err;
}

TEST(Cli, CheckerFailureExitCode) {
  testgen::CliFixture fx;
  const auto r = run_cli({"check", "a b c", "--detector", "duplicate", "--checker-cmd",
                          std::string(FAKE_CHECKER_PATH) + " invalid"});
  EXPECT_EQ(r.code, 3) << r.err;
  EXPECT_NE(r.err.find("external"), std::string::npos);
}

TEST(Cli, CheckListsErrors) {
  auto r = run_cli({"check", "a apple"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("ART"), std::string::npos);
  std::size_t art = 0;
  for (std::size_t p = 0; (p = r.out.find("\tART\t", p)) != std::string::npos; ++p) ++art;
  EXPECT_EQ(art, 1u) << r.out;
  r = run_cli({"check", "a apple", "--detector", "article"});
  EXPECT_NE(r.out.find("1 error in 1 sentence"), std::string::npos) << r.out;

  r = run_cli({"check", "teh cat", "--detector", "spell"});
  EXPECT_EQ(r.code, 1);  // spell needs a wordlist
}

TEST(Cli, CorrelateIdenticalRanking) {
  testgen::CliFixture fx;
  const auto r = run_cli(concat({"correlate", "--metric", "error-count", "--human", fx.path("human.tsv"),
                                 "--wordlist", fx.path("words.txt"), "--output", fx.path("c.json")},
                                fx.corpus_args()));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = load_json(fx.path("c.json"));
  ASSERT_EQ(j["correlations"].size(), 1u);
  EXPECT_EQ(j["correlations"][0]["spearman"].get<double>(), 1.0);
}

TEST(Cli, CorrelateWithSignificance) {
  testgen::CliFixture fx;
  const auto r = run_cli(concat({"correlate", "--metric", "gleu", "--metric", "imeasure", "--human",
                                 fx.path("human.tsv"), "--significance", "--seed", "3", "--gleu-iterations",
                                 "20", "--output", fx.path("c.json")},
                                fx.corpus_args()));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = load_json(fx.path("c.json"));
  EXPECT_EQ(j["correlations"].size(), 2u);
}

TEST(Cli, SweepHas101Points) {
  testgen::CliFixture fx;
  const auto r = run_cli(concat({"sweep", "--gbm", "error-count", "--rbm", "gleu", "--human",
                                 fx.path("human.tsv"), "--wordlist", fx.path("words.txt"), "--gaming",
                                 "--seed", "5", "--gleu-iterations", "20", "--output", fx.path("s.json")},
                                fx.corpus_args()));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = load_json(fx.path("s.json"));
  EXPECT_EQ(j["sweep"]["grid"].size(), 101u);
  EXPECT_GT(j["gaming"]["rbm_relative_drop"].get<double>(), 0.0);
}

TEST(Cli, SweepWithConstantComponent) {
  testgen::CliFixture fx;
  // no wordlist: error-count cannot see the injected misspellings
  const auto r = run_cli(concat({"sweep", "--gbm", "error-count", "--rbm", "gleu", "--human", fx.path("human.tsv"),
                                 "--seed", "2", "--gleu-iterations", "10", "--output", fx.path("s.json")},
                                fx.corpus_args()));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = load_json(fx.path("s.json"));
  EXPECT_TRUE(j["correlations"][0]["spearman"].is_null());
  EXPECT_TRUE(j["sweep"]["grid"][0]["spearman"].is_null());
  EXPECT_FALSE(j["sweep"]["oracle_spearman"]["value"].is_null());
}

TEST(Cli, AblateAndRank) {
  testgen::CliFixture fx;
  auto r = run_cli(concat({"ablate", "--gbm", "error-count", "--rbm", "imeasure", "--human", fx.path("human.tsv"),
                           "--trials", "3", "--seed", "9", "--output", fx.path("a.json")},
                          fx.corpus_args()));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = load_json(fx.path("a.json"));
  EXPECT_EQ(j["ablation"]["points"].size(), 2u);
  EXPECT_EQ(j["ablation"]["trials"], 3);

  r = run_cli(concat({"rank", "--metric", "error-count", "--wordlist", fx.path("words.txt")}, fx.corpus_args()));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_LT(r.out.find("sys00"), r.out.find("sys05"));
}

TEST(Cli, TrainLfmThenScore) {
  testgen::CliFixture fx;
  std::string train;
  for (std::size_t k = 0; k < fx.set.systems.size(); ++k)
    for (std::size_t i = 0; i < 10; ++i)
      train += gecmetric::detokenize(fx.set.systems[k].hypotheses[i]) + "\t" +
               std::to_string(1.0 - 0.1 * static_cast<double>(k)) + "\n";
  testgen::write_file(fx.path("train.tsv"), train);
  auto r = run_cli({"train-lfm", "--train", fx.path("train.tsv"), "--lm-corpus", fx.path("ref0.txt"),
                    "--wordlist", fx.path("words.txt"), "--output", fx.path("model.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  r = run_cli(concat({"score", "--metric", "lfm", "--lfm-model", fx.path("model.json"), "--lm-corpus",
                      fx.path("ref0.txt"), "--wordlist", fx.path("words.txt"), "--output", fx.path("l.json")},
                     fx.corpus_args()));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = load_json(fx.path("l.json"));
  EXPECT_TRUE(j["systems"][0]["corpus_score"].is_null());
  for (const auto& v : j["systems"][0]["per_sentence"]) {
    EXPECT_GE(v.get<double>(), 0.0);
    EXPECT_LE(v.get<double>(), 1.0);
  }
  r = run_cli(concat({"rank", "--metric", "lfm", "--mode", "corpus", "--lfm-model", fx.path("model.json"),
                      "--lm-corpus", fx.path("ref0.txt"), "--wordlist", fx.path("words.txt")},
                     fx.corpus_args()));
  EXPECT_NE(r.code, 0);
}

TEST(Cli, ReportsAreByteIdentical) {
  testgen::CliFixture fx;
  for (const char* jobs : {"1", "4"}) {
    const auto args = concat({"sweep", "--gbm", "error-count", "--rbm", "gleu", "--human", fx.path("human.tsv"),
                              "--gaming", "--seed", "21", "--gleu-iterations", "30", "--jobs", jobs,
                              "--wordlist", fx.path("words.txt")},
                             fx.corpus_args());
    auto a = args, b = args;
    a.insert(a.end(), {"--output", fx.path("a.json")});
    b.insert(b.end(), {"--output", fx.path("b.json")});
    const auto ra = run_cli(a), rb = run_cli(b);
    ASSERT_EQ(ra.code, 0) << ra.err;
    ASSERT_EQ(rb.code, 0) << rb.err;
    EXPECT_EQ(testgen::read_file(fx.path("a.json")), testgen::read_file(fx.path("b.json")));
  }
}
