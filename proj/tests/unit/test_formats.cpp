#include <gtest/gtest.h>

#include <sstream>

#include "gecmetric/m2_format.hpp"
#include "gecmetric/report.hpp"
#include "gecmetric/text_io.hpp"
#include "support/generators.hpp"

using namespace gecmetric;

TEST(ParseM2, SingleEdit) {
  const auto doc = parse_m2("S a b c\nA 1 2|||R:VERB|||x|||REQUIRED|||-NONE-|||0\n");
  ASSERT_EQ(doc.size(), 1u);
  ASSERT_EQ(doc[0].annotations().size(), 1u);
  const auto& set = doc[0].annotations()[0];
  EXPECT_EQ(set.annotator(), 0);
  ASSERT_EQ(set.edits().size(), 1u);
  EXPECT_EQ(set.edits()[0].start, 1u);
  EXPECT_EQ(set.edits()[0].end, 2u);
  EXPECT_EQ(set.edits()[0].replacement, tokenize("x"));
  EXPECT_EQ(set.edits()[0].category, "R:VERB");
}

TEST(ParseM2, NoEditsGivesEmptyAnnotator) {
  const auto doc = parse_m2("S a b c\n\n");
  ASSERT_EQ(doc.size(), 1u);
  ASSERT_EQ(doc[0].annotations().size(), 1u);
  EXPECT_EQ(doc[0].annotations()[0].annotator(), 0);
  EXPECT_TRUE(doc[0].annotations()[0].empty());
}

TEST(ParseM2, AnnotationBeforeSource) {
  try {
    parse_m2("A 0 1|||X|||y|||R|||-|||0");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 1u);
  }
}

TEST(ParseM2, MalformedLines) {
  EXPECT_THROW(parse_m2("S a b\nA x 1|||R|||y|||REQUIRED|||-NONE-|||0\n"), ParseError);
  EXPECT_THROW(parse_m2("S a b\nA 0 1|||R|||y|||REQUIRED|||0\n"), ParseError);
  EXPECT_THROW(parse_m2("S a b\nA 0 1|||R|||y|||REQUIRED|||-NONE-|||z\n"), ParseError);
  EXPECT_THROW(parse_m2("S a b\nA 1 3|||R|||y|||REQUIRED|||-NONE-|||0\n"), ParseError);
  EXPECT_THROW(parse_m2("S a b\nB nonsense\n"), ParseError);
  try {
    parse_m2("S a b\n\nS c\nA 0 9|||R|||y|||REQUIRED|||-NONE-|||0\n");
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 4u);
  }
}

TEST(ParseM2, NoopAnnotatorsAndDeletions) {
  const auto doc = parse_m2(
      "S he go\n"
      "A 1 2|||R:VERB|||goes|||REQUIRED|||-NONE-|||0\n"
      "A -1 -1|||noop|||-NONE-|||REQUIRED|||-NONE-|||1\n"
      "A 0 1|||U:PRON|||-NONE-|||REQUIRED|||-NONE-|||2\n\n");
  ASSERT_EQ(doc[0].annotations().size(), 3u);
  EXPECT_TRUE(doc[0].annotations()[1].empty());
  EXPECT_EQ(doc[0].annotations()[1].annotator(), 1);
  EXPECT_TRUE(doc[0].annotations()[2].edits()[0].is_deletion());
}

TEST(ParseM2, BomAndCrlf) {
  const auto doc = parse_m2("\xEF\xBB\xBFS a b\r\nA 0 1|||R|||c|||REQUIRED|||-NONE-|||0\r\n\r\nS d\r\n");
  ASSERT_EQ(doc.size(), 2u);
  EXPECT_EQ(doc[0].source(), tokenize("a b"));
  EXPECT_EQ(doc[0].annotations()[0].edits()[0].replacement, tokenize("c"));
  EXPECT_EQ(doc[1].source(), tokenize("d"));
}

TEST(ParseM2, RoundTripProperty) {
  testgen::Rng rng(5);
  const std::vector<std::string> vocab = {"a", "b", "c", ".", "d"};
  for (int k = 0; k < 300; ++k) {
    M2Document doc;
    const std::size_t units = testgen::pick(rng, 4);
    for (std::size_t u = 0; u < units; ++u) {
      const auto src = testgen::random_sentence(rng, vocab, 0, 6);
      std::vector<AnnotationSet> sets;
      const std::size_t annotators = 1 + testgen::pick(rng, 3);
      for (std::size_t a = 0; a < annotators; ++a) {
        auto edits = testgen::random_edits(rng, src, vocab, 3);
        sets.emplace_back(static_cast<int>(a), std::move(edits));
      }
      doc.emplace_back(src, std::move(sets));
    }
    const auto text = serialize_m2(doc);
    const auto back = parse_m2(text);
    ASSERT_EQ(back, doc) << text;
    ASSERT_EQ(serialize_m2(back), text);
  }
}

TEST(ReadParallelText, Examples) {
  std::istringstream two("a b\nc d\n");
  EXPECT_EQ(read_parallel_text(two).size(), 2u);
  std::istringstream none("");
  EXPECT_TRUE(read_parallel_text(none).empty());
  std::istringstream blank("a\n\nb\n");
  const auto lines = read_parallel_text(blank);
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_TRUE(lines[1].empty());
  std::istringstream no_newline("a\nb");
  EXPECT_EQ(read_parallel_text(no_newline).size(), 2u);
}

TEST(HumanRankingIo, Examples) {
  const auto h = read_human_ranking("sysA\t0.9\nsysB\t0.1\n");
  EXPECT_EQ(h.size(), 2u);
  EXPECT_DOUBLE_EQ(h.at("sysA"), 0.9);
  EXPECT_DOUBLE_EQ(h.at("sysB"), 0.1);
  EXPECT_THROW(read_human_ranking("sysA\t0.9\nsysA\t0.2"), ValidationError);
  EXPECT_THROW(read_human_ranking("sysA\tx"), ParseError);
  EXPECT_THROW(read_human_ranking("sysA 0.5"), ParseError);
  EXPECT_THROW(h.at("sysC"), ValidationError);
}

TEST(WriteReport, EmptyInputs) {
  const auto j = nlohmann::json::parse(write_report({}));
  EXPECT_EQ(j["format_version"], 1);
  EXPECT_TRUE(j["systems"].is_array() && j["systems"].empty());
  EXPECT_TRUE(j["correlations"].is_array() && j["correlations"].empty());
  EXPECT_TRUE(j["sweep"].is_null());
}

TEST(WriteReport, KeyOrderAndRounding) {
  Report r;
  SystemReportEntry e;
  e.id = "A";
  e.metric = "gleu";
  e.mean_sentence_score = 2.0 / 3.0;
  e.corpus_score = 0.5;
  e.per_sentence = {1.0 / 3.0, std::numeric_limits<double>::quiet_NaN()};
  r.systems.push_back(e);
  const auto text = write_report(r);
  const auto j = nlohmann::ordered_json::parse(text);
  ASSERT_EQ(j["systems"].size(), 1u);
  std::vector<std::string> keys;
  for (auto it = j["systems"][0].begin(); it != j["systems"][0].end(); ++it) keys.push_back(it.key());
  EXPECT_EQ(keys, (std::vector<std::string>{"id", "metric", "mode", "mean_sentence_score",
                                            "corpus_score", "per_sentence"}));
  EXPECT_NE(text.find("0.666667"), std::string::npos);
  EXPECT_TRUE(j["systems"][0]["per_sentence"][1].is_null());
  EXPECT_NE(write_report(r, {3}).find("0.667"), std::string::npos);
  std::vector<std::string> top;
  for (auto it = j.begin(); it != j.end(); ++it) top.push_back(it.key());
  EXPECT_EQ(top, (std::vector<std::string>{"format_version", "systems", "correlations", "sweep"}));
}

TEST(WriteReport, SweepHas101Entries) {
  Report r;
  LambdaSweepResult s;
  for (int k = 0; k <= kLambdaSteps; ++k) s.grid.push_back({grid_lambda(k), 0.5, 0.25});
  r.sweep = s;
  const auto j = nlohmann::json::parse(write_report(r));
  EXPECT_EQ(j["sweep"]["grid"].size(), 101u);
  EXPECT_DOUBLE_EQ(j["sweep"]["grid"][37]["lambda"].get<double>(), 0.37);
}
