#include <gtest/gtest.h>

#include <chrono>
#include <string>
#include <vector>

#include "gecmetric/checker.hpp"

using namespace gecmetric;
using namespace std::chrono_literals;

#ifndef FAKE_CHECKER_PATH
#error "FAKE_CHECKER_PATH must be defined"
#endif

namespace {

std::vector<std::string> cmd(const std::string& mode) { return {FAKE_CHECKER_PATH, mode}; }

std::vector<Sentence> batch(std::size_t n) {
  std::vector<Sentence> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(Sentence(std::vector<std::string>(i + 1, "t" + std::to_string(i))));
  return out;
}

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const DetectorError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Checker, EmptyResponses) {
  ExternalCheckerDetector d(cmd("empty"));
  EXPECT_TRUE(d.detect(tokenize("a b c")).empty());
  const auto all = d.detect_all(batch(5));
  ASSERT_EQ(all.size(), 5u);
  for (const auto& r : all) EXPECT_TRUE(r.empty());
}

TEST(Checker, SpanPassedThrough) {
  ExternalCheckerDetector d(cmd("span"), 1, "ext");
  const auto e = d.detect(tokenize("teh cat"));
  ASSERT_EQ(e.size(), 1u);
  EXPECT_EQ(e[0].start, 0u);
  EXPECT_EQ(e[0].end, 1u);
  EXPECT_EQ(e[0].category, "SPELL");
  EXPECT_EQ(e[0].detector, "ext");
  EXPECT_TRUE(d.detect(Sentence{}).empty());
}

TEST(Checker, OutOfOrderResponsesMatchedById) {
  const auto sentences = batch(6);
  CheckerSession session(cmd("reverse"), "rev");
  const auto res = session.check(sentences);
  ASSERT_EQ(res.size(), 6u);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(res[i].at(0).end, i + 1);
  const auto again = session.check(sentences);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(again[i].at(0).end, i + 1);
}

TEST(Checker, PoolAgreesWithSingleSession) {
  ExternalCheckerDetector one(cmd("span"), 1);
  ExternalCheckerDetector pool(cmd("span"), 4);
  auto sentences = batch(37);
  sentences[5] = Sentence{};
  const auto a = one.detect_all(sentences);
  const auto b = pool.detect_all(sentences);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    ASSERT_EQ(a[i].size(), b[i].size());
    EXPECT_EQ(a[i].size(), i == 5 ? 0u : 1u);
  }
}

TEST(Checker, InvalidJsonNamesLine) {
  ExternalCheckerDetector d(cmd("invalid"), 1, "lt");
  const auto msg = message_of([&] { d.detect(tokenize("x")); });
  EXPECT_NE(msg.find("{not json"), std::string::npos) << msg;
  EXPECT_NE(msg.find("lt"), std::string::npos) << msg;
}

TEST(Checker, ProtocolViolations) {
  ExternalCheckerDetector badspan(cmd("badspan"));
  EXPECT_NE(message_of([&] { badspan.detect(tokenize("x y")); }).find("out of bounds"), std::string::npos);
  ExternalCheckerDetector badid(cmd("badid"));
  EXPECT_NE(message_of([&] { badid.detect(tokenize("x")); }).find("unexpected id"), std::string::npos);
}

TEST(Checker, ProcessExit) {
  ExternalCheckerDetector d(cmd("exit"));
  const auto msg = message_of([&] { d.detect(tokenize("x")); });
  EXPECT_FALSE(msg.empty());
  // the broken session stays broken
  EXPECT_THROW(d.detect(tokenize("x")), DetectorError);
}

TEST(Checker, Timeout) {
  ExternalCheckerDetector d(cmd("hang"), 1, "slow", 300ms);
  const auto t0 = std::chrono::steady_clock::now();
  const auto msg = message_of([&] { d.detect(tokenize("x")); });
  EXPECT_NE(msg.find("timed out"), std::string::npos) << msg;
  EXPECT_LT(std::chrono::steady_clock::now() - t0, 5s);
}

TEST(Checker, MissingCommand) {
  EXPECT_THROW(ExternalCheckerDetector({"/nonexistent/checker-binary"}), DetectorError);
  EXPECT_THROW(ExternalCheckerDetector(std::vector<std::string>{}), DetectorError);
}

TEST(Checker, InsideSuite) {
  DetectorSuite suite;
  suite.add(std::make_shared<ExternalCheckerDetector>(cmd("span"), 2, "ext"));
  suite.add(make_builtin_detector("duplicate", nullptr));
  const auto e = suite.detect(tokenize("the the cat"));
  ASSERT_EQ(e.size(), 2u);
  EXPECT_EQ(e[0].category, "SPELL");
  EXPECT_EQ(e[1].category, "DUP");
}
