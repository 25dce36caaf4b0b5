// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "gecmetric/gecmetric.hpp"
#include "oracles/gleu_oracle.hpp"
#include "oracles/m2_oracle.hpp"
#include "support/cli_fixture.hpp"
#include "support/fixed_detector.hpp"
#include "support/generators.hpp"
#include "support/m2_cases.hpp"
#include "support/synthetic.hpp"

using namespace gecmetric;

namespace {

struct Check {
  bool ok = true;
  std::ostringstream why;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) why << what;
    ok = ok && cond;
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<std::string> toks(const Sentence& s) { return {s.begin(), s.end()}; }

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// 1. GLEU against the multiset oracle.
void gleu_oracle(Check& c, std::string& detail) {
  const auto t0 = Clock::now();
  const std::vector<std::string> vocab = {"a", "b", "c"};
  const auto all = testgen::all_sentences(vocab, 3);
  std::size_t n = 0;
  double worst = 0.0;
  auto cmp = [&](const Sentence& s, const Sentence& h, const Sentence& r) {
    const double got = gleu_sentence(s, h, r);
    const double want = oracle::gleu(toks(s), toks(h), toks(r), 4);
    worst = std::max(worst, std::abs(got - want));
    ++n;
  };
  for (const auto& s : all)
    for (const auto& h : all)
      for (const auto& r : all) cmp(s, h, r);
  testgen::Rng rng(1);
  for (int k = 0; k < 10000; ++k)
    cmp(testgen::random_sentence(rng, vocab, 0, 6), testgen::random_sentence(rng, vocab, 0, 6),
        testgen::random_sentence(rng, vocab, 0, 6));
  const double t = seconds_since(t0);
  c.require(worst <= 1e-12, "max deviation " + fmt(worst));
  c.require(t < 30.0, "runtime " + fmt(t) + " s");
  detail = std::to_string(n) + " triples, max |diff| " + fmt(worst);
}

// 2. M2 against the edit-sequence enumerator.
void m2_oracle(Check& c, std::string& detail) {
  const auto t0 = Clock::now();
  const auto cases = testgen::m2_cases(2016, 1500);
  std::size_t mismatches = 0, with_tp = 0;
  for (const auto& k : cases) {
    const std::vector<AnnotationSet> sets{AnnotationSet(0, k.gold)};
    const auto got = m2_sentence(k.source, k.hypothesis, sets).best.counts;
    std::vector<oracle::GoldEdit> gold;
    for (const auto& g : k.gold) gold.push_back({g.start, g.end, toks(g.replacement)});
    const auto want = oracle::m2_counts(toks(k.source), toks(k.hypothesis), gold);
    if (got.tp != want.tp || got.fp != want.fp || got.fn != want.fn) ++mismatches;
    with_tp += got.tp > 0;
  }
  const double t = seconds_since(t0);
  c.require(cases.size() >= 1000, "too few cases");
  c.require(mismatches == 0, std::to_string(mismatches) + " mismatching cases");
  c.require(t < 60.0, "runtime " + fmt(t) + " s");
  detail = std::to_string(cases.size()) + " cases (" + std::to_string(with_tp) + " with tp > 0), " +
           std::to_string(mismatches) + " mismatches";
}

// 3. I-measure hand cases and range properties.
void imeasure(Check& c, std::string& detail) {
  const auto src = tokenize("he go home"), ref = tokenize("he goes home");
  auto i_of = [](const Sentence& s, const Sentence& h, const Sentence& r) {
    const std::vector<Sentence> refs{r};
    return i_measure_sentence(s, h, refs);
  };
  const double one = i_of(src, ref, ref), zero = i_of(src, src, ref),
               neg = i_of(src, tokenize("he gone home"), ref);
  c.require(std::abs(one - 1.0) <= 1e-12, "perfect case gave " + fmt(one));
  c.require(std::abs(zero) <= 1e-12, "unchanged case gave " + fmt(zero));
  c.require(std::abs(neg + 1.0 / 7.0) <= 1e-12, "bad case gave " + fmt(neg));
  testgen::Rng rng(3);
  const std::vector<std::string> vocab = {"a", "b", "c", "d"};
  std::size_t bad = 0;
  for (int k = 0; k < 1000; ++k) {
    const auto s = testgen::random_sentence(rng, vocab, 0, 7);
    const auto h = testgen::random_sentence(rng, vocab, 0, 7);
    const auto r = testgen::random_sentence(rng, vocab, 0, 7);
    const double v = i_of(s, h, r);
    if (!(v >= -1.0 && v <= 1.0)) ++bad;
    if (i_of(s, s, r) != 0.0) ++bad;
  }
  c.require(bad == 0, std::to_string(bad) + " property violations");
  detail = "I = " + fmt(one) + ", " + fmt(zero) + ", " + fmt(neg) + "; 1000 random triples";
}

// 4. Error-count formula and detector removal.
void error_count(Check& c, std::string& detail) {
  testgen::Rng rng(4);
  const std::vector<std::string> vocab = {"a", "b", "the", ".", "x"};
  std::size_t checks = 0;
  for (int t = 0; t < 500; ++t) {
    std::vector<std::shared_ptr<testgen::FixedDetector>> ds;
    DetectorSuite suite;
    std::vector<Sentence> sentences;
    for (int d = 0; d < 3; ++d) ds.push_back(std::make_shared<testgen::FixedDetector>("d" + std::to_string(d)));
    for (int i = 0; i < 4; ++i) {
      const auto s = testgen::random_sentence(rng, vocab, 0, 8);
      sentences.push_back(s);
      for (auto& d : ds) {
        std::vector<ErrorSpan> spans;
        const std::size_t n = testgen::pick(rng, 6);
        for (std::size_t e = 0; e < n; ++e) {
          const std::size_t a = testgen::pick(rng, s.size() + 1);
          const std::size_t b = a + testgen::pick(rng, s.size() - a + 1);
          spans.push_back({a, b, testgen::coin(rng) ? "X" : "Y", ""});
        }
        d->set(s, spans);
      }
    }
    for (auto& d : ds) suite.add(d);
    for (const auto& s : sentences) {
      const double got = error_count_score(s, suite);
      const double errors = static_cast<double>(suite.detect(s).size());
      const double want = s.empty() ? 1.0 : std::clamp(1.0 - errors / static_cast<double>(s.size()), 0.0, 1.0);
      c.require(got == want, "formula mismatch on '" + detokenize(s) + "'");
      for (const auto& d : ds)
        c.require(error_count_score(s, suite.without(d->id())) >= got, "removing " + d->id() + " lowered a score");
      ++checks;
    }
  }
  c.require(error_count_score(2, 10) == 0.8 && error_count_score(5, 3) == 0.0 &&
                error_count_score(0, 7) == 1.0,
            "hand examples");
  detail = std::to_string(checks) + " sentences, 3 detectors each";
}

// 5. Interpolation endpoints and linearity.
void interpolation(Check& c, std::string& detail) {
  testgen::Rng rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  long double worst = 0.0L;
  for (int t = 0; t < 10000; ++t) {
    const double f = u(rng), r = u(rng);
    c.require(interpolate(f, r, 0.0) == f, "lambda 0 not exact");
    c.require(interpolate(f, r, 1.0) == r, "lambda 1 not exact");
    for (int k = 0; k <= kLambdaSteps; ++k) {
      const double l = grid_lambda(k);
      const long double line = static_cast<long double>(f) + static_cast<long double>(l) * (static_cast<long double>(r) - f);
      worst = std::max(worst, std::abs(static_cast<long double>(interpolate(f, r, l)) - line));
    }
  }
  c.require(worst < 1e-15L, "linearity deviation " + fmt(static_cast<double>(worst)));
  c.require(std::abs(interpolate(0.8, 0.4, 0.25) - 0.7) < 1e-15, "0.8/0.4 at 0.25");
  detail = "10000 pairs x 101 grid points, max deviation " + fmt(static_cast<double>(worst));
}

// 6. Correlation statistics.
void statistics(Check& c, std::string& detail) {
  using V = std::vector<double>;
  auto near = [&](double got, double want, double tol, const std::string& what) {
    c.require(std::abs(got - want) <= tol, what + " = " + fmt(got));
  };
  near(spearman(V{1, 2, 3}, V{1, 2, 3}), 1.0, 1e-12, "spearman identity");
  near(spearman(V{1, 2, 3}, V{3, 2, 1}), -1.0, 1e-12, "spearman reversal");
  near(spearman(V{1, 2, 3, 4}, V{1, 3, 2, 4}), 0.8, 1e-12, "spearman swap");
  near(pearson(V{1, 2, 3, 4}, V{2, 4, 6, 8}), 1.0, 1e-12, "pearson 2x");
  near(pearson(V{1, 2, 3, 4}, V{4, 3, 2, 1}), -1.0, 1e-12, "pearson -x+5");
  near(pearson(V{1, 2, 3}, V{1, 2, 4}), 3.0 / std::sqrt(28.0 / 3.0), 1e-12, "pearson 1,2,4");
  const auto same = compare_correlations(0.42, 20, 0.42, 20);
  c.require(same.p == 1.0 && same.z == 0.0, "equal correlations p = " + fmt(same.p));
  c.require(std::round(std::atanh(0.6) * 1e5) / 1e5 == 0.69315, "atanh(0.6)");
  const auto t = compare_correlations(0.9, 12, 0.1, 12);
  near(t.z, (1.47222 - 0.10034) / std::sqrt(2.0 / 9.0), 1e-4, "fisher z");
  detail = "pearson(1,2,3;1,2,4) = " + fmt(pearson(V{1, 2, 3}, V{1, 2, 4})) + ", z(0.9,0.1,12) = " + fmt(t.z);
}

// 7. Ridge regression.
void ridge(Check& c, std::string& detail) {
  testgen::Rng rng(7);
  std::normal_distribution<double> g;
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const int rows = 10 + static_cast<int>(testgen::pick(rng, 30));
    Eigen::MatrixXd z(rows, 8);
    Eigen::VectorXd y(rows);
    for (int r = 0; r < rows; ++r) {
      for (int j = 0; j < 8; ++j) z(r, j) = g(rng);
      y(r) = g(rng);
    }
    const double alpha = std::uniform_real_distribution<double>(0.01, 5.0)(rng);
    const auto w = ridge_solve(z, y, alpha);
    Eigen::MatrixXd a = z.transpose() * z;
    a.diagonal().array() += alpha;
    worst = std::max(worst, (a * w - z.transpose() * y).cwiseAbs().maxCoeff());
  }
  c.require(worst < 1e-8, "residual " + fmt(worst));
  Eigen::MatrixXd x(3, 1);
  x << 1, 2, 3;
  Eigen::VectorXd y(3);
  y << 2, 4, 6;
  const double slope = train_ridge(x, y, {1.0, false}).raw_coefficients().first[0];
  c.require(std::abs(slope - 4.0 / 3.0) <= 1e-12, "alpha=1 slope " + fmt(slope));
  double prev = INFINITY;
  for (double alpha : {0.0, 0.5, 1.0, 2.0, 10.0, 100.0}) {
    const double s = std::abs(train_ridge(x, y, {alpha, false}).raw_coefficients().first[0]);
    c.require(s <= prev, "shrinkage not monotone at alpha " + fmt(alpha));
    prev = s;
  }
  detail = "max residual " + fmt(worst) + ", slope " + fmt(slope);
}

// 8. End-to-end synthetic experiment.
void synthetic(Check& c, std::string& detail) {
  const auto t0 = Clock::now();
  const auto set = testgen::make_synthetic(2016, 200, 12);
  const auto suite = testgen::builtin_suite(set.wordlist);
  auto d = testgen::evaluation_data(set, &suite);
  MetricSettings cfg;
  cfg.gleu.rng_seed = 2016;
  bool increasing = true;
  for (std::size_t k = 1; k < set.injected.size(); ++k) increasing = increasing && set.injected[k] > set.injected[k - 1];
  c.require(increasing, "injection rates not strictly increasing");

  const auto ec = score_metric(MetricKind::error_count, d, cfg, 0);
  const auto gl = score_metric(MetricKind::gleu, d, cfg, 0);
  const auto corr = correlate(system_scores(ec, AggregationMode::sentence, cfg), set.human);
  c.require(corr.spearman == 1.0, "error-count rho " + fmt(corr.spearman));

  const auto sweep = sweep_lambda(ec.table(), gl.table(), set.human);
  const double lo = sweep.grid.front().spearman, hi = sweep.grid.back().spearman;
  c.require(sweep.oracle_spearman.value >= std::max(lo, hi), "oracle below an endpoint");

  const auto gaming = gaming_check(ec.table(), make_assignment_scorer(MetricKind::gleu, d, cfg), 2016, 0.5, 0);
  c.require(gaming.rbm_relative_drop > 0.0, "no drop under shuffled references");

  // determinism
  const auto again = score_metric(MetricKind::gleu, d, cfg, 1);
  c.require(again.values == gl.values, "gleu scores differ between runs");
  const auto g2 = gaming_check(ec.table(), make_assignment_scorer(MetricKind::gleu, d, cfg), 2016, 0.5, 1);
  c.require(g2.mean_rbm_shuffled == gaming.mean_rbm_shuffled, "gaming check not deterministic");

  const double t = seconds_since(t0);
  c.require(t < 120.0, "runtime " + fmt(t) + " s");
  detail = "rho(error-count) " + fmt(corr.spearman) + ", endpoints " + fmt(lo) + "/" + fmt(hi) + ", oracle " +
           fmt(sweep.oracle_spearman.value) + " at lambda " + fmt(sweep.oracle_spearman.lambda) +
           ", gleu drop " + fmt(gaming.rbm_relative_drop) + ", " + fmt(t) + " s";
}

// 9. Sentence vs corpus aggregation.
void divergence(Check& c, std::string& detail) {
  DetectorSuite suite;
  suite.add(std::make_shared<testgen::TokenDetector>("bad", "x"));
  EvaluationData d;
  d.corpus = {AnnotatedSource(Sentence(std::vector<std::string>(10, "w"))),
              AnnotatedSource(Sentence(std::vector<std::string>(2, "w")))};
  d.systems = {{"A", {Sentence(std::vector<std::string>(10, "w")), Sentence(std::vector<std::string>(2, "x"))}}};
  d.detectors = &suite;
  const auto run = score_metric(MetricKind::error_count, d);
  const double corpus = aggregate(run, 0, AggregationMode::corpus);
  const double sentence = aggregate(run, 0, AggregationMode::sentence);
  c.require(corpus == 1.0 - 2.0 / 12.0, "corpus " + fmt(corpus));
  c.require(sentence == 0.5, "sentence " + fmt(sentence));

  testgen::Rng rng(9);
  const std::vector<std::string> vocab = {"a", "b", "c", "x", "."};
  std::size_t cases = 0;
  for (int t = 0; t < 300; ++t) {
    const auto src = testgen::random_sentence(rng, vocab, 0, 6);
    std::vector<AnnotationSet> sets;
    for (int a = 0; a < 2; ++a) sets.emplace_back(a, testgen::random_edits(rng, src, vocab, 3));
    EvaluationData one;
    one.corpus = {AnnotatedSource(src, sets)};
    one.has_gold = true;
    one.references = references_from_gold(one.corpus);
    one.systems = {{"A", {testgen::random_sentence(rng, vocab, 0, 6)}}};
    one.detectors = &suite;
    MetricSettings cfg;
    cfg.gleu.rng_seed = static_cast<std::uint64_t>(t);
    cfg.gleu.iterations = 50;
    for (auto m : {MetricKind::gleu, MetricKind::m2, MetricKind::imeasure, MetricKind::error_count}) {
      const auto r = score_metric(m, one, cfg);
      const double a = aggregate(r, 0, AggregationMode::sentence, cfg);
      const double b = aggregate(r, 0, AggregationMode::corpus, cfg);
      c.require(std::abs(a - b) <= 1e-12, metric_name(m) + " modes differ: " + fmt(a) + " vs " + fmt(b));
    }
    ++cases;
  }
  // lfm has no corpus mode
  MetricRun lfm;
  lfm.metric = MetricKind::lfm;
  lfm.systems = {"A"};
  lfm.values = {{0.5}};
  lfm.stats = {{std::monostate{}}};
  bool threw = false;
  try {
    aggregate(lfm, 0, AggregationMode::corpus);
  } catch (const ValidationError&) {
    threw = true;
  }
  c.require(threw, "lfm corpus mode did not fail");
  detail = "corpus " + fmt(corpus) + " vs sentence " + fmt(sentence) + "; " + std::to_string(cases) +
           " one-sentence corpora x 4 metrics";
}

// 10. Byte-identical CLI reports.
void reproducibility(Check& c, std::string& detail) {
  testgen::CliFixture fx(10, 40, 6);
  const std::vector<std::vector<std::string>> commands = {
      {"score", "--metric", "gleu", "--metric", "imeasure", "--metric", "error-count", "--wordlist",
       fx.path("words.txt")},
      {"correlate", "--metric", "gleu", "--mode", "both", "--human", fx.path("human.tsv"), "--significance"},
      {"sweep", "--gbm", "error-count", "--rbm", "gleu", "--human", fx.path("human.tsv"), "--gaming"},
      {"ablate", "--gbm", "error-count", "--rbm", "gleu", "--human", fx.path("human.tsv"), "--trials", "4"},
  };
  std::size_t runs = 0;
  for (std::size_t k = 0; k < commands.size(); ++k) {
    std::string first;
    for (const char* jobs : {"1", "1", "3"}) {
      auto args = commands[k];
      args.insert(args.end(), {"--seed", "77", "--gleu-iterations", "40", "--jobs", jobs, "--output",
                               fx.path("run.json")});
      const auto corpus = fx.corpus_args();
      args.insert(args.end(), corpus.begin(), corpus.end());
      const auto r = testgen::run_cli(args);
      c.require(r.code == 0, commands[k][0] + " exited " + std::to_string(r.code) + ": " + r.err);
      const auto bytes = testgen::read_file(fx.path("run.json"));
      if (first.empty()) first = bytes;
      c.require(!bytes.empty() && bytes == first, commands[k][0] + " report differs between runs");
      ++runs;
    }
  }
  detail = std::to_string(runs) + " runs over " + std::to_string(commands.size()) + " subcommands";
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Check&, std::string&)>>> criteria = {
      {"AC01 gleu matches brute-force oracle", gleu_oracle},
      {"AC02 m2 matches edit-sequence enumerator", m2_oracle},
      {"AC03 i-measure hand cases and range", imeasure},
      {"AC04 error-count formula and detector removal", error_count},
      {"AC05 interpolation endpoints and linearity", interpolation},
      {"AC06 correlation statistics", statistics},
      {"AC07 ridge normal equations and shrinkage", ridge},
      {"AC08 synthetic ranking experiment", synthetic},
      {"AC09 sentence vs corpus aggregation", divergence},
      {"AC10 byte-identical cli reports", reproducibility},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Check c;
    std::string detail;
    const auto t0 = Clock::now();
    try {
      fn(c, detail);
    } catch (const std::exception& e) {
      c.ok = false;
      c.why << "exception: " << e.what();
    }
    const double t = seconds_since(t0);
    std::printf("%s  %-48s %7.2fs  %s\n", c.ok ? "PASS" : "FAIL", name.c_str(), t,
                c.ok ? detail.c_str() : c.why.str().c_str());
    std::fflush(stdout);
    failed += c.ok ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
