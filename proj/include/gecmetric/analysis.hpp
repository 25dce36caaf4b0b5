#pragma once

// Interpolation of grammaticality (reference-less) and reference-based
// sentence scores, system ranking, the lambda sweep with oracle selection,
// reference-count ablation and the shuffled-reference gaming check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gecmetric/corpus.hpp"
#include "gecmetric/error.hpp"
#include "gecmetric/parallel.hpp"
#include "gecmetric/random.hpp"
#include "gecmetric/stats.hpp"
#include "gecmetric/text_io.hpp"

namespace gecmetric {

struct SentenceScore {
  std::string metric;
  std::string system;
  std::size_t sentence = 0;
  double value = 0.0;
};

struct SystemScore {
  std::string system;
  std::string metric;
  AggregationMode mode = AggregationMode::sentence;
  double value = 0.0;
};

// (1 - λ)·gbm + λ·rbm on raw values. The endpoints return the component
// scores exactly.
inline double interpolate(double gbm, double rbm, double lambda) {
  if (lambda == 1.0) return rbm;
  return gbm + lambda * (rbm - gbm);
}

inline SentenceScore interpolate(const SentenceScore& gbm, const SentenceScore& rbm, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ValidationError("lambda must lie in [0, 1]");
  if (gbm.system != rbm.system || gbm.sentence != rbm.sentence)
    throw ValidationError("cannot interpolate scores of different (system, sentence): (" +
                          gbm.system + ", " + std::to_string(gbm.sentence) + ") vs (" +
                          rbm.system + ", " + std::to_string(rbm.sentence) + ")");
  return {gbm.metric + "+" + rbm.metric, gbm.system, gbm.sentence,
          interpolate(gbm.value, rbm.value, lambda)};
}

// Arithmetic mean with a fixed left-to-right summation order.
inline double mean_of(std::span<const double> values) {
  if (values.empty()) return 0.0;
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

// Per-sentence scores of one metric for every system: values[s][i] is
// sentence i of systems[s].
struct ScoreTable {
  std::string metric;
  std::vector<std::string> systems;
  std::vector<std::vector<double>> values;

  std::size_t sentences() const { return values.empty() ? 0 : values[0].size(); }

  std::vector<double> system_means() const {
    std::vector<double> out;
    out.reserve(values.size());
    for (const auto& row : values) out.push_back(mean_of(row));
    return out;
  }
};

struct RankedSystem {
  std::string system;
  double value = 0.0;
  double rank = 0.0;  // 1 = best; ties share the average rank
};

inline std::vector<RankedSystem> rank_systems(std::span<const SystemScore> scores) {
  std::vector<double> values;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    for (std::size_t k = 0; k < i; ++k)
      if (scores[k].system == scores[i].system)
        throw ValidationError("duplicate system id '" + scores[i].system + "' in ranking");
    values.push_back(-scores[i].value);
  }
  const auto ranks = average_ranks(values);
  std::vector<RankedSystem> out;
  for (std::size_t i = 0; i < scores.size(); ++i)
    out.push_back({scores[i].system, scores[i].value, ranks[i]});
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.rank != b.rank ? a.rank < b.rank : a.system < b.system;
  });
  return out;
}

struct CorrelationReport {
  std::string metric;
  AggregationMode mode = AggregationMode::sentence;
  std::size_t n = 0;
  double spearman = 0.0;
  double pearson = 0.0;
};

inline std::vector<double> human_scores_for(std::span<const std::string> systems,
                                            const HumanRanking& human) {
  std::vector<double> out;
  for (const auto& s : systems) out.push_back(human.at(s));
  return out;
}

inline CorrelationReport correlate(std::span<const SystemScore> scores, const HumanRanking& human) {
  CorrelationReport rep;
  std::vector<double> metric, gold;
  for (const auto& s : scores) {
    metric.push_back(s.value);
    gold.push_back(human.at(s.system));
  }
  if (!scores.empty()) {
    rep.metric = scores[0].metric;
    rep.mode = scores[0].mode;
  }
  rep.n = scores.size();
  rep.spearman = spearman(metric, gold);
  rep.pearson = pearson(metric, gold);
  return rep;
}

struct LambdaPoint {
  double lambda = 0.0;
  double spearman = std::numeric_limits<double>::quiet_NaN();  // NaN when undefined
  double pearson = std::numeric_limits<double>::quiet_NaN();
};

struct OracleChoice {
  double lambda = 0.0;
  double value = std::numeric_limits<double>::quiet_NaN();
};

struct LambdaSweepResult {
  std::string gbm_metric;
  std::string rbm_metric;
  std::vector<LambdaPoint> grid;
  OracleChoice oracle_spearman;
  OracleChoice oracle_pearson;
};

inline constexpr int kLambdaSteps = 100;  // grid 0.00, 0.01, ..., 1.00

inline double grid_lambda(int k) { return static_cast<double>(k) / kLambdaSteps; }

inline void check_same_grid(const ScoreTable& a, const ScoreTable& b) {
  if (a.systems != b.systems) throw ValidationError("score tables cover different systems");
  for (std::size_t s = 0; s < a.values.size(); ++s)
    if (a.values[s].size() != b.values[s].size())
      throw ValidationError("score tables differ in sentence count for system '" + a.systems[s] + "'");
}

// Correlation of interpolated system scores with the human ranking for every
// grid λ. The oracle λ maximizes each statistic; ties go to the smaller λ.
inline LambdaSweepResult sweep_lambda(const ScoreTable& gbm, const ScoreTable& rbm,
                                      const HumanRanking& human) {
  check_same_grid(gbm, rbm);
  const auto gold = human_scores_for(gbm.systems, human);
  LambdaSweepResult out;
  out.gbm_metric = gbm.metric;
  out.rbm_metric = rbm.metric;
  for (int k = 0; k <= kLambdaSteps; ++k) {
    const double lambda = grid_lambda(k);
    std::vector<double> system_scores;
    for (std::size_t s = 0; s < gbm.values.size(); ++s) {
      double sum = 0.0;
      for (std::size_t i = 0; i < gbm.values[s].size(); ++i)
        sum += interpolate(gbm.values[s][i], rbm.values[s][i], lambda);
      system_scores.push_back(gbm.values[s].empty()
                                  ? 0.0
                                  : sum / static_cast<double>(gbm.values[s].size()));
    }
    LambdaPoint pt;
    pt.lambda = lambda;
    try {
      pt.spearman = spearman(system_scores, gold);
    } catch (const StatisticsError&) {
    }
    try {
      pt.pearson = pearson(system_scores, gold);
    } catch (const StatisticsError&) {
    }
    if (!std::isnan(pt.spearman) &&
        (std::isnan(out.oracle_spearman.value) || pt.spearman > out.oracle_spearman.value))
      out.oracle_spearman = {lambda, pt.spearman};
    if (!std::isnan(pt.pearson) &&
        (std::isnan(out.oracle_pearson.value) || pt.pearson > out.oracle_pearson.value))
      out.oracle_pearson = {lambda, pt.pearson};
    out.grid.push_back(pt);
  }
  return out;
}

// Scores sentence `sentence` of system `system` against the listed
// reference indices.
using SubsetScorer = std::function<double(std::size_t system, std::size_t sentence,
                                          std::span<const std::size_t> references)>;

struct AblationPoint {
  std::size_t references = 0;
  std::vector<double> trial_spearman;  // oracle ρ per trial
  double mean_spearman = 0.0;
  std::optional<double> ci_low;  // absent for a single trial
  std::optional<double> ci_high;
  double mean_pearson = 0.0;
};

struct AblationResult {
  std::size_t available_references = 0;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  std::vector<AblationPoint> points;
};

struct AblationConfig {
  std::vector<std::size_t> sizes;  // empty = 1..N
  std::size_t trials = 10;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
};

// For each reference count n, repeatedly samples n of the N references per
// sentence, rescores the reference-based metric and records the oracle
// interpolated correlation.
inline AblationResult ablate_references(const ScoreTable& gbm, const SubsetScorer& rbm,
                                        std::size_t available, const HumanRanking& human,
                                        AblationConfig cfg) {
  if (available < 1) throw ValidationError("reference ablation needs at least one reference");
  if (cfg.trials < 1) throw ValidationError("reference ablation needs at least one trial");
  if (cfg.sizes.empty())
    for (std::size_t n = 1; n <= available; ++n) cfg.sizes.push_back(n);
  AblationResult result;
  result.available_references = available;
  result.trials = cfg.trials;
  result.seed = cfg.seed;
  const std::size_t systems = gbm.systems.size();
  const std::size_t sentences = gbm.sentences();
  for (std::size_t n : cfg.sizes) {
    if (n < 1 || n > available)
      throw ValidationError("cannot sample " + std::to_string(n) + " of " +
                            std::to_string(available) + " references");
    AblationPoint pt;
    pt.references = n;
    std::vector<double> pearsons;
    for (std::size_t t = 0; t < cfg.trials; ++t) {
      std::vector<std::vector<std::size_t>> picks(sentences);
      for (std::size_t i = 0; i < sentences; ++i) {
        auto rng = substream(cfg.seed, (static_cast<std::uint64_t>(n) << 32) | t, i);
        picks[i] = sample_without_replacement(rng, available, n);
      }
      ScoreTable table{"rbm", gbm.systems,
                       std::vector<std::vector<double>>(systems, std::vector<double>(sentences))};
      parallel_for(systems * sentences, cfg.jobs, [&](std::size_t k) {
        const std::size_t s = k / sentences, i = k % sentences;
        table.values[s][i] = rbm(s, i, picks[i]);
      });
      const auto sweep = sweep_lambda(gbm, table, human);
      pt.trial_spearman.push_back(sweep.oracle_spearman.value);
      pearsons.push_back(sweep.oracle_pearson.value);
    }
    pt.mean_spearman = mean_of(pt.trial_spearman);
    pt.mean_spearman = std::clamp(pt.mean_spearman,
                                  *std::min_element(pt.trial_spearman.begin(), pt.trial_spearman.end()),
                                  *std::max_element(pt.trial_spearman.begin(), pt.trial_spearman.end()));
    pt.mean_pearson = mean_of(pearsons);
    if (cfg.trials > 1) {
      double ss = 0.0;
      for (double v : pt.trial_spearman) ss += (v - pt.mean_spearman) * (v - pt.mean_spearman);
      const double sd = std::sqrt(ss / static_cast<double>(cfg.trials - 1));
      const double half = 1.96 * sd / std::sqrt(static_cast<double>(cfg.trials));
      pt.ci_low = pt.mean_spearman - half;
      pt.ci_high = pt.mean_spearman + half;
    }
    result.points.push_back(std::move(pt));
  }
  return result;
}

// Scores sentence `sentence` of system `system` against the references
// belonging to sentence `reference_owner`.
using AssignmentScorer = std::function<double(std::size_t system, std::size_t sentence,
                                              std::size_t reference_owner)>;

struct GamingReport {
  std::vector<std::size_t> permutation;  // sentence i scored with refs of permutation[i]
  double lambda = 0.5;
  double mean_gbm = 0.0;
  double mean_rbm_true = 0.0;
  double mean_rbm_shuffled = 0.0;
  double mean_interpolated_true = 0.0;
  double mean_interpolated_shuffled = 0.0;
  double rbm_relative_drop = 0.0;
  double interpolated_relative_drop = 0.0;
};

// Rescores the reference-based metric with references reassigned by a
// seeded derangement and compares interpolated scores against the true
// assignment. Means are taken over every (system, sentence).
inline GamingReport gaming_check(const ScoreTable& gbm, const AssignmentScorer& rbm,
                                 std::uint64_t seed, double lambda = 0.5, std::size_t jobs = 1) {
  const std::size_t systems = gbm.systems.size();
  const std::size_t sentences = gbm.sentences();
  if (sentences < 2) throw ValidationError("the gaming check needs at least 2 sentences");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ValidationError("lambda must lie in [0, 1]");
  GamingReport rep;
  rep.lambda = lambda;
  auto rng = substream(seed, 0x67616d65);
  rep.permutation = random_derangement(rng, sentences);

  std::vector<double> truth(systems * sentences), shuffled(systems * sentences);
  parallel_for(systems * sentences, jobs, [&](std::size_t k) {
    const std::size_t s = k / sentences, i = k % sentences;
    truth[k] = rbm(s, i, i);
    shuffled[k] = rbm(s, i, rep.permutation[i]);
  });
  double g = 0.0, rt = 0.0, rs = 0.0, it = 0.0, is = 0.0;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    const double gv = gbm.values[k / sentences][k % sentences];
    g += gv;
    rt += truth[k];
    rs += shuffled[k];
    it += interpolate(gv, truth[k], lambda);
    is += interpolate(gv, shuffled[k], lambda);
  }
  const double n = static_cast<double>(truth.size());
  rep.mean_gbm = g / n;
  rep.mean_rbm_true = rt / n;
  rep.mean_rbm_shuffled = rs / n;
  rep.mean_interpolated_true = it / n;
  rep.mean_interpolated_shuffled = is / n;
  auto drop = [](double a, double b) { return a == 0.0 ? 0.0 : (a - b) / std::abs(a); };
  rep.rbm_relative_drop = drop(rep.mean_rbm_true, rep.mean_rbm_shuffled);
  rep.interpolated_relative_drop = drop(rep.mean_interpolated_true, rep.mean_interpolated_shuffled);
  return rep;
}

}  // namespace gecmetric
