#pragma once

// Runs one metric over every system output and keeps, next to each
// sentence score, the statistics needed for pooled corpus-level scores.

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "gecmetric/analysis.hpp"
#include "gecmetric/corpus.hpp"
#include "gecmetric/detectors.hpp"
#include "gecmetric/error.hpp"
#include "gecmetric/gleu.hpp"
#include "gecmetric/imeasure.hpp"
#include "gecmetric/lfm.hpp"
#include "gecmetric/maxmatch.hpp"
#include "gecmetric/ngram_lm.hpp"
#include "gecmetric/parallel.hpp"

namespace gecmetric {

enum class MetricKind { gleu, m2, imeasure, error_count, lfm };

inline std::string metric_name(MetricKind m) {
  switch (m) {
    case MetricKind::gleu: return "gleu";
    case MetricKind::m2: return "m2";
    case MetricKind::imeasure: return "imeasure";
    case MetricKind::error_count: return "error-count";
    case MetricKind::lfm: return "lfm";
  }
  return "?";
}

inline MetricKind parse_metric(const std::string& name) {
  for (auto m : {MetricKind::gleu, MetricKind::m2, MetricKind::imeasure, MetricKind::error_count,
                 MetricKind::lfm})
    if (metric_name(m) == name) return m;
  throw ValidationError("unknown metric '" + name + "'");
}

inline bool is_reference_based(MetricKind m) {
  return m == MetricKind::gleu || m == MetricKind::m2 || m == MetricKind::imeasure;
}

// LFM predicts per sentence only; every other metric also has a pooled form.
inline bool supports_corpus_mode(MetricKind m) { return m != MetricKind::lfm; }

inline std::string mode_name(AggregationMode m) {
  return m == AggregationMode::sentence ? "sentence" : "corpus";
}

struct MetricSettings {
  GleuConfig gleu;
  M2Config m2;
  IMeasureConfig imeasure;
};

// Everything a metric might need. Pointers are non-owning and may be null
// when the corresponding metric is not requested.
struct EvaluationData {
  Corpus corpus;
  bool has_gold = false;
  std::optional<ReferenceSet> references;
  std::vector<SystemOutput> systems;
  const DetectorSuite* detectors = nullptr;
  const LfmModel* lfm_model = nullptr;
  const NgramLm* lm = nullptr;
  const Wordlist* wordlist = nullptr;

  std::vector<std::string> system_ids() const {
    std::vector<std::string> ids;
    for (const auto& s : systems) ids.push_back(s.system_id);
    return ids;
  }
};

// One reference per annotator, materialized from the gold edits.
inline ReferenceSet references_from_gold(const Corpus& corpus) {
  std::vector<std::vector<Sentence>> rows;
  for (const auto& unit : corpus) {
    std::vector<Sentence> refs;
    for (const auto& set : unit.annotations()) refs.push_back(corrected(unit, set));
    rows.push_back(std::move(refs));
  }
  try {
    return ReferenceSet(std::move(rows));
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("cannot derive references from gold annotations: ") +
                          e.what() + "; pass reference files instead");
  }
}

struct ErrorCountStats {
  std::size_t errors = 0;
  std::size_t tokens = 0;
};

using SentenceStats = std::variant<std::monostate, std::vector<GleuStats>, M2SentenceResult,
                                   IMeasureResult, ErrorCountStats>;

struct MetricRun {
  MetricKind metric = MetricKind::gleu;
  std::vector<std::string> systems;
  std::vector<std::vector<double>> values;        // [system][sentence]
  std::vector<std::vector<SentenceStats>> stats;  // [system][sentence]

  ScoreTable table() const { return {metric_name(metric), systems, values}; }
};

inline void require_inputs(MetricKind m, const EvaluationData& d) {
  const std::string name = metric_name(m);
  switch (m) {
    case MetricKind::gleu:
    case MetricKind::imeasure:
      if (!d.references) throw ValidationError(name + " needs references");
      break;
    case MetricKind::m2:
      if (!d.has_gold) throw ValidationError("m2 needs gold annotations (an M2 file)");
      break;
    case MetricKind::error_count:
      if (!d.detectors || d.detectors->size() == 0)
        throw ValidationError("error-count needs at least one detector");
      break;
    case MetricKind::lfm:
      if (!d.lfm_model || !d.lm || !d.wordlist)
        throw ValidationError("lfm needs a model, a language model corpus and a wordlist");
      break;
  }
  auto report = validate_alignment(d.corpus, nullptr, d.references ? &*d.references : nullptr);
  for (const auto& sys : d.systems) {
    auto more = validate_alignment(d.corpus, &sys, nullptr);
    report.insert(report.end(), more.begin(), more.end());
  }
  if (!report.empty()) {
    std::string msg = "inputs are misaligned:";
    for (const auto& issue : report) msg += "\n  " + issue.message;
    throw ValidationError(msg);
  }
}

inline MetricRun score_metric(MetricKind metric, const EvaluationData& d,
                              const MetricSettings& cfg = {}, std::size_t jobs = 1) {
  require_inputs(metric, d);
  const std::size_t n = d.corpus.size();
  MetricRun run;
  run.metric = metric;
  run.systems = d.system_ids();
  run.values.assign(d.systems.size(), std::vector<double>(n));
  run.stats.assign(d.systems.size(), std::vector<SentenceStats>(n));

  for (std::size_t s = 0; s < d.systems.size(); ++s) {
    const auto& hyps = d.systems[s].hypotheses;
    auto& values = run.values[s];
    auto& stats = run.stats[s];
    switch (metric) {
      case MetricKind::gleu:
        parallel_for(n, jobs, [&](std::size_t i) {
          const auto& src = d.corpus[i].source();
          const auto refs = (*d.references)[i];
          values[i] = gleu_multi_ref(src, hyps[i], refs, cfg.gleu, i);
          std::vector<GleuStats> per_ref;
          for (const auto& r : refs) per_ref.push_back(gleu_stats(src, hyps[i], r, cfg.gleu.max_n));
          stats[i] = std::move(per_ref);
        });
        break;
      case MetricKind::m2:
        parallel_for(n, jobs, [&](std::size_t i) {
          auto res = m2_sentence(d.corpus[i].source(), hyps[i], d.corpus[i].annotations(), cfg.m2);
          values[i] = res.f;
          stats[i] = std::move(res);
        });
        break;
      case MetricKind::imeasure:
        parallel_for(n, jobs, [&](std::size_t i) {
          auto res = i_measure_detail(d.corpus[i].source(), hyps[i], (*d.references)[i], cfg.imeasure);
          values[i] = res.value;
          stats[i] = std::move(res);
        });
        break;
      case MetricKind::error_count: {
        const auto spans = d.detectors->detect_all(hyps);
        for (std::size_t i = 0; i < n; ++i) {
          values[i] = error_count_score(spans[i].size(), hyps[i].size());
          stats[i] = ErrorCountStats{spans[i].size(), hyps[i].size()};
        }
        break;
      }
      case MetricKind::lfm:
        parallel_for(n, jobs, [&](std::size_t i) {
          values[i] = lfm_score(hyps[i], *d.lfm_model, *d.lm, *d.wordlist);
        });
        break;
    }
  }
  return run;
}

// System score of one system: the mean sentence score, or the metric's
// pooled statistic in corpus mode.
inline double aggregate(const MetricRun& run, std::size_t system, AggregationMode mode,
                        const MetricSettings& cfg = {}) {
  const auto& values = run.values[system];
  if (mode == AggregationMode::sentence) return mean_of(values);
  const auto& stats = run.stats[system];
  switch (run.metric) {
    case MetricKind::gleu: {
      std::vector<std::vector<GleuStats>> rows;
      for (const auto& st : stats) rows.push_back(std::get<std::vector<GleuStats>>(st));
      return gleu_corpus(rows, cfg.gleu);
    }
    case MetricKind::m2: {
      std::vector<M2SentenceResult> rows;
      for (const auto& st : stats) rows.push_back(std::get<M2SentenceResult>(st));
      return m2_fbeta(m2_pool_running(rows, cfg.m2.beta), cfg.m2.beta);
    }
    case MetricKind::imeasure: {
      std::vector<IMeasureResult> rows;
      for (const auto& st : stats) rows.push_back(std::get<IMeasureResult>(st));
      return i_measure_pooled(rows, cfg.imeasure);
    }
    case MetricKind::error_count: {
      std::size_t errors = 0, tokens = 0;
      for (const auto& st : stats) {
        const auto& e = std::get<ErrorCountStats>(st);
        errors += e.errors;
        tokens += e.tokens;
      }
      return error_count_score(errors, tokens);
    }
    case MetricKind::lfm:
      throw ValidationError("lfm scores sentences only; corpus mode is not available");
  }
  return 0.0;
}

inline std::vector<SystemScore> system_scores(const MetricRun& run, AggregationMode mode,
                                              const MetricSettings& cfg = {}) {
  std::vector<SystemScore> out;
  for (std::size_t s = 0; s < run.systems.size(); ++s)
    out.push_back({run.systems[s], metric_name(run.metric), mode, aggregate(run, s, mode, cfg)});
  return out;
}

// Rescoring callback for reference ablation (reference-based metrics only).
// For m2 the "references" are annotator indices.
inline SubsetScorer make_subset_scorer(MetricKind metric, const EvaluationData& d,
                                       const MetricSettings& cfg) {
  require_inputs(metric, d);
  switch (metric) {
    case MetricKind::gleu:
      return [&d, cfg](std::size_t s, std::size_t i, std::span<const std::size_t> idx) {
        std::vector<Sentence> refs;
        for (auto k : idx) refs.push_back((*d.references)[i][k]);
        return gleu_multi_ref(d.corpus[i].source(), d.systems[s].hypotheses[i], refs, cfg.gleu, i);
      };
    case MetricKind::imeasure:
      return [&d, cfg](std::size_t s, std::size_t i, std::span<const std::size_t> idx) {
        std::vector<Sentence> refs;
        for (auto k : idx) refs.push_back((*d.references)[i][k]);
        return i_measure_sentence(d.corpus[i].source(), d.systems[s].hypotheses[i], refs,
                                  cfg.imeasure);
      };
    case MetricKind::m2:
      return [&d, cfg](std::size_t s, std::size_t i, std::span<const std::size_t> idx) {
        const auto all = d.corpus[i].annotations();
        std::vector<AnnotationSet> sets;
        for (auto k : idx) {
          if (k >= all.size())
            throw ValidationError("sentence " + std::to_string(i) + " has only " +
                                  std::to_string(all.size()) + " annotators");
          sets.push_back(all[k]);
        }
        return m2_sentence(d.corpus[i].source(), d.systems[s].hypotheses[i], sets, cfg.m2).f;
      };
    default:
      throw ValidationError(metric_name(metric) + " is not a reference-based metric");
  }
}

// Number of references available to every sentence for ablation.
inline std::size_t available_references(MetricKind metric, const EvaluationData& d) {
  if (metric == MetricKind::m2) {
    std::size_t k = SIZE_MAX;
    for (const auto& unit : d.corpus) k = std::min(k, unit.annotations().size());
    return d.corpus.empty() ? 0 : k;
  }
  return d.references ? d.references->refs_per_sentence() : 0;
}

// Rescoring callback for the gaming check: sentence i against the
// references of another sentence. Gold edits are tied to their own source
// sentence, so m2 is not supported.
inline AssignmentScorer make_assignment_scorer(MetricKind metric, const EvaluationData& d,
                                               const MetricSettings& cfg) {
  require_inputs(metric, d);
  switch (metric) {
    case MetricKind::gleu:
      return [&d, cfg](std::size_t s, std::size_t i, std::size_t owner) {
        return gleu_multi_ref(d.corpus[i].source(), d.systems[s].hypotheses[i],
                              (*d.references)[owner], cfg.gleu, i);
      };
    case MetricKind::imeasure:
      return [&d, cfg](std::size_t s, std::size_t i, std::size_t owner) {
        return i_measure_sentence(d.corpus[i].source(), d.systems[s].hypotheses[i],
                                  (*d.references)[owner], cfg.imeasure);
      };
    default:
      throw ValidationError("the gaming check needs gleu or imeasure as the reference-based metric");
  }
}

}  // namespace gecmetric
