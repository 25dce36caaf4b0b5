#pragma once

// Versioned JSON score reports. Keys are emitted in a fixed order and reals
// are rounded to a fixed number of significant digits, so identical runs
// give identical files.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gecmetric/analysis.hpp"
#include "gecmetric/corpus.hpp"
#include "gecmetric/error.hpp"

namespace gecmetric {

inline constexpr int kReportFormatVersion = 1;

struct SystemReportEntry {
  std::string id;
  std::string metric;
  AggregationMode mode = AggregationMode::sentence;
  double mean_sentence_score = 0.0;
  std::optional<double> corpus_score;  // absent for sentence-only metrics
  std::vector<double> per_sentence;
};

struct SignificanceEntry {
  std::string first;
  std::string second;
  double r1 = 0.0;
  std::size_t n1 = 0;
  double r2 = 0.0;
  std::size_t n2 = 0;
  CorrelationComparison test;
};

struct Report {
  std::vector<SystemReportEntry> systems;
  std::vector<CorrelationReport> correlations;
  std::optional<LambdaSweepResult> sweep;
  std::optional<AblationResult> ablation;
  std::optional<GamingReport> gaming;
  std::vector<SignificanceEntry> significance;
};

struct ReportOptions {
  int digits = 6;
};

namespace detail {

using ojson = nlohmann::ordered_json;

// Rounds to `digits` significant digits; non-finite values become null.
inline ojson real(double v, int digits) {
  if (!std::isfinite(v)) return nullptr;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  double r = std::strtod(buf, nullptr);
  if (r == 0.0) r = 0.0;  // no negative zero in reports
  return r;
}

inline ojson real(const std::optional<double>& v, int digits) {
  return v ? real(*v, digits) : ojson(nullptr);
}

inline ojson oracle_json(const OracleChoice& o, int d) {
  ojson j;
  j["lambda"] = real(o.lambda, d);
  j["value"] = real(o.value, d);
  return j;
}

}  // namespace detail

inline nlohmann::ordered_json report_json(const Report& r, const ReportOptions& opt = {}) {
  using detail::ojson;
  using detail::real;
  const int d = opt.digits;
  if (d < 1 || d > 17) throw ValidationError("report digits must be between 1 and 17");

  ojson j;
  j["format_version"] = kReportFormatVersion;

  j["systems"] = ojson::array();
  for (const auto& s : r.systems) {
    ojson e;
    e["id"] = s.id;
    e["metric"] = s.metric;
    e["mode"] = s.mode == AggregationMode::sentence ? "sentence" : "corpus";
    e["mean_sentence_score"] = real(s.mean_sentence_score, d);
    e["corpus_score"] = real(s.corpus_score, d);
    e["per_sentence"] = ojson::array();
    for (double v : s.per_sentence) e["per_sentence"].push_back(real(v, d));
    j["systems"].push_back(std::move(e));
  }

  j["correlations"] = ojson::array();
  for (const auto& c : r.correlations) {
    ojson e;
    e["metric"] = c.metric;
    e["mode"] = c.mode == AggregationMode::sentence ? "sentence" : "corpus";
    e["n"] = c.n;
    e["spearman"] = real(c.spearman, d);
    e["pearson"] = real(c.pearson, d);
    j["correlations"].push_back(std::move(e));
  }

  if (r.sweep) {
    ojson e;
    e["gbm_metric"] = r.sweep->gbm_metric;
    e["rbm_metric"] = r.sweep->rbm_metric;
    e["grid"] = ojson::array();
    for (const auto& p : r.sweep->grid) {
      ojson g;
      g["lambda"] = real(p.lambda, d);
      g["spearman"] = real(p.spearman, d);
      g["pearson"] = real(p.pearson, d);
      e["grid"].push_back(std::move(g));
    }
    e["oracle_spearman"] = detail::oracle_json(r.sweep->oracle_spearman, d);
    e["oracle_pearson"] = detail::oracle_json(r.sweep->oracle_pearson, d);
    j["sweep"] = std::move(e);
  } else {
    j["sweep"] = nullptr;
  }

  if (r.ablation) {
    ojson e;
    e["available_references"] = r.ablation->available_references;
    e["trials"] = r.ablation->trials;
    e["seed"] = r.ablation->seed;
    e["points"] = ojson::array();
    for (const auto& p : r.ablation->points) {
      ojson q;
      q["references"] = p.references;
      q["mean_spearman"] = real(p.mean_spearman, d);
      q["ci_low"] = real(p.ci_low, d);
      q["ci_high"] = real(p.ci_high, d);
      q["mean_pearson"] = real(p.mean_pearson, d);
      q["trial_spearman"] = ojson::array();
      for (double v : p.trial_spearman) q["trial_spearman"].push_back(real(v, d));
      e["points"].push_back(std::move(q));
    }
    j["ablation"] = std::move(e);
  }

  if (r.gaming) {
    const auto& g = *r.gaming;
    ojson e;
    e["lambda"] = real(g.lambda, d);
    e["mean_gbm"] = real(g.mean_gbm, d);
    e["mean_rbm_true"] = real(g.mean_rbm_true, d);
    e["mean_rbm_shuffled"] = real(g.mean_rbm_shuffled, d);
    e["mean_interpolated_true"] = real(g.mean_interpolated_true, d);
    e["mean_interpolated_shuffled"] = real(g.mean_interpolated_shuffled, d);
    e["rbm_relative_drop"] = real(g.rbm_relative_drop, d);
    e["interpolated_relative_drop"] = real(g.interpolated_relative_drop, d);
    e["permutation"] = g.permutation;
    j["gaming"] = std::move(e);
  }

  if (!r.significance.empty()) {
    j["significance"] = ojson::array();
    for (const auto& s : r.significance) {
      ojson e;
      e["first"] = s.first;
      e["second"] = s.second;
      e["r1"] = real(s.r1, d);
      e["n1"] = s.n1;
      e["r2"] = real(s.r2, d);
      e["n2"] = s.n2;
      e["z"] = real(s.test.z, d);
      e["p"] = real(s.test.p, d);
      j["significance"].push_back(std::move(e));
    }
  }
  return j;
}

inline std::string write_report(const Report& r, const ReportOptions& opt = {}) {
  return report_json(r, opt).dump(2) + "\n";
}

}  // namespace gecmetric
