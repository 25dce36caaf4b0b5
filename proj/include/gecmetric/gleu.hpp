#pragma once

// Sentence-level GLEU, the tuning-free variant: n-gram precision against a
// reference where n-grams shared by the source and hypothesis but absent
// from the reference are subtracted from the matches.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "gecmetric/corpus.hpp"
#include "gecmetric/error.hpp"
#include "gecmetric/random.hpp"

namespace gecmetric {

enum class GleuMode { sampled, mean_over_all };

struct GleuConfig {
  int max_n = 4;
  int iterations = 500;
  std::uint64_t rng_seed = 0;
  GleuMode multi_ref_mode = GleuMode::sampled;

  void validate() const {
    if (max_n < 1) throw ValidationError("GLEU max_n must be >= 1");
    if (iterations < 1) throw ValidationError("GLEU iterations must be >= 1");
  }
};

// Sufficient statistics for one (hypothesis, reference) pair. They add up
// across sentences for the pooled corpus score.
struct GleuStats {
  std::vector<std::int64_t> numerator;    // per n, already clipped at 0
  std::vector<std::int64_t> denominator;  // per n
  std::int64_t hyp_len = 0;
  std::int64_t ref_len = 0;

  GleuStats& operator+=(const GleuStats& o) {
    if (numerator.empty()) {
      numerator.assign(o.numerator.size(), 0);
      denominator.assign(o.denominator.size(), 0);
    }
    for (std::size_t n = 0; n < o.numerator.size(); ++n) {
      numerator[n] += o.numerator[n];
      denominator[n] += o.denominator[n];
    }
    hyp_len += o.hyp_len;
    ref_len += o.ref_len;
    return *this;
  }
};

namespace detail {

using NgramCounts = std::unordered_map<std::string, std::int64_t>;

inline NgramCounts count_ngrams(const Sentence& s, int n) {
  NgramCounts counts;
  const auto len = static_cast<int>(s.size());
  for (int i = 0; i + n <= len; ++i) {
    std::string key = s[static_cast<std::size_t>(i)];
    for (int k = 1; k < n; ++k) {
      key += ' ';
      key += s[static_cast<std::size_t>(i + k)];
    }
    ++counts[key];
  }
  return counts;
}

inline std::int64_t count_of(const NgramCounts& c, const std::string& key) {
  auto it = c.find(key);
  return it == c.end() ? 0 : it->second;
}

// Mean of values, kept inside [min, max] so that a constant sequence
// averages to exactly that constant.
inline double bounded_mean(std::span<const double> values) {
  double sum = 0.0;
  double lo = values[0], hi = values[0];
  for (double v : values) {
    sum += v;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return std::clamp(sum / static_cast<double>(values.size()), lo, hi);
}

}  // namespace detail

inline GleuStats gleu_stats(const Sentence& source, const Sentence& hypothesis,
                            const Sentence& reference, int max_n) {
  GleuStats st;
  st.numerator.assign(static_cast<std::size_t>(max_n), 0);
  st.denominator.assign(static_cast<std::size_t>(max_n), 0);
  st.hyp_len = static_cast<std::int64_t>(hypothesis.size());
  st.ref_len = static_cast<std::int64_t>(reference.size());
  for (int n = 1; n <= max_n; ++n) {
    const auto h = detail::count_ngrams(hypothesis, n);
    const auto r = detail::count_ngrams(reference, n);
    const auto s = detail::count_ngrams(source, n);
    std::int64_t matches = 0, penalty = 0, total = 0;
    for (const auto& [gram, ch] : h) {
      const std::int64_t cr = detail::count_of(r, gram);
      const std::int64_t cs = detail::count_of(s, gram);
      matches += std::min(ch, cr);
      penalty += std::min(ch, std::max<std::int64_t>(0, cs - cr));
      total += ch;
    }
    st.numerator[static_cast<std::size_t>(n - 1)] = std::max<std::int64_t>(0, matches - penalty);
    st.denominator[static_cast<std::size_t>(n - 1)] = total;
  }
  return st;
}

// Score from (possibly pooled) statistics. A zero numerator is smoothed to
// 1 / (2 (denominator + 1)); an order with no hypothesis n-grams counts as 1.
inline double gleu_from_stats(const GleuStats& st) {
  if (st.hyp_len == 0) return 0.0;
  const std::size_t orders = st.numerator.size();
  double log_sum = 0.0;
  for (std::size_t n = 0; n < orders; ++n) {
    const auto num = st.numerator[n];
    const auto den = st.denominator[n];
    double p = 1.0;
    if (den == 0)
      p = 1.0;
    else if (num == 0)
      p = 1.0 / (2.0 * (static_cast<double>(den) + 1.0));
    else
      p = static_cast<double>(num) / static_cast<double>(den);
    log_sum += std::log(p);
  }
  const double bp =
      st.hyp_len >= st.ref_len
          ? 1.0
          : std::exp(1.0 - static_cast<double>(st.ref_len) / static_cast<double>(st.hyp_len));
  return std::clamp(bp * std::exp(log_sum / static_cast<double>(orders)), 0.0, 1.0);
}

inline double gleu_sentence(const Sentence& source, const Sentence& hypothesis,
                            const Sentence& reference, const GleuConfig& cfg = {}) {
  cfg.validate();
  return gleu_from_stats(gleu_stats(source, hypothesis, reference, cfg.max_n));
}

// Reference picked at each of the K sampling iterations for one sentence.
inline std::vector<std::size_t> gleu_reference_draws(const GleuConfig& cfg,
                                                     std::size_t sentence_index,
                                                     std::size_t n_refs) {
  auto rng = substream(cfg.rng_seed, sentence_index);
  std::vector<std::size_t> draws(static_cast<std::size_t>(cfg.iterations));
  for (auto& d : draws) d = uniform_index(rng, n_refs);
  return draws;
}

// Multi-reference sentence score. Sampled mode averages over K uniformly
// drawn references (seeded per sentence); mean-over-all averages over every
// reference once.
inline double gleu_multi_ref(const Sentence& source, const Sentence& hypothesis,
                             std::span<const Sentence> references, const GleuConfig& cfg = {},
                             std::size_t sentence_index = 0) {
  cfg.validate();
  if (references.empty()) throw ValidationError("GLEU needs at least one reference");
  std::vector<double> per_ref;
  per_ref.reserve(references.size());
  for (const auto& r : references) per_ref.push_back(gleu_sentence(source, hypothesis, r, cfg));
  if (cfg.multi_ref_mode == GleuMode::mean_over_all || references.size() == 1)
    return detail::bounded_mean(per_ref);
  std::vector<double> samples;
  samples.reserve(static_cast<std::size_t>(cfg.iterations));
  for (std::size_t d : gleu_reference_draws(cfg, sentence_index, references.size()))
    samples.push_back(per_ref[d]);
  return detail::bounded_mean(samples);
}

// Pooled-count corpus GLEU. `per_ref_stats[i][j]` holds the statistics of
// sentence i against its reference j. Mean-over-all mode averages the
// corpus score over reference columns; sampled mode averages over K
// iterations, iteration k using each sentence's k-th draw.
inline double gleu_corpus(std::span<const std::vector<GleuStats>> per_ref_stats,
                          const GleuConfig& cfg = {}) {
  cfg.validate();
  if (per_ref_stats.empty()) return 0.0;
  const std::size_t n_refs = per_ref_stats[0].size();
  for (const auto& row : per_ref_stats)
    if (row.size() != n_refs || row.empty())
      throw ValidationError("corpus GLEU needs the same non-zero reference count per sentence");
  std::vector<double> scores;
  if (cfg.multi_ref_mode == GleuMode::mean_over_all || n_refs == 1) {
    for (std::size_t j = 0; j < n_refs; ++j) {
      GleuStats pooled;
      for (const auto& row : per_ref_stats) pooled += row[j];
      scores.push_back(gleu_from_stats(pooled));
    }
  } else {
    std::vector<std::vector<std::size_t>> draws;
    draws.reserve(per_ref_stats.size());
    for (std::size_t i = 0; i < per_ref_stats.size(); ++i)
      draws.push_back(gleu_reference_draws(cfg, i, n_refs));
    for (std::size_t k = 0; k < static_cast<std::size_t>(cfg.iterations); ++k) {
      GleuStats pooled;
      for (std::size_t i = 0; i < per_ref_stats.size(); ++i) pooled += per_ref_stats[i][draws[i][k]];
      scores.push_back(gleu_from_stats(pooled));
    }
  }
  return detail::bounded_mean(scores);
}

}  // namespace gecmetric
