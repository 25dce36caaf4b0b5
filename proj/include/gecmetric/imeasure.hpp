#pragma once

// Simplified I-measure. Source, hypothesis and reference are joined into
// aligned token triples through two pairwise Levenshtein alignments on the
// source; each triple is classified, and the weighted accuracy of the
// hypothesis is normalized against that of the unchanged source.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gecmetric/corpus.hpp"
#include "gecmetric/error.hpp"

namespace gecmetric {

struct IMeasureConfig {
  double weight = 2.0;

  void validate() const {
    if (!(weight > 0.0)) throw ValidationError("I-measure weight must be > 0");
  }
};

// fp and fn include the fpn triples (a wrong change to a token that needed
// correcting counts once as each).
struct TokenCounts {
  std::int64_t tp = 0;
  std::int64_t tn = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t fpn = 0;

  TokenCounts& operator+=(const TokenCounts& o) {
    tp += o.tp;
    tn += o.tn;
    fp += o.fp;
    fn += o.fn;
    fpn += o.fpn;
    return *this;
  }
  std::int64_t triples() const { return tp + tn + fp + fn - fpn; }
  friend bool operator==(const TokenCounts&, const TokenCounts&) = default;
};

namespace detail {

using Slot = std::optional<std::string>;

// Source-anchored alignment: target token (or gap) for every source token,
// and the target tokens inserted before each source position (index m holds
// trailing insertions).
struct SourceAlignment {
  std::vector<Slot> aligned;
  std::vector<std::vector<std::string>> inserted;
};

// Ties prefer a match, then a substitution, then a deletion, then an
// insertion when walking back from the end.
inline SourceAlignment align_to_source(const Sentence& source, const Sentence& target) {
  const std::size_t m = source.size(), n = target.size();
  std::vector<std::vector<int>> d(m + 1, std::vector<int>(n + 1));
  for (std::size_t i = 0; i <= m; ++i) d[i][0] = static_cast<int>(i);
  for (std::size_t j = 0; j <= n; ++j) d[0][j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= m; ++i)
    for (std::size_t j = 1; j <= n; ++j)
      d[i][j] = std::min({d[i - 1][j - 1] + (source[i - 1] == target[j - 1] ? 0 : 1),
                          d[i - 1][j] + 1, d[i][j - 1] + 1});

  SourceAlignment out;
  out.aligned.assign(m, std::nullopt);
  out.inserted.assign(m + 1, {});
  std::size_t i = m, j = n;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && source[i - 1] == target[j - 1] && d[i][j] == d[i - 1][j - 1]) {
      out.aligned[--i] = target[--j];
    } else if (i > 0 && j > 0 && d[i][j] == d[i - 1][j - 1] + 1) {
      out.aligned[--i] = target[--j];
    } else if (i > 0 && d[i][j] == d[i - 1][j] + 1) {
      --i;
    } else {
      out.inserted[i].push_back(target[--j]);
    }
  }
  for (auto& ins : out.inserted) std::reverse(ins.begin(), ins.end());
  return out;
}

inline void classify(const Slot& s, const Slot& h, const Slot& r, TokenCounts& c) {
  if (s == r) {
    if (h == s)
      ++c.tn;
    else
      ++c.fp;
  } else if (h == r) {
    ++c.tp;
  } else if (h == s) {
    ++c.fn;
  } else {
    ++c.fpn;
    ++c.fp;
    ++c.fn;
  }
}

}  // namespace detail

inline TokenCounts classify_tokens(const Sentence& source, const Sentence& hypothesis,
                                   const Sentence& reference) {
  const auto hyp = detail::align_to_source(source, hypothesis);
  const auto ref = detail::align_to_source(source, reference);
  TokenCounts c;
  for (std::size_t k = 0; k <= source.size(); ++k) {
    const auto& hi = hyp.inserted[k];
    const auto& ri = ref.inserted[k];
    for (std::size_t t = 0; t < std::max(hi.size(), ri.size()); ++t)
      detail::classify(std::nullopt, t < hi.size() ? detail::Slot(hi[t]) : std::nullopt,
                       t < ri.size() ? detail::Slot(ri[t]) : std::nullopt, c);
    if (k < source.size()) detail::classify(source[k], hyp.aligned[k], ref.aligned[k], c);
  }
  return c;
}

// Weighted accuracy; 1 when there is nothing to classify.
inline double weighted_accuracy(const TokenCounts& c, double w) {
  const double num = w * static_cast<double>(c.tp) + static_cast<double>(c.tn);
  const double den = w * static_cast<double>(c.tp + c.fp) + static_cast<double>(c.tn + c.fn) -
                     (w + 1.0) * static_cast<double>(c.fpn) / 2.0;
  if (den <= 0.0) return 1.0;
  return std::clamp(num / den, 0.0, 1.0);
}

// Baseline-normalized improvement in [-1, 1].
inline double i_from_accuracies(double sys, double base) {
  if (sys >= base) return base >= 1.0 ? 0.0 : (sys - base) / (1.0 - base);
  return sys / base - 1.0;
}

struct IMeasureResult {
  double value = 0.0;
  std::size_t best_reference = 0;
  TokenCounts system;    // hypothesis against the best reference
  TokenCounts baseline;  // source against the best reference
};

// Best I over the references (first reference on ties).
inline IMeasureResult i_measure_detail(const Sentence& source, const Sentence& hypothesis,
                                       std::span<const Sentence> references,
                                       const IMeasureConfig& cfg = {}) {
  cfg.validate();
  if (references.empty()) throw ValidationError("I-measure needs at least one reference");
  IMeasureResult best;
  for (std::size_t k = 0; k < references.size(); ++k) {
    const TokenCounts sys = classify_tokens(source, hypothesis, references[k]);
    const TokenCounts base = classify_tokens(source, source, references[k]);
    const double value = i_from_accuracies(weighted_accuracy(sys, cfg.weight),
                                           weighted_accuracy(base, cfg.weight));
    if (k == 0 || value > best.value) best = {value, k, sys, base};
  }
  return best;
}

inline double i_measure_sentence(const Sentence& source, const Sentence& hypothesis,
                                 std::span<const Sentence> references,
                                 const IMeasureConfig& cfg = {}) {
  return i_measure_detail(source, hypothesis, references, cfg).value;
}

// Corpus I from classification counts pooled over sentences.
inline double i_measure_pooled(std::span<const IMeasureResult> sentences,
                               const IMeasureConfig& cfg = {}) {
  TokenCounts sys, base;
  for (const auto& s : sentences) {
    sys += s.system;
    base += s.baseline;
  }
  return i_from_accuracies(weighted_accuracy(sys, cfg.weight),
                           weighted_accuracy(base, cfg.weight));
}

}  // namespace gecmetric
