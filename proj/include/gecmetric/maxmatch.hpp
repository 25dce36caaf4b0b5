#pragma once

// MaxMatch (M2): extract the system's edits from a source/hypothesis pair
// so that they overlap the gold edits as much as possible, then score
// precision, recall and F-beta.
//
// The system edits are read off a shortest path through an edit lattice:
// every edge lying on some minimal-cost token Levenshtein alignment, plus
// merged "phrase" edges spanning any lattice path with at most
// max_unchanged_words matched tokens. Edit edges cost 1 + 0.001 per token
// spanned, and an edge equal to a gold edit earns gold_match_reward.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "gecmetric/corpus.hpp"
#include "gecmetric/error.hpp"

namespace gecmetric {

struct M2Config {
  double beta = 0.5;
  int max_unchanged_words = 2;
  double gold_match_reward = 1000.0;

  void validate() const {
    if (!(beta > 0.0)) throw ValidationError("M2 beta must be > 0");
    if (max_unchanged_words < 0) throw ValidationError("M2 max_unchanged_words must be >= 0");
    if (!(gold_match_reward > 0.0)) throw ValidationError("M2 gold_match_reward must be > 0");
  }
};

struct M2Counts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;

  M2Counts& operator+=(const M2Counts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
  friend M2Counts operator+(M2Counts a, const M2Counts& b) { return a += b; }
  friend bool operator==(const M2Counts&, const M2Counts&) = default;
};

struct M2SentenceCounts {
  M2Counts counts;
  int chosen_annotator = 0;
};

struct M2PRF {
  double precision = 1.0;
  double recall = 1.0;
  double f = 1.0;
};

// Precision and recall are 1 on empty denominators; F is 0 when P = R = 0.
inline M2PRF m2_prf(const M2Counts& c, double beta) {
  M2PRF out;
  out.precision = c.tp + c.fp == 0 ? 1.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  out.recall = c.tp + c.fn == 0 ? 1.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  const double b2 = beta * beta;
  const double denom = b2 * out.precision + out.recall;
  out.f = denom == 0.0 ? 0.0 : (1.0 + b2) * out.precision * out.recall / denom;
  return out;
}

inline double m2_fbeta(const M2Counts& c, double beta) { return m2_prf(c, beta).f; }

namespace detail {

// Gold edits whose replacement equals the source span change nothing.
inline bool is_identity_edit(const Sentence& source, const Edit& e) {
  if (e.end - e.start != e.replacement.size()) return false;
  for (std::size_t k = 0; k < e.replacement.size(); ++k)
    if (source[e.start + k] != e.replacement[k]) return false;
  return true;
}

class EditLattice {
 public:
  EditLattice(const Sentence& source, const Sentence& hypothesis)
      : src_(source), hyp_(hypothesis), rows_(source.size() + 1), cols_(hypothesis.size() + 1),
        fwd_(rows_ * cols_), bwd_(rows_ * cols_) {
    const std::size_t m = source.size(), n = hypothesis.size();
    for (std::size_t i = 0; i <= m; ++i)
      for (std::size_t j = 0; j <= n; ++j) {
        int& d = fwd_[id(i, j)];
        if (i == 0 || j == 0) {
          d = static_cast<int>(i + j);
          continue;
        }
        d = std::min({fwd_[id(i - 1, j - 1)] + (source[i - 1] == hypothesis[j - 1] ? 0 : 1),
                      fwd_[id(i - 1, j)] + 1, fwd_[id(i, j - 1)] + 1});
      }
    for (std::size_t i = m + 1; i-- > 0;)
      for (std::size_t j = n + 1; j-- > 0;) {
        int& d = bwd_[id(i, j)];
        if (i == m || j == n) {
          d = static_cast<int>((m - i) + (n - j));
          continue;
        }
        d = std::min({bwd_[id(i + 1, j + 1)] + (source[i] == hypothesis[j] ? 0 : 1),
                      bwd_[id(i + 1, j)] + 1, bwd_[id(i, j + 1)] + 1});
      }
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t id(std::size_t i, std::size_t j) const { return i * cols_ + j; }
  int total() const { return fwd_.back(); }
  int forward(std::size_t i, std::size_t j) const { return fwd_[id(i, j)]; }

  bool on_lattice(std::size_t i, std::size_t j) const {
    return fwd_[id(i, j)] + bwd_[id(i, j)] == total();
  }
  bool is_match(std::size_t i, std::size_t j) const {
    return i < rows_ - 1 && j < cols_ - 1 && src_[i] == hyp_[j];
  }

  // Lattice edge from (i, j) by move (di, dj) in {(1,1), (1,0), (0,1)}.
  bool has_edge(std::size_t i, std::size_t j, std::size_t di, std::size_t dj) const {
    if (i + di >= rows_ || j + dj >= cols_) return false;
    int cost = 1;
    if (di == 1 && dj == 1) cost = src_[i] == hyp_[j] ? 0 : 1;
    return fwd_[id(i, j)] + cost + bwd_[id(i + di, j + dj)] == total();
  }

 private:
  const Sentence& src_;
  const Sentence& hyp_;
  std::size_t rows_, cols_;
  std::vector<int> fwd_, bwd_;
};

}  // namespace detail

// The system's edits, chosen to maximally overlap `gold`.
inline std::vector<Edit> extract_system_edits(const Sentence& source, const Sentence& hypothesis,
                                              std::span<const Edit> gold,
                                              const M2Config& cfg = {}) {
  cfg.validate();
  const detail::EditLattice lat(source, hypothesis);
  const std::size_t rows = lat.rows(), cols = lat.cols();
  const std::size_t nodes = rows * cols;
  const int max_matches = cfg.max_unchanged_words;

  std::map<std::pair<std::size_t, std::size_t>, std::vector<const Edit*>> gold_by_span;
  for (const Edit& g : gold)
    if (!detail::is_identity_edit(source, g)) gold_by_span[{g.start, g.end}].push_back(&g);

  auto matches_gold = [&](std::size_t i0, std::size_t j0, std::size_t i1, std::size_t j1) {
    auto it = gold_by_span.find({i0, i1});
    if (it == gold_by_span.end()) return false;
    for (const Edit* g : it->second) {
      if (g->replacement.size() != j1 - j0) continue;
      bool same = true;
      for (std::size_t k = 0; k < j1 - j0 && same; ++k) same = g->replacement[k] == hypothesis[j0 + k];
      if (same) return true;
    }
    return false;
  };

  // Costs in units of 0.001 so that every path cost is an exact integer in
  // double precision and ties resolve identically for any reward.
  // State (node, f): f = 1 when the node was entered by an insertion edit;
  // a second insertion at the same source position is not allowed there.
  const double reward = cfg.gold_match_reward * 1000.0;
  constexpr double inf = std::numeric_limits<double>::infinity();
  constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
  std::vector<double> dist(2 * nodes, inf);
  std::vector<std::size_t> pred(2 * nodes, none);
  std::vector<bool> pred_is_edit(2 * nodes, false);
  std::vector<int> min_matches(nodes);

  auto relax = [&](std::size_t from, std::size_t to, double cost, bool edit) {
    if (dist[from] + cost < dist[to]) {
      dist[to] = dist[from] + cost;
      pred[to] = from;
      pred_is_edit[to] = edit;
    }
  };

  dist[0] = 0.0;
  for (std::size_t i0 = 0; i0 < rows; ++i0)
    for (std::size_t j0 = 0; j0 < cols; ++j0) {
      const std::size_t u = lat.id(i0, j0);
      if ((dist[u] == inf && dist[nodes + u] == inf) || !lat.on_lattice(i0, j0)) continue;

      if (lat.is_match(i0, j0) && lat.has_edge(i0, j0, 1, 1)) {
        const std::size_t v = lat.id(i0 + 1, j0 + 1);
        relax(u, v, 0.0, false);
        relax(nodes + u, v, 0.0, false);
      }

      // Fewest matched tokens on any lattice path from u to each node.
      for (std::size_t i = i0; i < rows; ++i)
        std::fill(min_matches.begin() + static_cast<std::ptrdiff_t>(lat.id(i, j0)),
                  min_matches.begin() + static_cast<std::ptrdiff_t>(lat.id(i, cols - 1) + 1),
                  max_matches + 1);
      min_matches[u] = 0;
      for (std::size_t i = i0; i < rows; ++i)
        for (std::size_t j = j0; j < cols; ++j) {
          const int here = min_matches[lat.id(i, j)];
          if (here > max_matches) continue;
          if (lat.has_edge(i, j, 1, 1)) {
            int& there = min_matches[lat.id(i + 1, j + 1)];
            there = std::min(there, here + (lat.is_match(i, j) ? 1 : 0));
          }
          if (lat.has_edge(i, j, 1, 0)) {
            int& there = min_matches[lat.id(i + 1, j)];
            there = std::min(there, here);
          }
          if (lat.has_edge(i, j, 0, 1)) {
            int& there = min_matches[lat.id(i, j + 1)];
            there = std::min(there, here);
          }
          if ((i == i0 && j == j0) || here > max_matches) continue;
          // Any path here carries at least one edit iff its cost is positive.
          if (lat.forward(i, j) == lat.forward(i0, j0)) continue;
          const double span = static_cast<double>((i - i0) + (j - j0));
          double cost = 1000.0 + span;
          if (matches_gold(i0, j0, i, j)) cost -= reward;
          const std::size_t v = lat.id(i, j);
          if (i == i0) {
            relax(u, nodes + v, cost, true);
          } else {
            relax(u, v, cost, true);
            relax(nodes + u, v, cost, true);
          }
        }
    }

  std::vector<Edit> edits;
  std::size_t state = dist[nodes - 1] <= dist[2 * nodes - 1] ? nodes - 1 : 2 * nodes - 1;
  while (state != 0) {
    const std::size_t from = pred[state];
    if (pred_is_edit[state]) {
      const std::size_t u = from % nodes, v = state % nodes;
      const std::size_t i0 = u / cols, j0 = u % cols, i1 = v / cols, j1 = v % cols;
      Edit e;
      e.start = i0;
      e.end = i1;
      e.replacement = hypothesis.slice(j0, j1);
      edits.push_back(std::move(e));
    }
    state = from;
  }
  std::reverse(edits.begin(), edits.end());
  return edits;
}

// Each gold edit can be matched by at most one system edit.
inline M2Counts count_matches(std::span<const Edit> system, std::span<const Edit> gold) {
  M2Counts c;
  std::vector<bool> used(gold.size(), false);
  for (const Edit& s : system) {
    bool hit = false;
    for (std::size_t k = 0; k < gold.size() && !hit; ++k)
      if (!used[k] && s.same_correction(gold[k])) used[k] = hit = true;
    if (hit)
      ++c.tp;
    else
      ++c.fp;
  }
  c.fn = static_cast<std::int64_t>(gold.size()) - c.tp;
  return c;
}

struct M2AnnotatorCounts {
  int annotator = 0;
  M2Counts counts;
};

struct M2SentenceResult {
  M2SentenceCounts best;
  double f = 0.0;
  std::vector<M2AnnotatorCounts> per_annotator;
  std::size_t ignored_identity_edits = 0;
};

// Scores the hypothesis against each annotator and keeps the annotator with
// the highest sentence F (lowest id on ties).
inline M2SentenceResult m2_sentence(const Sentence& source, const Sentence& hypothesis,
                                    std::span<const AnnotationSet> annotations,
                                    const M2Config& cfg = {}) {
  cfg.validate();
  if (annotations.empty()) throw ValidationError("M2 needs at least one annotation set");
  M2SentenceResult result;
  result.f = -1.0;
  for (const auto& set : annotations) {
    std::vector<Edit> gold;
    for (const Edit& e : set.edits()) {
      if (detail::is_identity_edit(source, e))
        ++result.ignored_identity_edits;
      else
        gold.push_back(e);
    }
    const auto system = extract_system_edits(source, hypothesis, gold, cfg);
    const M2Counts counts = count_matches(system, gold);
    result.per_annotator.push_back({set.annotator(), counts});
    const double f = m2_fbeta(counts, cfg.beta);
    if (f > result.f) {
      result.f = f;
      result.best = {counts, set.annotator()};
    }
  }
  return result;
}

// Pooled corpus F: sentences are visited in order and each picks the
// annotator that maximizes the running cumulative F.
inline M2Counts m2_pool_running(std::span<const M2SentenceResult> sentences, double beta) {
  M2Counts total;
  for (const auto& s : sentences) {
    double best_f = -1.0;
    M2Counts best;
    for (const auto& a : s.per_annotator) {
      const double f = m2_fbeta(total + a.counts, beta);
      if (f > best_f) {
        best_f = f;
        best = a.counts;
      }
    }
    total += best;
  }
  return total;
}

inline double m2_corpus(const Corpus& corpus, const SystemOutput& output, const M2Config& cfg,
                        AggregationMode mode) {
  if (output.hypotheses.size() != corpus.size())
    throw ValidationError("system '" + output.system_id + "' has " +
                          std::to_string(output.hypotheses.size()) + " hypotheses for " +
                          std::to_string(corpus.size()) + " sources");
  std::vector<M2SentenceResult> results;
  results.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i)
    results.push_back(
        m2_sentence(corpus[i].source(), output.hypotheses[i], corpus[i].annotations(), cfg));
  if (results.empty()) return 0.0;
  if (mode == AggregationMode::corpus) return m2_fbeta(m2_pool_running(results, cfg.beta), cfg.beta);
  double sum = 0.0;
  for (const auto& r : results) sum += r.f;
  return sum / static_cast<double>(results.size());
}

}  // namespace gecmetric
