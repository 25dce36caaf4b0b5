#pragma once

// Brute-force M2 counts. Enumerates every minimum-cost Levenshtein operation
// sequence from source to hypothesis, every way of grouping its operations
// into edits, scores each edit list against the gold edits, and keeps the
// list with the most true positives (then the fewest false positives).
//
// An edit is a maximal run of grouped operations with at least one
// non-match and at most `max_unchanged` matches. Two insertions at the same
// source position are not a valid edit list.

#include <algorithm>
#include <climits>
#include <string>
#include <tuple>
#include <vector>

namespace oracle {

using Tokens = std::vector<std::string>;

struct GoldEdit {
  std::size_t start, end;
  Tokens replacement;
};

struct M2Result {
  long long tp = 0, fp = 0, fn = 0;
};

namespace m2detail {

enum Op { kMatch, kSub, kDel, kIns };

inline void alignments(const Tokens& s, const Tokens& h, std::size_t i, std::size_t j, int cost,
                       std::vector<Op>& cur, std::vector<std::pair<int, std::vector<Op>>>& out,
                       int& best) {
  if (cost > best) return;
  if (i == s.size() && j == h.size()) {
    if (cost < best) {
      best = cost;
      out.clear();
    }
    out.emplace_back(cost, cur);
    return;
  }
  if (i < s.size() && j < h.size()) {
    const bool eq = s[i] == h[j];
    cur.push_back(eq ? kMatch : kSub);
    alignments(s, h, i + 1, j + 1, cost + (eq ? 0 : 1), cur, out, best);
    cur.pop_back();
  }
  if (i < s.size()) {
    cur.push_back(kDel);
    alignments(s, h, i + 1, j, cost + 1, cur, out, best);
    cur.pop_back();
  }
  if (j < h.size()) {
    cur.push_back(kIns);
    alignments(s, h, i, j + 1, cost + 1, cur, out, best);
    cur.pop_back();
  }
}

struct Chunk {
  std::size_t i0, i1, j0, j1;
};

inline void groupings(const std::vector<Op>& ops, const std::vector<std::size_t>& si,
                      const std::vector<std::size_t>& hj, std::size_t p, int max_unchanged,
                      std::vector<Chunk>& cur, std::vector<std::vector<Chunk>>& out) {
  if (p == ops.size()) {
    out.push_back(cur);
    return;
  }
  if (ops[p] == kMatch) groupings(ops, si, hj, p + 1, max_unchanged, cur, out);
  int matches = 0;
  bool edit = false;
  for (std::size_t q = p; q < ops.size(); ++q) {
    if (ops[q] == kMatch)
      ++matches;
    else
      edit = true;
    if (matches > max_unchanged) break;
    if (!edit) continue;
    const Chunk c{si[p], si[q + 1], hj[p], hj[q + 1]};
    if (!cur.empty() && cur.back().i1 == c.i0 && cur.back().i0 == cur.back().i1 && c.i0 == c.i1 &&
        cur.back().j1 == c.j0)
      continue;  // two insertions at one position
    cur.push_back(c);
    groupings(ops, si, hj, q + 1, max_unchanged, cur, out);
    cur.pop_back();
  }
}

}  // namespace m2detail

inline bool is_identity(const Tokens& src, const GoldEdit& g) {
  return g.end - g.start == g.replacement.size() &&
         std::equal(g.replacement.begin(), g.replacement.end(), src.begin() + static_cast<long>(g.start));
}

inline M2Result m2_counts(const Tokens& src, const Tokens& hyp, std::vector<GoldEdit> gold,
                          int max_unchanged = 2) {
  using namespace m2detail;
  gold.erase(std::remove_if(gold.begin(), gold.end(), [&](const GoldEdit& g) { return is_identity(src, g); }),
             gold.end());
  std::vector<std::pair<int, std::vector<Op>>> seqs;
  std::vector<Op> cur;
  int best_cost = INT_MAX;
  alignments(src, hyp, 0, 0, 0, cur, seqs, best_cost);

  M2Result best;
  bool have = false;
  for (const auto& [cost, ops] : seqs) {
    std::vector<std::size_t> si{0}, hj{0};
    for (Op o : ops) {
      si.push_back(si.back() + (o == kIns ? 0 : 1));
      hj.push_back(hj.back() + (o == kDel ? 0 : 1));
    }
    std::vector<std::vector<Chunk>> lists;
    std::vector<Chunk> chunk_cur;
    groupings(ops, si, hj, 0, max_unchanged, chunk_cur, lists);
    for (const auto& list : lists) {
      M2Result r;
      std::vector<bool> used(gold.size(), false);
      for (const auto& c : list) {
        const Tokens rep(hyp.begin() + static_cast<long>(c.j0), hyp.begin() + static_cast<long>(c.j1));
        bool hit = false;
        for (std::size_t g = 0; g < gold.size() && !hit; ++g)
          if (!used[g] && gold[g].start == c.i0 && gold[g].end == c.i1 && gold[g].replacement == rep)
            used[g] = hit = true;
        (hit ? r.tp : r.fp)++;
      }
      r.fn = static_cast<long long>(gold.size()) - r.tp;
      if (!have || r.tp > best.tp || (r.tp == best.tp && r.fp < best.fp)) {
        best = r;
        have = true;
      }
    }
  }
  return best;
}

}  // namespace oracle
