#pragma once

// Interpolated n-gram language model. Order-k estimates are maximum
// likelihood and fall back to the order-(k-1) estimate for unseen
// histories; unigrams are add-one smoothed over the vocabulary plus UNK.
// Sentence starts are padded with <s>; sentence ends are not predicted.

#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "gecmetric/corpus.hpp"
#include "gecmetric/error.hpp"

namespace gecmetric {

class NgramLm {
 public:
  static constexpr const char* kBos = "<s>";
  static constexpr const char* kUnk = "<unk>";

  static NgramLm train(std::span<const Sentence> corpus, int order = 3,
                       std::vector<double> weights = {}) {
    if (corpus.empty()) throw ValidationError("language model training corpus is empty");
    if (order < 1) throw ValidationError("language model order must be >= 1");
    if (weights.empty()) weights.assign(static_cast<std::size_t>(order), 1.0 / order);
    if (weights.size() != static_cast<std::size_t>(order))
      throw ValidationError("need one interpolation weight per order");
    double total = 0.0;
    for (double w : weights) {
      if (!(w > 0.0)) throw ValidationError("interpolation weights must be positive");
      total += w;
    }
    for (double& w : weights) w /= total;

    NgramLm lm;
    lm.order_ = order;
    lm.weights_ = std::move(weights);
    lm.ngrams_.resize(static_cast<std::size_t>(order) + 1);
    lm.histories_.resize(static_cast<std::size_t>(order) + 1);
    for (const auto& s : corpus) {
      for (const auto& t : s) {
        ++lm.unigrams_[t];
        ++lm.tokens_;
      }
      const auto padded = lm.pad(s);
      for (std::size_t i = static_cast<std::size_t>(order - 1); i < padded.size(); ++i)
        for (int k = 2; k <= order; ++k) {
          const std::string h = history(padded, i, k - 1);
          ++lm.histories_[static_cast<std::size_t>(k)][h];
          ++lm.ngrams_[static_cast<std::size_t>(k)][h + ' ' + padded[i]];
        }
    }
    return lm;
  }

  int order() const { return order_; }
  std::size_t vocabulary_size() const { return unigrams_.size(); }
  bool in_vocabulary(const std::string& t) const { return unigrams_.count(t) != 0; }

  std::vector<std::string> vocabulary() const {
    std::vector<std::string> v;
    for (const auto& [t, c] : unigrams_) v.push_back(t);
    return v;
  }

  // Add-one unigram probability; out-of-vocabulary tokens get P(UNK).
  double unigram_prob(const std::string& token) const {
    auto it = unigrams_.find(token);
    const double c = it == unigrams_.end() ? 0.0 : static_cast<double>(it->second);
    return (c + 1.0) / (static_cast<double>(tokens_) + static_cast<double>(unigrams_.size()) + 1.0);
  }

  // P(token | context), context being the preceding tokens (most recent
  // last). Missing context is padded with <s>.
  double prob(std::span<const std::string> context, const std::string& token) const {
    const std::string t = in_vocabulary(token) ? token : kUnk;
    std::vector<std::string> ctx;
    const auto need = static_cast<std::size_t>(order_ - 1);
    for (std::size_t k = context.size(); k < need; ++k) ctx.emplace_back(kBos);
    const std::size_t from = context.size() > need ? context.size() - need : 0;
    for (std::size_t k = from; k < context.size(); ++k)
      ctx.push_back(in_vocabulary(context[k]) || context[k] == kBos ? context[k] : kUnk);

    double p_lower = unigram_prob(t);
    double p = weights_[0] * p_lower;
    for (int k = 2; k <= order_; ++k) {
      std::string h;
      for (std::size_t q = ctx.size() - static_cast<std::size_t>(k - 1); q < ctx.size(); ++q) {
        if (!h.empty()) h += ' ';
        h += ctx[q];
      }
      const auto& hist = histories_[static_cast<std::size_t>(k)];
      auto hit = hist.find(h);
      if (hit != hist.end()) {
        const auto& grams = ngrams_[static_cast<std::size_t>(k)];
        auto git = grams.find(h + ' ' + t);
        const double c = git == grams.end() ? 0.0 : static_cast<double>(git->second);
        p_lower = c / static_cast<double>(hit->second);
      }
      p += weights_[static_cast<std::size_t>(k - 1)] * p_lower;
    }
    return p;
  }

  // Natural-log probability of each token given its predecessors.
  std::vector<double> token_logprobs(const Sentence& s) const {
    std::vector<double> out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i)
      out.push_back(std::log(prob(s.tokens().subspan(0, i), s[i])));
    return out;
  }

 private:
  std::vector<std::string> pad(const Sentence& s) const {
    std::vector<std::string> out(static_cast<std::size_t>(order_ - 1), kBos);
    out.insert(out.end(), s.begin(), s.end());
    return out;
  }

  static std::string history(const std::vector<std::string>& padded, std::size_t i, int len) {
    std::string h;
    for (std::size_t q = i - static_cast<std::size_t>(len); q < i; ++q) {
      if (!h.empty()) h += ' ';
      h += padded[q];
    }
    return h;
  }

  int order_ = 3;
  std::vector<double> weights_;
  std::unordered_map<std::string, std::int64_t> unigrams_;
  std::int64_t tokens_ = 0;
  std::vector<std::unordered_map<std::string, std::int64_t>> ngrams_;     // by order
  std::vector<std::unordered_map<std::string, std::int64_t>> histories_;  // by order
};

}  // namespace gecmetric
