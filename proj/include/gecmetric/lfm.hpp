#pragma once

// Linguistic feature-based grammaticality model: eight sentence features
// (spelling, language model, lexical statistics) fed to ridge regression.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gecmetric/corpus.hpp"
#include "gecmetric/detectors.hpp"
#include "gecmetric/error.hpp"
#include "gecmetric/m2_format.hpp"
#include "gecmetric/ngram_lm.hpp"
#include "gecmetric/ridge.hpp"

namespace gecmetric {

inline constexpr std::size_t kFeatureCount = 8;

inline const std::array<std::string, kFeatureCount>& feature_names() {
  static const std::array<std::string, kFeatureCount> names = {
      "token_count",        "misspelling_rate",   "oov_rate",           "lm_mean_logprob",
      "lm_min_logprob",     "mean_token_logfreq", "max_char_repeat_len", "punct_ratio"};
  return names;
}

struct FeatureVector {
  std::array<double, kFeatureCount> values{};

  double token_count() const { return values[0]; }
  double misspelling_rate() const { return values[1]; }
  double oov_rate() const { return values[2]; }
  double lm_mean_logprob() const { return values[3]; }
  double lm_min_logprob() const { return values[4]; }
  double mean_token_logfreq() const { return values[5]; }
  double max_char_repeat_len() const { return values[6]; }
  double punct_ratio() const { return values[7]; }
};

namespace detail {

// Longest run of one repeated byte within any token.
inline std::size_t max_char_run(const Sentence& s) {
  std::size_t best = 0;
  for (const auto& t : s) {
    std::size_t run = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      run = (i > 0 && t[i] == t[i - 1]) ? run + 1 : 1;
      best = std::max(best, run);
    }
  }
  return best;
}

}  // namespace detail

inline FeatureVector featurize(const Sentence& s, const NgramLm& lm, const Wordlist& words) {
  FeatureVector f;
  if (s.empty()) return f;
  const double n = static_cast<double>(s.size());
  std::size_t misspelled = 0, oov = 0, punct = 0;
  double logfreq = 0.0;
  for (const auto& t : s) {
    if (words.is_misspelled(t)) ++misspelled;
    if (!lm.in_vocabulary(t)) ++oov;
    if (is_punctuation_token(t)) ++punct;
    logfreq += std::log(lm.unigram_prob(t));
  }
  const auto lp = lm.token_logprobs(s);
  double sum = 0.0;
  for (double v : lp) sum += v;
  f.values = {n,
              static_cast<double>(misspelled) / n,
              static_cast<double>(oov) / n,
              sum / n,
              *std::min_element(lp.begin(), lp.end()),
              logfreq / n,
              static_cast<double>(detail::max_char_run(s)),
              static_cast<double>(punct) / n};
  return f;
}

struct LfmModel {
  static constexpr int kFormatVersion = 1;
  RidgeModel ridge;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["format_version"] = kFormatVersion;
    j["feature_names"] = ridge.feature_names;
    j["means"] = ridge.means;
    j["stdevs"] = ridge.stdevs;
    j["weights"] = ridge.weights;
    j["bias"] = ridge.bias;
    j["alpha"] = ridge.alpha;
    j["dropped_features"] = ridge.dropped_features;
    return j;
  }

  static LfmModel from_json(const nlohmann::json& j) {
    try {
      if (j.at("format_version").get<int>() != kFormatVersion)
        throw ValidationError("unsupported LFM model format_version " +
                              j.at("format_version").dump());
      LfmModel m;
      m.ridge.feature_names = j.at("feature_names").get<std::vector<std::string>>();
      m.ridge.means = j.at("means").get<std::vector<double>>();
      m.ridge.stdevs = j.at("stdevs").get<std::vector<double>>();
      m.ridge.weights = j.at("weights").get<std::vector<double>>();
      m.ridge.bias = j.at("bias").get<double>();
      m.ridge.alpha = j.at("alpha").get<double>();
      if (j.contains("dropped_features"))
        m.ridge.dropped_features = j.at("dropped_features").get<std::vector<std::string>>();
      const std::size_t k = m.ridge.feature_names.size();
      if (m.ridge.means.size() != k || m.ridge.stdevs.size() != k || m.ridge.weights.size() != k)
        throw ValidationError("LFM model arrays have inconsistent lengths");
      for (double sd : m.ridge.stdevs)
        if (!(sd > 0.0)) throw ValidationError("LFM model has a non-positive stdev");
      return m;
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(std::string("malformed LFM model: ") + e.what());
    }
  }

  void save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write '" + path.string() + "'");
    out << to_json().dump(2) << '\n';
  }

  static LfmModel load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open '" + path.string() + "'");
    try {
      return from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
      throw ValidationError(std::string("malformed LFM model: ") + e.what());
    }
  }
};

// Raw prediction (standardized dot product plus bias), before clipping.
inline double lfm_predict(const FeatureVector& f, const LfmModel& model) {
  if (model.ridge.features() != kFeatureCount)
    throw ValidationError("LFM model has " + std::to_string(model.ridge.features()) +
                          " features; this build computes " + std::to_string(kFeatureCount));
  return model.ridge.predict(f.values);
}

inline double lfm_score(const FeatureVector& f, const LfmModel& model) {
  return std::clamp(lfm_predict(f, model), 0.0, 1.0);
}

inline double lfm_score(const Sentence& s, const LfmModel& model, const NgramLm& lm,
                        const Wordlist& words) {
  return lfm_score(featurize(s, lm, words), model);
}

struct LabeledSentence {
  Sentence sentence;
  double score = 0.0;
};

// TSV rows "sentence<TAB>score". With rescale_1_4 the score column is on
// a 1-4 scale and is mapped linearly onto [0, 1].
inline std::vector<LabeledSentence> read_training_data(std::istream& in, bool rescale_1_4 = false) {
  std::vector<LabeledSentence> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1) detail::strip_bom(line);
    detail::strip_cr(line);
    if (tokenize(line).empty()) continue;
    const auto tab = line.rfind('\t');
    if (tab == std::string::npos) throw ParseError("expected 'sentence<TAB>score'", lineno);
    const Sentence field = tokenize(std::string_view(line).substr(tab + 1));
    double score = 0.0;
    bool ok = field.size() == 1;
    if (ok) {
      const auto& t = field[0];
      auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), score);
      ok = ec == std::errc{} && ptr == t.data() + t.size() && std::isfinite(score);
    }
    if (!ok) throw ParseError("non-numeric score", lineno);
    if (rescale_1_4) score = (score - 1.0) / 3.0;
    if (score < 0.0 || score > 1.0)
      throw ParseError("score " + std::to_string(score) + " outside [0, 1]", lineno);
    rows.push_back({tokenize(std::string_view(line).substr(0, tab)), score});
  }
  return rows;
}

inline LfmModel train_lfm(std::span<const FeatureVector> features, std::span<const double> targets,
                          double alpha) {
  if (features.size() != targets.size())
    throw ValidationError("feature and target counts differ");
  Eigen::MatrixXd x(static_cast<Eigen::Index>(features.size()),
                    static_cast<Eigen::Index>(kFeatureCount));
  Eigen::VectorXd y(static_cast<Eigen::Index>(targets.size()));
  for (std::size_t i = 0; i < features.size(); ++i) {
    for (std::size_t j = 0; j < kFeatureCount; ++j)
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = features[i].values[j];
    y(static_cast<Eigen::Index>(i)) = targets[i];
  }
  const auto& names = feature_names();
  LfmModel m;
  m.ridge = train_ridge(x, y, {alpha, true}, {names.begin(), names.end()});
  return m;
}

}  // namespace gecmetric
