#include "cli.hpp"

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gecmetric/gecmetric.hpp"

namespace gecmetric::cli {
namespace {

inline constexpr std::uint64_t kDefaultSeed = 20160101;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  // inputs
  std::string m2;
  std::string source;
  std::vector<std::string> hyps;
  std::vector<std::string> refs;
  std::string human;
  std::string wordlist;
  std::vector<std::string> detectors;
  std::string checker_cmd;
  std::size_t checker_pool = 1;
  double checker_timeout = 10.0;
  std::string lfm_model;
  std::string lm_corpus;
  int lm_order = 3;

  // metrics and analysis
  std::vector<std::string> metrics;
  std::string mode = "sentence";
  std::string gbm;
  std::string rbm;
  int gleu_iterations = 500;
  std::string gleu_mode = "sampled";
  std::optional<std::uint64_t> seed;
  double m2_beta = 0.5;
  int m2_max_unchanged = 2;
  double im_weight = 2.0;
  bool significance = false;
  bool gaming = false;
  double lambda = 0.5;
  std::size_t trials = 10;
  std::vector<std::size_t> sizes;

  // train-lfm
  std::string train;
  double alpha = 1.0;
  bool scale_1_4 = false;

  // check
  std::vector<std::string> texts;
  std::string input;

  // output
  std::string output;
  int digits = 6;
  std::size_t jobs = 0;
};

// Everything loaded for one run. EvaluationData holds raw pointers into
// the owned resources below.
struct Session {
  EvaluationData data;
  MetricSettings settings;
  std::shared_ptr<Wordlist> wordlist;
  std::unique_ptr<DetectorSuite> detectors;
  std::optional<NgramLm> lm;
  std::optional<LfmModel> lfm;
  std::size_t jobs = 1;
};

std::uint64_t resolve_seed(const Options& o, std::ostream& err) {
  if (o.seed) return *o.seed;
  if (const char* env = std::getenv("GECMETRIC_SEED"); env && *env) {
    try {
      std::size_t pos = 0;
      const auto v = std::stoull(env, &pos);
      if (pos != std::string(env).size()) throw std::invalid_argument(env);
      return v;
    } catch (const std::exception&) {
      throw UsageError(std::string("GECMETRIC_SEED is not an unsigned integer: '") + env + "'");
    }
  }
  err << "gecmetric: no --seed given; using default seed " << kDefaultSeed << "\n";
  return kDefaultSeed;
}

AggregationMode parse_mode(const std::string& m) {
  return m == "corpus" ? AggregationMode::corpus : AggregationMode::sentence;
}

std::vector<std::string> split_command(const std::string& cmd) {
  std::vector<std::string> argv;
  std::istringstream in(cmd);
  for (std::string a; in >> a;) argv.push_back(a);
  if (argv.empty()) throw UsageError("--checker-cmd is empty");
  return argv;
}

// "[ID=]PATH"; the id defaults to the file name without extension.
SystemOutput load_hypothesis(const std::string& arg) {
  std::string id, path = arg;
  if (const auto eq = arg.find('='); eq != std::string::npos && eq > 0) {
    id = arg.substr(0, eq);
    path = arg.substr(eq + 1);
  }
  if (id.empty()) id = std::filesystem::path(path).stem().string();
  if (id.empty()) throw UsageError("cannot derive a system id from '" + arg + "'");
  return read_system_output(id, path);
}

bool needs_seed(const Options& o, const std::vector<MetricKind>& metrics) {
  for (auto m : metrics)
    if (m == MetricKind::gleu && o.gleu_mode == "sampled") return true;
  return false;
}

void check_inputs(const Options& o, const std::vector<MetricKind>& metrics) {
  const bool have_refs = !o.refs.empty() || !o.m2.empty();
  for (auto m : metrics) {
    const auto name = metric_name(m);
    switch (m) {
      case MetricKind::gleu:
      case MetricKind::imeasure:
        if (!have_refs) throw UsageError(name + " needs --ref files or an --m2 gold file");
        break;
      case MetricKind::m2:
        if (o.m2.empty()) throw UsageError("m2 needs an --m2 gold file");
        break;
      case MetricKind::error_count:
        break;
      case MetricKind::lfm:
        if (o.lfm_model.empty() || o.lm_corpus.empty() || o.wordlist.empty())
          throw UsageError("lfm needs --lfm-model, --lm-corpus and --wordlist");
        break;
    }
  }
  if (o.m2.empty() && o.source.empty()) throw UsageError("give either --m2 or --source");
  if (!o.m2.empty() && !o.source.empty()) throw UsageError("--m2 and --source are mutually exclusive");
  if (o.hyps.empty()) throw UsageError("at least one --hyp is required");
}

std::vector<MetricKind> parse_metrics(const std::vector<std::string>& names) {
  std::vector<MetricKind> out;
  for (const auto& n : names) {
    try {
      const auto m = parse_metric(n);
      if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
    } catch (const ValidationError& e) {
      throw UsageError(e.what());
    }
  }
  return out;
}

std::unique_ptr<DetectorSuite> build_detectors(const Options& o, std::shared_ptr<const Wordlist> words) {
  auto suite = std::make_unique<DetectorSuite>();
  std::vector<std::string> names = o.detectors;
  if (names.empty()) {
    for (const auto& n : builtin_detector_names())
      if (n != "spell" || words) names.push_back(n);
  }
  for (const auto& n : names) {
    if (n == "external") continue;
    if (n == "spell" && !words) throw UsageError("the spell detector needs --wordlist");
    try {
      suite->add(make_builtin_detector(n, words));
    } catch (const ValidationError& e) {
      throw UsageError(e.what());
    }
  }
  if (!o.checker_cmd.empty()) {
    const auto timeout = std::chrono::milliseconds(static_cast<long long>(o.checker_timeout * 1000.0));
    suite->add(std::make_shared<ExternalCheckerDetector>(split_command(o.checker_cmd), o.checker_pool,
                                                         "external", timeout));
  }
  return suite;
}

Session load_session(const Options& o, const std::vector<MetricKind>& metrics, std::ostream& err) {
  check_inputs(o, metrics);
  Session s;
  s.jobs = o.jobs == 0 ? default_jobs() : o.jobs;

  s.settings.gleu.iterations = o.gleu_iterations;
  s.settings.gleu.multi_ref_mode = o.gleu_mode == "mean" ? GleuMode::mean_over_all : GleuMode::sampled;
  s.settings.gleu.rng_seed = needs_seed(o, metrics) ? resolve_seed(o, err) : o.seed.value_or(0);
  s.settings.m2.beta = o.m2_beta;
  s.settings.m2.max_unchanged_words = o.m2_max_unchanged;
  s.settings.imeasure.weight = o.im_weight;
  s.settings.gleu.validate();
  s.settings.m2.validate();
  s.settings.imeasure.validate();

  auto& d = s.data;
  if (!o.m2.empty()) {
    auto in = open_input(o.m2);
    d.corpus = parse_m2(in);
    d.has_gold = true;
  } else {
    for (auto& sent : read_parallel_text(std::filesystem::path(o.source)))
      d.corpus.emplace_back(std::move(sent));
  }
  for (const auto& h : o.hyps) {
    auto sys = load_hypothesis(h);
    for (const auto& other : d.systems)
      if (other.system_id == sys.system_id)
        throw UsageError("duplicate system id '" + sys.system_id + "'; use ID=PATH");
    d.systems.push_back(std::move(sys));
  }

  bool want_refs = false;
  for (auto m : metrics) want_refs |= m == MetricKind::gleu || m == MetricKind::imeasure;
  if (!o.refs.empty()) {
    std::vector<std::vector<Sentence>> columns;
    for (const auto& r : o.refs) columns.push_back(read_parallel_text(std::filesystem::path(r)));
    for (std::size_t k = 0; k < columns.size(); ++k)
      if (columns[k].size() != d.corpus.size())
        throw ValidationError("reference file '" + o.refs[k] + "' has " +
                              std::to_string(columns[k].size()) + " lines; the corpus has " +
                              std::to_string(d.corpus.size()) + " sentences");
    d.references = ReferenceSet::from_columns(columns);
  } else if (want_refs && d.has_gold) {
    d.references = references_from_gold(d.corpus);
  }

  bool want_words = !o.wordlist.empty();
  if (want_words) s.wordlist = std::make_shared<Wordlist>(Wordlist::load(o.wordlist));
  for (auto m : metrics) {
    if (m == MetricKind::error_count && !s.detectors) {
      s.detectors = build_detectors(o, s.wordlist);
      if (s.detectors->size() == 0) throw UsageError("no detectors selected");
      d.detectors = s.detectors.get();
    }
    if (m == MetricKind::lfm && !s.lfm) {
      const auto lm_corpus = read_parallel_text(std::filesystem::path(o.lm_corpus));
      s.lm = NgramLm::train(lm_corpus, o.lm_order);
      s.lfm = LfmModel::load(o.lfm_model);
      d.lm = &*s.lm;
      d.lfm_model = &*s.lfm;
      d.wordlist = s.wordlist.get();
    }
  }
  return s;
}

void write_output(const Options& o, const Report& report, std::ostream& err) {
  if (o.output.empty()) return;
  const auto text = write_report(report, {o.digits});
  std::ofstream f(o.output, std::ios::binary);
  if (!f) throw ValidationError("cannot write '" + o.output + "'");
  f << text;
  if (!f) throw ValidationError("error writing '" + o.output + "'");
  err << "gecmetric: wrote " << o.output << "\n";
}

std::string fmt(double v) {
  if (!std::isfinite(v)) return "n/a";
  std::ostringstream s;
  s << std::fixed << std::setprecision(6) << v;
  return s.str();
}

std::size_t id_width(const std::vector<std::string>& ids) {
  std::size_t w = 6;
  for (const auto& id : ids) w = std::max(w, id.size());
  return w + 2;
}

// Scores every metric, fills the report's systems section and returns the
// per-metric runs for further analysis.
std::vector<MetricRun> score_into(const Session& s, const std::vector<MetricKind>& metrics,
                                  AggregationMode mode, Report& report) {
  std::vector<MetricRun> runs;
  for (auto m : metrics) {
    if (mode == AggregationMode::corpus && !supports_corpus_mode(m))
      throw UsageError(metric_name(m) + " has no corpus mode");
    auto run = score_metric(m, s.data, s.settings, s.jobs);
    for (std::size_t k = 0; k < run.systems.size(); ++k) {
      SystemReportEntry e;
      e.id = run.systems[k];
      e.metric = metric_name(m);
      e.mode = mode;
      e.mean_sentence_score = aggregate(run, k, AggregationMode::sentence, s.settings);
      if (supports_corpus_mode(m)) e.corpus_score = aggregate(run, k, AggregationMode::corpus, s.settings);
      e.per_sentence = run.values[k];
      report.systems.push_back(std::move(e));
    }
    runs.push_back(std::move(run));
  }
  return runs;
}

void print_scores(const Report& report, std::ostream& out) {
  std::vector<std::string> ids;
  for (const auto& e : report.systems) ids.push_back(e.id);
  const auto w = id_width(ids);
  out << std::left << std::setw(static_cast<int>(w)) << "system" << std::setw(14) << "metric"
      << std::setw(14) << "sentence" << "corpus\n";
  for (const auto& e : report.systems)
    out << std::setw(static_cast<int>(w)) << e.id << std::setw(14) << e.metric << std::setw(14)
        << fmt(e.mean_sentence_score) << (e.corpus_score ? fmt(*e.corpus_score) : "n/a") << "\n";
}

void print_correlations(const std::vector<CorrelationReport>& cs, std::ostream& out) {
  out << std::left << std::setw(14) << "metric" << std::setw(10) << "mode" << std::setw(5) << "n"
      << std::setw(14) << "spearman" << "pearson\n";
  for (const auto& c : cs)
    out << std::setw(14) << c.metric << std::setw(10) << mode_name(c.mode) << std::setw(5) << c.n
        << std::setw(14) << fmt(c.spearman) << fmt(c.pearson) << "\n";
}

HumanRanking load_human(const Options& o) {
  if (o.human.empty()) throw UsageError("--human is required");
  auto in = open_input(o.human);
  return read_human_ranking(in);
}

// ---------------------------------------------------------------------------

int cmd_score(const Options& o, std::ostream& out, std::ostream& err) {
  const auto metrics = parse_metrics(o.metrics);
  if (metrics.empty()) throw UsageError("at least one --metric is required");
  const auto session = load_session(o, metrics, err);
  Report report;
  score_into(session, metrics, parse_mode(o.mode), report);
  print_scores(report, out);
  write_output(o, report, err);
  return kOk;
}

int cmd_rank(const Options& o, std::ostream& out, std::ostream& err) {
  const auto metrics = parse_metrics(o.metrics);
  if (metrics.size() != 1) throw UsageError("rank needs exactly one --metric");
  const auto mode = parse_mode(o.mode);
  const auto session = load_session(o, metrics, err);
  Report report;
  const auto runs = score_into(session, metrics, mode, report);
  const auto scores = system_scores(runs[0], mode, session.settings);
  const auto ranking = rank_systems(scores);
  std::vector<std::string> ids;
  for (const auto& r : ranking) ids.push_back(r.system);
  const auto w = id_width(ids);
  out << std::left << std::setw(8) << "rank" << std::setw(static_cast<int>(w)) << "system"
      << metric_name(metrics[0]) << " (" << mode_name(mode) << ")\n";
  for (const auto& r : ranking) {
    std::ostringstream rank;
    rank << r.rank;
    out << std::setw(8) << rank.str() << std::setw(static_cast<int>(w)) << r.system << fmt(r.value)
        << "\n";
  }
  write_output(o, report, err);
  return kOk;
}

int cmd_correlate(const Options& o, std::ostream& out, std::ostream& err) {
  const auto metrics = parse_metrics(o.metrics);
  if (metrics.empty()) throw UsageError("at least one --metric is required");
  const auto human = load_human(o);
  std::vector<AggregationMode> modes;
  if (o.mode == "both") {
    modes = {AggregationMode::sentence, AggregationMode::corpus};
  } else {
    modes = {parse_mode(o.mode)};
  }
  const auto session = load_session(o, metrics, err);
  Report report;
  const auto runs = score_into(session, metrics, modes[0], report);
  for (const auto& run : runs)
    for (auto mode : modes) {
      if (!supports_corpus_mode(run.metric) && mode == AggregationMode::corpus) {
        err << "gecmetric: " << metric_name(run.metric) << " has no corpus mode; skipped\n";
        continue;
      }
      report.correlations.push_back(correlate(system_scores(run, mode, session.settings), human));
    }
  if (o.significance) {
    const auto& cs = report.correlations;
    for (std::size_t a = 0; a < cs.size(); ++a)
      for (std::size_t b = a + 1; b < cs.size(); ++b) {
        SignificanceEntry e;
        e.first = cs[a].metric + "/" + mode_name(cs[a].mode);
        e.second = cs[b].metric + "/" + mode_name(cs[b].mode);
        e.r1 = cs[a].spearman;
        e.n1 = cs[a].n;
        e.r2 = cs[b].spearman;
        e.n2 = cs[b].n;
        try {
          e.test = compare_correlations(e.r1, e.n1, e.r2, e.n2);
        } catch (const StatisticsError& ex) {
          err << "gecmetric: " << e.first << " vs " << e.second << ": " << ex.what() << "\n";
          continue;
        }
        report.significance.push_back(e);
      }
  }
  print_correlations(report.correlations, out);
  for (const auto& s : report.significance)
    out << s.first << " vs " << s.second << ": z = " << fmt(s.test.z) << ", p = " << fmt(s.test.p)
        << "\n";
  write_output(o, report, err);
  return kOk;
}

std::pair<MetricKind, MetricKind> gbm_rbm(const Options& o) {
  if (o.gbm.empty() || o.rbm.empty()) throw UsageError("--gbm and --rbm are required");
  const auto gbm = parse_metrics({o.gbm})[0];
  const auto rbm = parse_metrics({o.rbm})[0];
  if (is_reference_based(gbm)) throw UsageError("--gbm must be error-count or lfm");
  if (!is_reference_based(rbm)) throw UsageError("--rbm must be gleu, m2 or imeasure");
  return {gbm, rbm};
}

int cmd_sweep(const Options& o, std::ostream& out, std::ostream& err) {
  const auto [gbm, rbm] = gbm_rbm(o);
  if (o.gaming && rbm == MetricKind::m2)
    throw UsageError("the gaming check needs --rbm gleu or imeasure");
  const auto human = load_human(o);
  const auto session = load_session(o, {gbm, rbm}, err);
  Report report;
  const auto runs = score_into(session, {gbm, rbm}, AggregationMode::sentence, report);
  // a constant component leaves its correlation undefined; the sweep
  // records that as null instead of failing
  for (const auto& run : runs) {
    const auto scores = system_scores(run, AggregationMode::sentence);
    try {
      report.correlations.push_back(correlate(scores, human));
    } catch (const StatisticsError&) {
      CorrelationReport undefined;
      undefined.metric = metric_name(run.metric);
      undefined.n = scores.size();
      undefined.spearman = undefined.pearson = std::numeric_limits<double>::quiet_NaN();
      report.correlations.push_back(undefined);
    }
  }
  report.sweep = sweep_lambda(runs[0].table(), runs[1].table(), human);
  if (o.gaming) {
    const auto seed = resolve_seed(o, err);
    report.gaming = gaming_check(runs[0].table(), make_assignment_scorer(rbm, session.data, session.settings),
                                 seed, o.lambda, session.jobs);
  }

  print_correlations(report.correlations, out);
  const auto& sw = *report.sweep;
  out << "oracle spearman " << fmt(sw.oracle_spearman.value) << " at lambda "
      << fmt(sw.oracle_spearman.lambda) << "\n";
  out << "oracle pearson  " << fmt(sw.oracle_pearson.value) << " at lambda "
      << fmt(sw.oracle_pearson.lambda) << "\n";
  if (report.gaming) {
    const auto& g = *report.gaming;
    out << "gaming: interpolated mean " << fmt(g.mean_interpolated_true) << " -> "
        << fmt(g.mean_interpolated_shuffled) << " (drop " << fmt(g.interpolated_relative_drop)
        << "), " << metric_name(rbm) << " mean " << fmt(g.mean_rbm_true) << " -> "
        << fmt(g.mean_rbm_shuffled) << " (drop " << fmt(g.rbm_relative_drop) << ")\n";
  }
  write_output(o, report, err);
  return kOk;
}

int cmd_ablate(const Options& o, std::ostream& out, std::ostream& err) {
  const auto [gbm, rbm] = gbm_rbm(o);
  const auto human = load_human(o);
  const auto session = load_session(o, {gbm, rbm}, err);
  const auto seed = resolve_seed(o, err);
  Report report;
  const auto runs = score_into(session, {gbm}, AggregationMode::sentence, report);
  AblationConfig cfg;
  cfg.sizes = o.sizes;
  cfg.trials = o.trials;
  cfg.seed = seed;
  cfg.jobs = session.jobs;
  report.ablation = ablate_references(runs[0].table(), make_subset_scorer(rbm, session.data, session.settings),
                                      available_references(rbm, session.data), human, cfg);
  out << std::left << std::setw(12) << "references" << std::setw(14) << "mean rho" << "95% CI\n";
  for (const auto& p : report.ablation->points) {
    out << std::setw(12) << p.references << std::setw(14) << fmt(p.mean_spearman);
    if (p.ci_low)
      out << "[" << fmt(*p.ci_low) << ", " << fmt(*p.ci_high) << "]";
    else
      out << "n/a";
    out << "\n";
  }
  write_output(o, report, err);
  return kOk;
}

int cmd_train_lfm(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.train.empty() || o.lm_corpus.empty() || o.wordlist.empty() || o.output.empty())
    throw UsageError("train-lfm needs --train, --lm-corpus, --wordlist and --output");
  const auto words = Wordlist::load(o.wordlist);
  const auto lm = NgramLm::train(read_parallel_text(std::filesystem::path(o.lm_corpus)), o.lm_order);
  auto in = open_input(o.train);
  const auto rows = read_training_data(in, o.scale_1_4);
  std::vector<FeatureVector> features;
  std::vector<double> targets;
  for (const auto& r : rows) {
    features.push_back(featurize(r.sentence, lm, words));
    targets.push_back(r.score);
  }
  const auto model = train_lfm(features, targets, o.alpha);
  model.save(o.output);
  err << "gecmetric: wrote " << o.output << "\n";
  out << "trained on " << rows.size() << " sentences, alpha " << fmt(o.alpha) << "\n";
  out << std::left << std::setw(22) << "feature" << "weight\n";
  for (std::size_t j = 0; j < model.ridge.features(); ++j)
    out << std::setw(22) << model.ridge.feature_names[j] << fmt(model.ridge.weights[j]) << "\n";
  out << std::setw(22) << "bias" << fmt(model.ridge.bias) << "\n";
  for (const auto& d : model.ridge.dropped_features)
    err << "gecmetric: feature '" << d << "' is constant in the training data; weight fixed at 0\n";
  return kOk;
}

int cmd_check(const Options& o, std::ostream& out, std::ostream& err) {
  std::vector<Sentence> sentences;
  for (const auto& t : o.texts) sentences.push_back(tokenize(t));
  if (!o.input.empty()) {
    auto more = read_parallel_text(std::filesystem::path(o.input));
    sentences.insert(sentences.end(), more.begin(), more.end());
  }
  if (sentences.empty()) throw UsageError("check needs sentences or --input");
  std::shared_ptr<Wordlist> words;
  if (!o.wordlist.empty()) words = std::make_shared<Wordlist>(Wordlist::load(o.wordlist));
  const auto suite = build_detectors(o, words);
  if (suite->size() == 0) throw UsageError("no detectors selected");
  const auto spans = suite->detect_all(sentences);

  nlohmann::ordered_json j;
  j["format_version"] = kReportFormatVersion;
  j["detectors"] = nlohmann::ordered_json::array();
  for (const auto& d : suite->detectors()) j["detectors"].push_back(d->id());
  j["sentences"] = nlohmann::ordered_json::array();
  std::size_t total = 0;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    nlohmann::ordered_json e;
    e["index"] = i;
    e["tokens"] = sentences[i].size();
    e["score"] = detail::real(error_count_score(spans[i].size(), sentences[i].size()), o.digits);
    e["errors"] = nlohmann::ordered_json::array();
    for (const auto& sp : spans[i]) {
      nlohmann::ordered_json x;
      x["start"] = sp.start;
      x["end"] = sp.end;
      x["category"] = sp.category;
      x["detector"] = sp.detector;
      x["text"] = detokenize(sentences[i].slice(sp.start, sp.end));
      e["errors"].push_back(std::move(x));
      out << i << "\t" << sp.start << "\t" << sp.end << "\t" << sp.category << "\t" << sp.detector
          << "\t" << detokenize(sentences[i].slice(sp.start, sp.end)) << "\n";
    }
    total += spans[i].size();
    j["sentences"].push_back(std::move(e));
  }
  out << total << " error" << (total == 1 ? "" : "s") << " in " << sentences.size() << " sentence"
      << (sentences.size() == 1 ? "" : "s") << "\n";
  if (!o.output.empty()) {
    std::ofstream f(o.output, std::ios::binary);
    if (!f) throw ValidationError("cannot write '" + o.output + "'");
    f << j.dump(2) << "\n";
    err << "gecmetric: wrote " << o.output << "\n";
  }
  return kOk;
}

// ---------------------------------------------------------------------------

void add_corpus_options(CLI::App& c, Options& o) {
  c.add_option("--m2", o.m2, "Gold M2 file (source sentences and gold edits)");
  c.add_option("--source", o.source, "Source sentences, one per line (instead of --m2)");
  c.add_option("--hyp", o.hyps, "System output as [ID=]PATH, one sentence per line (repeatable)");
  c.add_option("--ref", o.refs, "Reference file, one sentence per line (repeatable)");
  c.add_option("--wordlist", o.wordlist, "Wordlist for the spell detector and LFM, one word per line");
  c.add_option("--detector", o.detectors, "Built-in detector to use (repeatable; default: all)")
      ->check(CLI::IsMember(builtin_detector_names()));
  c.add_option("--checker-cmd", o.checker_cmd, "External checker command (JSON lines over stdin/stdout)");
  c.add_option("--checker-pool", o.checker_pool, "Number of external checker processes")
      ->check(CLI::Range(std::size_t{1}, std::size_t{256}));
  c.add_option("--checker-timeout", o.checker_timeout, "Seconds to wait for each checker response")
      ->check(CLI::PositiveNumber);
  c.add_option("--lfm-model", o.lfm_model, "Trained LFM model (JSON)");
  c.add_option("--lm-corpus", o.lm_corpus, "Language model training text, one sentence per line");
  c.add_option("--lm-order", o.lm_order, "Language model order")->check(CLI::Range(1, 10));
  c.add_option("--gleu-iterations", o.gleu_iterations, "GLEU reference sampling iterations")
      ->check(CLI::Range(1, 1000000));
  c.add_option("--gleu-mode", o.gleu_mode, "GLEU multi-reference mode")
      ->check(CLI::IsMember({"sampled", "mean"}));
  c.add_option("--seed", o.seed, "Random seed (default: $GECMETRIC_SEED, else a fixed seed)");
  c.add_option("--m2-beta", o.m2_beta, "M2 F-score beta")->check(CLI::PositiveNumber);
  c.add_option("--m2-max-unchanged", o.m2_max_unchanged, "M2 max unchanged words per edit")
      ->check(CLI::NonNegativeNumber);
  c.add_option("--im-weight", o.im_weight, "I-measure weight of true positives")
      ->check(CLI::PositiveNumber);
  c.add_option("--jobs", o.jobs, "Worker threads (default: available parallelism)");
  c.add_option("--output", o.output, "Write the JSON report here");
  c.add_option("--digits", o.digits, "Significant digits for reals in the report")
      ->check(CLI::Range(1, 17));
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Grammatical error correction evaluation toolkit", "gecmetric"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "gecmetric 1.0.0");

  auto* score = app.add_subcommand("score", "Score system outputs with one or more metrics");
  add_corpus_options(*score, o);
  score->add_option("--metric", o.metrics, "gleu, m2, imeasure, error-count or lfm (repeatable)")
      ->required();
  score->add_option("--mode", o.mode, "Aggregation mode recorded in the report")
      ->check(CLI::IsMember({"sentence", "corpus"}));

  auto* rank = app.add_subcommand("rank", "Rank systems by one metric");
  add_corpus_options(*rank, o);
  rank->add_option("--metric", o.metrics, "Metric to rank by")->required();
  rank->add_option("--mode", o.mode, "Aggregation mode")->check(CLI::IsMember({"sentence", "corpus"}));

  auto* corr = app.add_subcommand("correlate", "Correlate metric rankings with a human ranking");
  add_corpus_options(*corr, o);
  corr->add_option("--metric", o.metrics, "Metric (repeatable)")->required();
  corr->add_option("--mode", o.mode, "Aggregation mode")
      ->check(CLI::IsMember({"sentence", "corpus", "both"}));
  corr->add_option("--human", o.human, "Human ranking TSV: system_id<TAB>score")->required();
  corr->add_flag("--significance", o.significance, "Pairwise Fisher z-tests between correlations");

  auto* sweep = app.add_subcommand("sweep", "Sweep the interpolation weight between two metrics");
  add_corpus_options(*sweep, o);
  sweep->add_option("--gbm", o.gbm, "Reference-free metric (error-count or lfm)")->required();
  sweep->add_option("--rbm", o.rbm, "Reference-based metric (gleu, m2 or imeasure)")->required();
  sweep->add_option("--human", o.human, "Human ranking TSV")->required();
  sweep->add_flag("--gaming", o.gaming, "Also rescore against shuffled references");
  sweep->add_option("--lambda", o.lambda, "Interpolation weight for the gaming check")
      ->check(CLI::Range(0.0, 1.0));

  auto* ablate = app.add_subcommand("ablate", "Oracle correlation as the number of references grows");
  add_corpus_options(*ablate, o);
  ablate->add_option("--gbm", o.gbm, "Reference-free metric")->required();
  ablate->add_option("--rbm", o.rbm, "Reference-based metric")->required();
  ablate->add_option("--human", o.human, "Human ranking TSV")->required();
  ablate->add_option("--trials", o.trials, "Samples per reference count")
      ->check(CLI::Range(std::size_t{1}, std::size_t{100000}));
  ablate->add_option("--sizes", o.sizes, "Reference counts to test (default: 1..N)");

  auto* train = app.add_subcommand("train-lfm", "Train the linguistic feature model");
  train->add_option("--train", o.train, "Training TSV: sentence<TAB>score")->required();
  train->add_option("--lm-corpus", o.lm_corpus, "Language model training text")->required();
  train->add_option("--lm-order", o.lm_order, "Language model order")->check(CLI::Range(1, 10));
  train->add_option("--wordlist", o.wordlist, "Wordlist, one word per line")->required();
  train->add_option("--alpha", o.alpha, "Ridge penalty")->check(CLI::NonNegativeNumber);
  train->add_flag("--scale-1-4", o.scale_1_4, "Scores are on a 1-4 scale; map them onto [0, 1]");
  train->add_option("--output", o.output, "Model file to write")->required();

  auto* check = app.add_subcommand("check", "Run the error detectors on sentences");
  check->add_option("text", o.texts, "Sentences to check (tokens separated by spaces)");
  check->add_option("--input", o.input, "File with one sentence per line");
  check->add_option("--wordlist", o.wordlist, "Wordlist for the spell detector");
  check->add_option("--detector", o.detectors, "Built-in detector (repeatable; default: all)")
      ->check(CLI::IsMember(builtin_detector_names()));
  check->add_option("--checker-cmd", o.checker_cmd, "External checker command");
  check->add_option("--checker-pool", o.checker_pool, "Number of external checker processes")
      ->check(CLI::Range(std::size_t{1}, std::size_t{256}));
  check->add_option("--checker-timeout", o.checker_timeout, "Seconds to wait for each response")
      ->check(CLI::PositiveNumber);
  check->add_option("--output", o.output, "Write a JSON listing here");
  check->add_option("--digits", o.digits, "Significant digits for reals")->check(CLI::Range(1, 17));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (score->parsed()) return cmd_score(o, out, err);
    if (rank->parsed()) return cmd_rank(o, out, err);
    if (corr->parsed()) return cmd_correlate(o, out, err);
    if (sweep->parsed()) return cmd_sweep(o, out, err);
    if (ablate->parsed()) return cmd_ablate(o, out, err);
    if (train->parsed()) return cmd_train_lfm(o, out, err);
    if (check->parsed()) return cmd_check(o, out, err);
  } catch (const UsageError& e) {
    err << "gecmetric: " << e.what() << "\n";
    return kUsage;
  } catch (const DetectorError& e) {
    err << "gecmetric: checker '" << e.detector() << "' failed: " << e.what() << "\n";
    return kCheckerFailure;
  } catch (const std::exception& e) {
    err << "gecmetric: " << e.what() << "\n";
    return kValidation;
  }
  return kUsage;
}

}  // namespace gecmetric::cli
