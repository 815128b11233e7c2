#pragma once

// End-to-end composition: embedding series -> run-length posterior -> trace ->
// resets -> inactivity segments -> evaluation, plus the multi-session variant
// sweep used to compare preprocessing/prior/postprocessing choices.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "kids/bocpd.hpp"
#include "kids/errors.hpp"
#include "kids/formats.hpp"
#include "kids/io.hpp"
#include "kids/kinematics.hpp"
#include "kids/metrics.hpp"
#include "kids/normal_wishart.hpp"
#include "kids/segmentation.hpp"
#include "kids/simharness.hpp"

namespace kids::pipeline {

using json = nlohmann::ordered_json;

struct AnalysisOptions {
  bocpd::NormalWishart3 prior = bocpd::informative_prior();
  bocpd::Hazard hazard;
  bool postprocess = true;
  double log_threshold = segmentation::kDefaultLogThreshold;
  double min_run = segmentation::kDefaultMinRun;
  std::optional<double> prune;
};

struct Analysis {
  bocpd::RunLengthPosterior posterior;
  segmentation::RunLengthTrace raw_trace;
  segmentation::RunLengthTrace trace;  // postprocessed when enabled, otherwise raw
  std::vector<segmentation::ChangepointEvent> events;
  std::vector<segmentation::ChangepointEvent> retained;
  std::vector<segmentation::Segment> segments;
};

/// Everything downstream of an existing posterior.
inline Analysis segment_posterior(bocpd::RunLengthPosterior posterior, const AnalysisOptions& options) {
  Analysis a;
  a.posterior = std::move(posterior);
  a.raw_trace = segmentation::lms_estimate(a.posterior);
  a.trace = options.postprocess ? segmentation::postprocess_runlength(a.raw_trace) : a.raw_trace;
  a.events = segmentation::detect_resets(a.trace, options.log_threshold);
  a.retained = segmentation::filter_repetitive_resets(a.events, options.min_run);
  a.segments = segmentation::build_segments(a.retained, a.trace);
  return a;
}

inline Analysis analyze(const EmbeddingSeries& series, const AnalysisOptions& options) {
  return segment_posterior(bocpd::run_inference(series, options.prior, options.hazard, options.prune), options);
}

enum class PriorChoice { Auto, Informative, NonInformative };

inline const char* to_string(PriorChoice c) {
  switch (c) {
    case PriorChoice::Auto: return "auto";
    case PriorChoice::Informative: return "informative";
    case PriorChoice::NonInformative: return "non-informative";
  }
  return "?";
}

inline PriorChoice parse_prior_choice(const std::string& text) {
  if (text == "auto") return PriorChoice::Auto;
  if (text == "informative") return PriorChoice::Informative;
  if (text == "non-informative" || text == "noninformative") return PriorChoice::NonInformative;
  throw ConfigError("unknown prior '" + text + "' (expected auto, informative or non-informative)");
}

/// ADR embeddings get the informative prior, external ones the near-flat one.
inline bocpd::PriorKind resolve_prior(PriorChoice choice, EmbeddingSource source) {
  switch (choice) {
    case PriorChoice::Informative: return bocpd::PriorKind::Informative;
    case PriorChoice::NonInformative: return bocpd::PriorKind::NonInformative;
    case PriorChoice::Auto: break;
  }
  return source == EmbeddingSource::Adr ? bocpd::PriorKind::Informative : bocpd::PriorKind::NonInformative;
}

/// Field-wise replacements applied on top of the selected prior.
struct PriorOverrides {
  std::optional<double> mean;     // every component
  std::optional<double> kappa;
  std::optional<double> dof;
  std::optional<double> scatter;  // multiple of the identity

  bool any() const { return mean || kappa || dof || scatter; }

  bocpd::NormalWishart3 apply(bocpd::NormalWishart3 prior) const {
    if (mean) prior.mean.setConstant(*mean);
    if (kappa) prior.kappa = *kappa;
    if (dof) prior.dof = *dof;
    if (scatter) prior.scatter = *scatter * bocpd::Matrix<3>::Identity();
    prior.validate();
    return prior;
  }

  json to_json() const {
    auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    return {{"mean", opt(mean)}, {"kappa", opt(kappa)}, {"dof", opt(dof)}, {"scatter", opt(scatter)}};
  }
};

/// Inference and segmentation settings shared by `run` and `sweep`.
struct DetectorConfig {
  PriorChoice prior = PriorChoice::Auto;
  PriorOverrides overrides;
  double epsilon = bocpd::kDefaultNonInformativeEpsilon;
  double hazard = 0.01;
  bool postprocess = true;
  double log_threshold = segmentation::kDefaultLogThreshold;
  double min_run = segmentation::kDefaultMinRun;
  std::size_t tolerance = metrics::kDefaultTolerance;
  std::optional<double> prune;

  void validate() const {
    if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
    bocpd::Hazard{hazard}.validate();
    if (!(log_threshold > 0.0)) throw ConfigError("log threshold must be positive");
    if (!(min_run > 0.0)) throw ConfigError("minimum run length must be positive");
    if (tolerance == 0) throw ConfigError("matching tolerance must be positive");
    if (prune && !(*prune > 0.0 && *prune < 1.0)) throw ConfigError("prune threshold must lie in (0, 1)");
    if (overrides.any()) overrides.apply(bocpd::informative_prior());
  }

  AnalysisOptions options_for(bocpd::PriorKind kind) const {
    AnalysisOptions o;
    o.prior = overrides.apply(bocpd::make_prior(kind, epsilon));
    o.hazard = bocpd::Hazard{hazard};
    o.postprocess = postprocess;
    o.log_threshold = log_threshold;
    o.min_run = min_run;
    o.prune = prune;
    return o;
  }

  json to_json() const {
    json j;
    j["prior"] = to_string(prior);
    j["prior_overrides"] = overrides.to_json();
    j["epsilon"] = epsilon;
    j["hazard"] = hazard;
    j["postprocess"] = postprocess;
    j["log_threshold"] = log_threshold;
    j["min_run"] = min_run;
    j["tolerance"] = tolerance;
    j["prune"] = prune ? json(*prune) : json(nullptr);
    return j;
  }
};

struct PipelineConfig {
  std::filesystem::path input;
  std::optional<std::filesystem::path> labels;
  std::filesystem::path output_dir;
  int decimation = 100;
  DetectorConfig detector;
  bool posterior_csv = false;

  void validate() const {
    if (input.empty()) throw ConfigError("no input file given");
    if (output_dir.empty()) throw ConfigError("no output directory given");
    if (decimation < 1) throw ConfigError("decimation factor must be >= 1");
    detector.validate();
  }
};

inline json scores_json(const metrics::EvaluationReport& r) {
  json j;
  j["tp"] = r.true_positives;
  j["fp"] = r.false_positives;
  j["fn"] = r.false_negatives;
  j["ppv"] = r.scores.ppv;
  j["sensitivity"] = r.scores.sensitivity;
  j["f1"] = r.scores.f1;
  j["pearson_r"] = r.pearson ? json(*r.pearson) : json(nullptr);
  json pairs = json::array();
  for (const auto& [pred, gt] : r.matched_durations) pairs.push_back({pred, gt});
  j["matched_durations"] = pairs;
  return j;
}

inline constexpr const char* kMetricsHeader = "tp,fp,fn,ppv,sensitivity,f1,pearson_r\n";

inline std::string metrics_row(const metrics::EvaluationReport& r) {
  return std::to_string(r.true_positives) + "," + std::to_string(r.false_positives) + "," +
         std::to_string(r.false_negatives) + "," + io::format_double(r.scores.ppv) + "," +
         io::format_double(r.scores.sensitivity) + "," + io::format_double(r.scores.f1) + "," +
         (r.pearson ? io::format_double(*r.pearson) : std::string()) + "\n";
}

inline json trace_stats(const Analysis& a) {
  auto max_of = [](const segmentation::RunLengthTrace& t) { return *std::max_element(t.begin(), t.end()); };
  double mean = 0.0;
  for (double v : a.trace) mean += v;
  mean /= static_cast<double>(a.trace.size());
  json j;
  j["length"] = a.trace.size();
  j["raw_max"] = max_of(a.raw_trace);
  j["max"] = max_of(a.trace);
  j["mean"] = mean;
  j["final"] = a.trace.back();
  j["resets_detected"] = a.events.size();
  j["resets_retained"] = a.retained.size();
  return j;
}

struct PipelineResult {
  Analysis analysis;
  std::optional<metrics::EvaluationReport> evaluation;
  json report;
};

/// Loads, decimates, analyzes and writes segments.csv, trace.csv,
/// posterior.pgm, report.json (and metrics.csv / posterior.csv when asked).
/// Nothing is written unless the inputs load and inference succeeds.
inline PipelineResult run_pipeline(const PipelineConfig& config) {
  config.validate();
  const auto loaded = formats::load_series(config.input);
  std::optional<std::vector<metrics::GroundTruthSegment>> labels;
  if (config.labels) labels = formats::load_labels(*config.labels);
  const auto series = kinematics::decimate(loaded.series, config.decimation);
  const auto kind = resolve_prior(config.detector.prior, series.source);

  PipelineResult result;
  result.analysis = analyze(series, config.detector.options_for(kind));
  const Analysis& a = result.analysis;
  if (labels && !(labels->empty() && a.segments.empty())) {
    result.evaluation = metrics::evaluate(a.segments, *labels, config.detector.tolerance);
  }

  json& report = result.report;
  json cfg;
  cfg["input"] = config.input.generic_string();
  cfg["labels"] = config.labels ? json(config.labels->generic_string()) : json(nullptr);
  cfg["decimation"] = config.decimation;
  cfg["detector"] = config.detector.to_json();
  cfg["resolved_prior"] = bocpd::to_string(kind);
  report["config"] = cfg;
  report["input"] = {{"layout", formats::to_string(loaded.layout)},
                     {"source", to_string(series.source)},
                     {"samples", loaded.series.size()},
                     {"steps", series.size()}};
  report["trace"] = trace_stats(a);
  report["segments"] = a.segments.size();
  report["metrics"] = result.evaluation ? scores_json(*result.evaluation) : json(nullptr);

  io::ensure_directory(config.output_dir);
  const auto& dir = config.output_dir;
  io::write_file_atomic(dir / "segments.csv", formats::segments_csv(a.segments));
  io::write_file_atomic(dir / "trace.csv", formats::trace_csv(a.raw_trace, a.trace));
  io::write_file_atomic(dir / "posterior.pgm", formats::posterior_pgm(a.posterior));
  if (config.posterior_csv) io::write_file_atomic(dir / "posterior.csv", formats::posterior_csv(a.posterior));
  if (result.evaluation) {
    io::write_file_atomic(dir / "metrics.csv", std::string(kMetricsHeader) + metrics_row(*result.evaluation));
  }
  io::write_file_atomic(dir / "report.json", report.dump(2) + "\n");
  return result;
}

/// Files written by the `simulate` subcommand. Returns the file names.
inline std::vector<std::string> export_session(const sim::LabeledSession& session, const sim::SessionConfig& config,
                                               const std::filesystem::path& dir) {
  io::ensure_directory(dir);
  std::vector<std::string> written{"embedding.csv", "labels.csv", "session.json"};
  io::write_file_atomic(dir / "embedding.csv", formats::embedding_csv(session.series));
  io::write_file_atomic(dir / "labels.csv", formats::labels_csv(session.segments));
  if (session.raw) {
    io::write_file_atomic(dir / "orientation_axis_angle.csv",
                          formats::axis_angle_csv(session.raw->timestamps, session.raw_axis_angle));
    io::write_file_atomic(dir / "orientation_quaternion.csv",
                          formats::quaternion_csv(session.raw->timestamps, session.raw_axis_angle));
    written.insert(written.end(), {"orientation_axis_angle.csv", "orientation_quaternion.csv"});
  }
  json j;
  j["config"] = {{"postures", config.postures},
                 {"replications", config.replications},
                 {"duration_min", config.duration_min},
                 {"duration_max", config.duration_max},
                 {"transition_min", config.transition_min},
                 {"transition_max", config.transition_max},
                 {"sigma", config.sigma},
                 {"min_separation", config.min_separation},
                 {"mean_candidates", config.mean_candidates},
                 {"tail_samples", config.tail_samples},
                 {"decimation", config.decimation},
                 {"raw_rate_hz", config.raw_rate_hz},
                 {"seed", config.seed}};
  j["steps"] = session.series.size();
  j["raw_samples"] = session.raw ? json(session.raw->size()) : json(nullptr);
  j["segments"] = session.segments.size();
  j["changepoints"] = session.changepoints;
  j["posture_order"] = session.posture_order;
  io::write_file_atomic(dir / "session.json", j.dump(2) + "\n");
  return written;
}

// ---------------------------------------------------------------------------
// Variant sweep

struct Variant {
  std::string name;
  bocpd::PriorKind prior = bocpd::PriorKind::Informative;
  bool postprocess = true;
};

/// ADR with the informative prior and the external-embedding path with the
/// near-flat prior, each with and without postprocessing.
inline std::vector<Variant> default_variants() {
  return {{"adr+pp", bocpd::PriorKind::Informative, true},
          {"adr", bocpd::PriorKind::Informative, false},
          {"external+pp", bocpd::PriorKind::NonInformative, true},
          {"external", bocpd::PriorKind::NonInformative, false}};
}

inline Variant parse_variant(const std::string& name) {
  for (const auto& v : default_variants()) {
    if (v.name == name) return v;
  }
  throw ConfigError("unknown variant '" + name + "' (expected adr+pp, adr, external+pp or external)");
}

struct SweepConfig {
  sim::SessionConfig session;  // seed of session i is session.seed + i
  int sessions = 20;
  std::vector<Variant> variants = default_variants();
  DetectorConfig detector;
  unsigned threads = 0;  // 0: hardware concurrency

  void validate() const {
    session.validate();
    detector.validate();
    if (sessions < 1) throw ConfigError("sweep needs at least one session");
    if (variants.empty()) throw ConfigError("sweep needs at least one variant");
  }
};

struct SessionOutcome {
  std::uint64_t seed = 0;
  std::size_t steps = 0;
  metrics::EvaluationReport report;
};

struct VariantSummary {
  Variant variant;
  std::vector<SessionOutcome> sessions;
  double mean_ppv = 0.0;
  double mean_sensitivity = 0.0;
  double mean_f1 = 0.0;
  std::optional<double> mean_pearson;  // over sessions where R is defined
  std::size_t pearson_sessions = 0;
};

struct SweepResult {
  std::vector<VariantSummary> variants;  // in requested order
};

/// Runs every variant on the same seeded sessions. Sessions are distributed
/// over worker threads; variants sharing a prior share one posterior.
inline SweepResult run_variant_sweep(const SweepConfig& config) {
  config.validate();
  const auto n = static_cast<std::size_t>(config.sessions);
  std::vector<std::vector<SessionOutcome>> per_session(n);

  auto work = [&](std::size_t i) {
    sim::SessionConfig sc = config.session;
    sc.seed = config.session.seed + i;
    const auto session = sim::generate_session(sc);
    std::vector<SessionOutcome> outcomes(config.variants.size());
    std::optional<bocpd::RunLengthPosterior> cached[2];
    for (std::size_t v = 0; v < config.variants.size(); ++v) {
      const auto& variant = config.variants[v];
      auto options = config.detector.options_for(variant.prior);
      options.postprocess = variant.postprocess;
      auto& posterior = cached[variant.prior == bocpd::PriorKind::Informative ? 0 : 1];
      if (!posterior) posterior = bocpd::run_inference(session.series, options.prior, options.hazard, options.prune);
      const auto analysis = segment_posterior(*posterior, options);
      outcomes[v].seed = sc.seed;
      outcomes[v].steps = session.series.size();
      outcomes[v].report = metrics::evaluate(analysis.segments, session.segments, config.detector.tolerance);
    }
    per_session[i] = std::move(outcomes);
  };

  unsigned threads = config.threads ? config.threads : std::max(1U, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(threads);
  auto worker = [&](unsigned id) {
    try {
      for (std::size_t i = next++; i < n; i = next++) work(i);
    } catch (...) {
      errors[id] = std::current_exception();
      next = n;
    }
  };
  if (threads <= 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker, t);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  SweepResult result;
  for (std::size_t v = 0; v < config.variants.size(); ++v) {
    VariantSummary summary;
    summary.variant = config.variants[v];
    double pearson_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& outcome = per_session[i][v];
      summary.sessions.push_back(outcome);
      summary.mean_ppv += outcome.report.scores.ppv;
      summary.mean_sensitivity += outcome.report.scores.sensitivity;
      summary.mean_f1 += outcome.report.scores.f1;
      if (outcome.report.pearson) {
        pearson_sum += *outcome.report.pearson;
        ++summary.pearson_sessions;
      }
    }
    const auto count = static_cast<double>(n);
    summary.mean_ppv /= count;
    summary.mean_sensitivity /= count;
    summary.mean_f1 /= count;
    if (summary.pearson_sessions) summary.mean_pearson = pearson_sum / static_cast<double>(summary.pearson_sessions);
    result.variants.push_back(std::move(summary));
  }
  return result;
}

inline std::string sweep_summary_csv(const SweepResult& result) {
  std::string out = "variant,sessions,ppv,sensitivity,f1,pearson_r,pearson_sessions\n";
  for (const auto& s : result.variants) {
    out += s.variant.name + "," + std::to_string(s.sessions.size()) + "," + io::format_double(s.mean_ppv) + "," +
           io::format_double(s.mean_sensitivity) + "," + io::format_double(s.mean_f1) + "," +
           (s.mean_pearson ? io::format_double(*s.mean_pearson) : std::string()) + "," +
           std::to_string(s.pearson_sessions) + "\n";
  }
  return out;
}

inline std::string sweep_sessions_csv(const SweepResult& result) {
  std::string out = "variant,seed,steps," + std::string(kMetricsHeader);
  for (const auto& s : result.variants) {
    for (const auto& o : s.sessions) {
      out += s.variant.name + "," + std::to_string(o.seed) + "," + std::to_string(o.steps) + "," + metrics_row(o.report);
    }
  }
  return out;
}

}  // namespace kids::pipeline
