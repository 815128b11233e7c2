// kids: command-line front end.
//
//   kids synthgen --resolution 15 --angles 36 --out axes.csv
//   kids simulate --seed 7 --out sim/
//   kids run --input sim/embedding.csv --labels sim/labels.csv --decimation 1 --out run/
//   kids sweep --sessions 20 --out sweep/
//   kids eval --segments run/segments.csv --labels sim/labels.csv
//
// Exit codes: 0 success, 1 configuration or parse error, 2 numerical failure,
// 3 I/O failure.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "kids/errors.hpp"
#include "kids/formats.hpp"
#include "kids/io.hpp"
#include "kids/metrics.hpp"
#include "kids/pipeline.hpp"
#include "kids/simharness.hpp"
#include "kids/synthgen.hpp"

namespace {

using namespace kids;
namespace fs = std::filesystem;

constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitIo = 3;

// --out wins over KIDS_OUTPUT_DIR, which wins over the per-command default.
fs::path output_dir(const std::string& flag, const char* fallback) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("KIDS_OUTPUT_DIR"); env && *env) return env;
  return fallback;
}

struct DetectorFlags {
  std::string prior = "auto";
  bool no_postprocess = false;
  std::optional<double> prune;
  pipeline::DetectorConfig config;

  void add_to(CLI::App* app) {
    app->add_option("--prior", prior, "auto | informative | non-informative")->capture_default_str();
    app->add_option("--epsilon", config.epsilon, "regularizer of the non-informative scatter")->capture_default_str();
    app->add_option("--hazard", config.hazard, "changepoint probability per step")->capture_default_str();
    app->add_flag("--no-postprocess", no_postprocess, "skip the run-length postprocessing filter");
    app->add_option("--log-threshold", config.log_threshold, "log10 drop that counts as a reset")
        ->capture_default_str();
    app->add_option("--min-run", config.min_run, "shortest pre-reset run length kept")->capture_default_str();
    app->add_option("--tolerance", config.tolerance, "changepoint matching tolerance (samples)")
        ->capture_default_str();
    app->add_option("--prune", prune, "drop hypotheses below this posterior mass");
    app->add_option("--prior-mean", config.overrides.mean, "override: every component of the prior mean");
    app->add_option("--prior-kappa", config.overrides.kappa, "override: prior kappa");
    app->add_option("--prior-dof", config.overrides.dof, "override: prior degrees of freedom");
    app->add_option("--prior-scatter", config.overrides.scatter, "override: prior scatter as a multiple of I");
  }

  pipeline::DetectorConfig resolve() const {
    auto c = config;
    c.prior = pipeline::parse_prior_choice(prior);
    c.postprocess = !no_postprocess;
    c.prune = prune;
    return c;
  }
};

void add_session_flags(CLI::App* app, sim::SessionConfig& c) {
  app->add_option("--seed", c.seed, "random seed")->capture_default_str();
  app->add_option("--postures", c.postures, "distinct postures")->capture_default_str();
  app->add_option("--replications", c.replications, "repetitions of each posture")->capture_default_str();
  app->add_option("--duration-min", c.duration_min, "shortest posture (downsampled samples)")->capture_default_str();
  app->add_option("--duration-max", c.duration_max, "longest posture (downsampled samples)")->capture_default_str();
  app->add_option("--transition-min", c.transition_min, "shortest transition")->capture_default_str();
  app->add_option("--transition-max", c.transition_max, "longest transition")->capture_default_str();
  app->add_option("--sigma", c.sigma, "within-posture noise scale")->capture_default_str();
  app->add_option("--separation", c.min_separation, "minimum distance between posture means, in sigmas")
      ->capture_default_str();
  app->add_option("--mean-candidates", c.mean_candidates, "best-candidate draws per posture mean")
      ->capture_default_str();
  app->add_option("--tail", c.tail_samples, "samples after the last transition")->capture_default_str();
  app->add_option("--decimation", c.decimation, "raw samples per downsampled sample")->capture_default_str();
  app->add_option("--raw-rate", c.raw_rate_hz, "raw sample rate (Hz)")->capture_default_str();
}

void print_scores(const metrics::EvaluationReport& r) {
  std::cout << "TP " << r.true_positives << "  FP " << r.false_positives << "  FN " << r.false_negatives << "\n"
            << "PPV " << io::format_double(r.scores.ppv) << "  Se " << io::format_double(r.scores.sensitivity)
            << "  F1 " << io::format_double(r.scores.f1) << "  R "
            << (r.pearson ? io::format_double(*r.pearson) : std::string("n/a")) << "\n";
}

int run_synthgen(int resolution, int angles, const std::string& projection, const fs::path& out) {
  synthgen::Projection p;
  if (projection == "ellipsoidal") {
    p = synthgen::Projection::Ellipsoidal;
  } else if (projection == "euclidean") {
    p = synthgen::Projection::Euclidean;
  } else {
    throw ConfigError("unknown projection '" + projection + "' (expected ellipsoidal or euclidean)");
  }
  const auto axes = synthgen::project_mesh(synthgen::build_cube_mesh(resolution), p);
  const auto dataset = synthgen::generate_synthetic_dataset(axes, synthgen::generate_angle_set(angles));
  if (out.has_parent_path()) io::ensure_directory(out.parent_path());
  const auto rows = synthgen::export_dataset_csv(dataset, out);
  std::cout << "axes " << dataset.axis_count << "\norientations " << rows << "\nwrote " << out.string() << "\n";
  return 0;
}

int run_simulate(const sim::SessionConfig& config, bool raw, const fs::path& out) {
  const auto session = raw ? sim::generate_session_axis_angle(config) : sim::generate_session(config);
  const auto files = pipeline::export_session(session, config, out);
  std::cout << "steps " << session.series.size() << "\nsegments " << session.segments.size() << "\n";
  for (const auto& f : files) std::cout << "wrote " << (out / f).string() << "\n";
  return 0;
}

int run_run(const pipeline::PipelineConfig& config) {
  const auto result = pipeline::run_pipeline(config);
  std::cout << "steps " << result.analysis.trace.size() - 1 << "\nsegments " << result.analysis.segments.size()
            << "\n";
  if (result.evaluation) print_scores(*result.evaluation);
  std::cout << "wrote " << config.output_dir.string() << "\n";
  return 0;
}

int run_sweep(const pipeline::SweepConfig& config, const fs::path& out) {
  const auto result = pipeline::run_variant_sweep(config);
  io::ensure_directory(out);
  io::write_file_atomic(out / "sweep_summary.csv", pipeline::sweep_summary_csv(result));
  io::write_file_atomic(out / "sweep_sessions.csv", pipeline::sweep_sessions_csv(result));
  pipeline::json j;
  j["sessions"] = config.sessions;
  j["seed"] = config.session.seed;
  j["detector"] = config.detector.to_json();
  pipeline::json variants = pipeline::json::array();
  for (const auto& v : result.variants) {
    variants.push_back({{"variant", v.variant.name},
                        {"prior", bocpd::to_string(v.variant.prior)},
                        {"postprocess", v.variant.postprocess},
                        {"ppv", v.mean_ppv},
                        {"sensitivity", v.mean_sensitivity},
                        {"f1", v.mean_f1},
                        {"pearson_r", v.mean_pearson ? pipeline::json(*v.mean_pearson) : pipeline::json(nullptr)},
                        {"pearson_sessions", v.pearson_sessions}});
  }
  j["variants"] = variants;
  io::write_file_atomic(out / "sweep.json", j.dump(2) + "\n");
  std::cout << pipeline::sweep_summary_csv(result) << "wrote " << out.string() << "\n";
  return 0;
}

int run_eval(const fs::path& segments_path, const fs::path& labels_path, std::size_t tolerance,
             const std::optional<fs::path>& out) {
  const auto segments = formats::load_segments(segments_path);
  const auto labels = formats::load_labels(labels_path);
  const auto report = metrics::evaluate(segments, labels, tolerance);
  print_scores(report);
  if (out) {
    io::ensure_directory(*out);
    io::write_file_atomic(*out / "metrics.csv", std::string(pipeline::kMetricsHeader) + pipeline::metrics_row(report));
    pipeline::json j;
    j["segments"] = segments_path.generic_string();
    j["labels"] = labels_path.generic_string();
    j["tolerance"] = tolerance;
    j["metrics"] = pipeline::scores_json(report);
    io::write_file_atomic(*out / "evaluation.json", j.dump(2) + "\n");
    std::cout << "wrote " << out->string() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kinematics-based inactivity detection and segmentation"};
  app.require_subcommand(1);

  auto* synth = app.add_subcommand("synthgen", "cube-to-sphere axes x angle set as a CSV dataset");
  int resolution = 15;
  int angles = 36;
  std::string projection = "ellipsoidal";
  std::string synth_out;
  synth->add_option("--resolution", resolution, "vertices per cube edge")->capture_default_str();
  synth->add_option("--angles", angles, "angles k*pi/n for k = n..1")->capture_default_str();
  synth->add_option("--projection", projection, "ellipsoidal | euclidean")->capture_default_str();
  synth->add_option("--out", synth_out, "dataset CSV path (default: <output dir>/synthetic_orientations.csv)");

  auto* simulate = app.add_subcommand("simulate", "seeded synthetic session with ground truth");
  sim::SessionConfig sim_config;
  bool sim_raw = false;
  std::string sim_out;
  add_session_flags(simulate, sim_config);
  simulate->add_flag("--raw", sim_raw, "also write raw-rate axis-angle and quaternion series");
  simulate->add_option("--out", sim_out, "output directory");

  auto* run = app.add_subcommand("run", "inference, segmentation and (with labels) evaluation on one series");
  pipeline::PipelineConfig run_config;
  DetectorFlags run_detector;
  std::string run_input;
  std::string run_labels;
  std::string run_out;
  run->add_option("--input", run_input, "t,qw,qx,qy,qz | t,x1,x2,x3,x4 | t,o1,o2,o3 CSV")->required();
  run->add_option("--labels", run_labels, "segment_start,segment_end CSV");
  run->add_option("--decimation", run_config.decimation, "keep every n-th sample")->capture_default_str();
  run->add_flag("--posterior-csv", run_config.posterior_csv, "also write the dense posterior matrix");
  run->add_option("--out", run_out, "output directory");
  run_detector.add_to(run);

  auto* sweep = app.add_subcommand("sweep", "all variants over seeded simulated sessions");
  pipeline::SweepConfig sweep_config;
  DetectorFlags sweep_detector;
  std::vector<std::string> sweep_variants;
  std::string sweep_out;
  sweep->add_option("--sessions", sweep_config.sessions, "number of sessions (seeds seed..seed+n-1)")
      ->capture_default_str();
  sweep->add_option("--variants", sweep_variants, "subset of adr+pp, adr, external+pp, external")->delimiter(',');
  sweep->add_option("--threads", sweep_config.threads, "worker threads (0: all cores)")->capture_default_str();
  sweep->add_option("--out", sweep_out, "output directory");
  add_session_flags(sweep, sweep_config.session);
  sweep_detector.add_to(sweep);

  auto* eval = app.add_subcommand("eval", "score a segments CSV against labels");
  std::string eval_segments;
  std::string eval_labels;
  std::string eval_out;
  std::size_t eval_tolerance = metrics::kDefaultTolerance;
  eval->add_option("--segments", eval_segments, "changepoint_idx,duration,start_idx CSV")->required();
  eval->add_option("--labels", eval_labels, "segment_start,segment_end CSV")->required();
  eval->add_option("--tolerance", eval_tolerance, "matching tolerance (samples)")->capture_default_str();
  eval->add_option("--out", eval_out, "also write metrics.csv and evaluation.json here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*synth) {
      const fs::path out = !synth_out.empty() ? fs::path(synth_out)
                                              : output_dir("", "kids_out") / "synthetic_orientations.csv";
      return run_synthgen(resolution, angles, projection, out);
    }
    if (*simulate) return run_simulate(sim_config, sim_raw, output_dir(sim_out, "kids_out/simulate"));
    if (*run) {
      run_config.input = run_input;
      if (!run_labels.empty()) run_config.labels = fs::path(run_labels);
      run_config.output_dir = output_dir(run_out, "kids_out/run");
      run_config.detector = run_detector.resolve();
      return run_run(run_config);
    }
    if (*sweep) {
      sweep_config.detector = sweep_detector.resolve();
      if (!sweep_variants.empty()) {
        sweep_config.variants.clear();
        for (const auto& v : sweep_variants) sweep_config.variants.push_back(pipeline::parse_variant(v));
      }
      return run_sweep(sweep_config, output_dir(sweep_out, "kids_out/sweep"));
    }
    if (*eval) {
      std::optional<fs::path> out;
      if (!eval_out.empty() || std::getenv("KIDS_OUTPUT_DIR")) out = output_dir(eval_out, "kids_out/eval");
      return run_eval(eval_segments, eval_labels, eval_tolerance, out);
    }
  } catch (const IoError& e) {
    std::cerr << "kids: I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const NumericalError& e) {
    std::cerr << "kids: numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const Error& e) {
    std::cerr << "kids: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
