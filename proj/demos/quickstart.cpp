// Simulate one session, run the detector on it and print what was found.

#include <cstdio>

#include "kids/pipeline.hpp"

int main() {
  kids::sim::SessionConfig config;
  config.seed = 7;
  const auto session = kids::sim::generate_session(config);

  kids::pipeline::AnalysisOptions options;  // informative prior, postprocessing on
  const auto analysis = kids::pipeline::analyze(session.series, options);

  std::printf("%zu steps, %zu ground-truth segments, %zu detected\n", session.series.size(),
              session.segments.size(), analysis.segments.size());
  for (const auto& s : analysis.segments) {
    std::printf("  changepoint %4zu  duration %6.2f  start %7.2f\n", s.changepoint, s.duration, s.start);
  }

  const auto report = kids::metrics::evaluate(analysis.segments, session.segments);
  std::printf("PPV %.3f  Se %.3f  F1 %.3f", report.scores.ppv, report.scores.sensitivity, report.scores.f1);
  if (report.pearson) std::printf("  R %.3f", *report.pearson);
  std::printf("\n");
}
