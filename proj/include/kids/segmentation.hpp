#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iterator>
#include <string>
#include <vector>

#include "kids/bocpd.hpp"
#include "kids/errors.hpp"

namespace kids::segmentation {

/// Run-length point estimates indexed by step k = 0..T.
using RunLengthTrace = std::vector<double>;

inline constexpr double kDefaultLogThreshold = 0.30;  // ~log10(2): a halving
inline constexpr double kDefaultMinRun = 20.0;

struct ChangepointEvent {
  std::size_t index = 0;      // step at which the reset is observed
  double pre_reset_run = 0.0;  // trace value at index - 1
  double log_drop = 0.0;       // log10 drop, after clamping to >= 1
};

struct Segment {
  std::size_t changepoint = 0;
  double duration = 0.0;
  double start = 0.0;  // changepoint - duration
};

/// Posterior mean of the run length at every step.
inline RunLengthTrace lms_estimate(const bocpd::RunLengthPosterior& posterior) {
  RunLengthTrace trace(posterior.steps() + 1, 0.0);
  for (std::size_t k = 0; k < trace.size(); ++k) {
    double mean = 0.0;
    for (const auto& e : posterior.column(k)) mean += static_cast<double>(e.run_length) * e.probability;
    trace[k] = mean;
  }
  return trace;
}

/// Bridges a two-step fall: where trace[k-1] > trace[k] > trace[k+1] the middle
/// sample takes the value before it, so the whole drop lands on one step.
/// Reads from the input only; the end points pass through.
inline RunLengthTrace postprocess_runlength(const RunLengthTrace& trace) {
  RunLengthTrace out = trace;
  for (std::size_t k = 1; k + 1 < trace.size(); ++k) {
    if (trace[k - 1] > trace[k] && trace[k] > trace[k + 1]) out[k] = trace[k - 1];
  }
  return out;
}

inline double clamped_log10(double run_length) { return std::log10(std::max(run_length, 1.0)); }

/// Flags every step where log10 of the (clamped) trace drops by more than
/// `log_threshold`. After a flagged step, further drops are ignored until the
/// trace rises again, so one gradual reset yields one event.
inline std::vector<ChangepointEvent> detect_resets(const RunLengthTrace& trace,
                                                   double log_threshold = kDefaultLogThreshold) {
  if (!(log_threshold > 0.0)) throw ConfigError("reset log threshold must be positive");
  std::vector<ChangepointEvent> events;
  bool armed = true;
  for (std::size_t k = 1; k < trace.size(); ++k) {
    if (trace[k] > trace[k - 1]) armed = true;
    const double drop = clamped_log10(trace[k - 1]) - clamped_log10(trace[k]);
    if (armed && drop > log_threshold) {
      events.push_back({k, trace[k - 1], drop});
      armed = false;
    }
  }
  return events;
}

/// Drops resets that follow a run shorter than `min_run` (bursts of activity).
inline std::vector<ChangepointEvent> filter_repetitive_resets(const std::vector<ChangepointEvent>& events,
                                                              double min_run = kDefaultMinRun) {
  std::vector<ChangepointEvent> kept;
  std::copy_if(events.begin(), events.end(), std::back_inserter(kept),
               [&](const ChangepointEvent& e) { return e.pre_reset_run >= min_run; });
  return kept;
}

/// One inactivity segment per retained reset. Its duration is the run length
/// just before the reset, capped by the steps elapsed since the previous one.
inline std::vector<Segment> build_segments(const std::vector<ChangepointEvent>& events,
                                           const RunLengthTrace& trace) {
  std::vector<Segment> segments;
  std::size_t previous = 0;
  for (const auto& e : events) {
    if (e.index == 0 || e.index >= trace.size()) {
      throw ConfigError("changepoint index " + std::to_string(e.index) + " outside the trace");
    }
    const double elapsed = static_cast<double>(e.index - previous);
    const double duration = std::min(trace[e.index - 1], elapsed);
    segments.push_back({e.index, duration, static_cast<double>(e.index) - duration});
    previous = e.index;
  }
  return segments;
}

}  // namespace kids::segmentation
