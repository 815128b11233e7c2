#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "kids/errors.hpp"
#include "kids/segmentation.hpp"

namespace kids::metrics {

inline constexpr std::size_t kDefaultTolerance = 3;

/// Inactive interval [start, end) in inference steps. Its end is the
/// changepoint a detector should report.
struct GroundTruthSegment {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t duration() const { return end - start; }
};

struct MatchSet {
  // (index into predicted, index into ground truth)
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::size_t predicted_count = 0;
  std::size_t ground_truth_count = 0;

  std::size_t true_positives() const { return pairs.size(); }
  std::size_t false_positives() const { return predicted_count - pairs.size(); }
  std::size_t false_negatives() const { return ground_truth_count - pairs.size(); }
};

/// One-to-one matching of predicted changepoints to ground-truth segment ends.
/// Candidate pairs within `tolerance` are taken nearest first; equal distances
/// go to the earlier prediction, then the earlier ground-truth end.
inline MatchSet match_changepoints(const std::vector<std::size_t>& predicted,
                                   const std::vector<GroundTruthSegment>& ground_truth,
                                   std::size_t tolerance = kDefaultTolerance) {
  struct Candidate {
    std::size_t distance, pred, gt;
  };
  std::vector<Candidate> candidates;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    for (std::size_t j = 0; j < ground_truth.size(); ++j) {
      const std::size_t a = predicted[i];
      const std::size_t b = ground_truth[j].end;
      const std::size_t distance = a > b ? a - b : b - a;
      if (distance <= tolerance) candidates.push_back({distance, i, j});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [&](const Candidate& x, const Candidate& y) {
    return std::tie(x.distance, predicted[x.pred], x.pred, ground_truth[x.gt].end, x.gt) <
           std::tie(y.distance, predicted[y.pred], y.pred, ground_truth[y.gt].end, y.gt);
  });
  MatchSet matches;
  matches.predicted_count = predicted.size();
  matches.ground_truth_count = ground_truth.size();
  std::vector<bool> used_pred(predicted.size(), false);
  std::vector<bool> used_gt(ground_truth.size(), false);
  for (const auto& c : candidates) {
    if (used_pred[c.pred] || used_gt[c.gt]) continue;
    used_pred[c.pred] = used_gt[c.gt] = true;
    matches.pairs.emplace_back(c.pred, c.gt);
  }
  std::sort(matches.pairs.begin(), matches.pairs.end());
  return matches;
}

struct DetectionScores {
  double ppv = 0.0;
  double sensitivity = 0.0;
  double f1 = 0.0;
};

inline DetectionScores detection_metrics(const MatchSet& matches) {
  if (matches.predicted_count == 0 && matches.ground_truth_count == 0) {
    throw ConfigError("detection metrics are undefined with no predictions and no ground truth");
  }
  const auto tp = static_cast<double>(matches.true_positives());
  DetectionScores s;
  s.ppv = matches.predicted_count ? tp / static_cast<double>(matches.predicted_count) : 0.0;
  s.sensitivity = matches.ground_truth_count ? tp / static_cast<double>(matches.ground_truth_count) : 0.0;
  s.f1 = (s.ppv + s.sensitivity) > 0.0 ? 2.0 * s.ppv * s.sensitivity / (s.ppv + s.sensitivity) : 0.0;
  return s;
}

/// Sample Pearson correlation (n - 1 in both covariance and deviations).
inline double pearson_r(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ConfigError("pearson_r: length mismatch");
  if (x.size() < 2) throw NumericalError("pearson_r: need at least two pairs");
  const auto n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw NumericalError("pearson_r: zero variance");
  const double cov = sxy / (n - 1.0);
  const double r = cov / (std::sqrt(sxx / (n - 1.0)) * std::sqrt(syy / (n - 1.0)));
  return std::clamp(r, -1.0, 1.0);
}

struct EvaluationReport {
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
  DetectionScores scores;
  std::optional<double> pearson;  // empty when fewer than two matched pairs or zero variance
  std::vector<std::pair<double, double>> matched_durations;  // (predicted, ground truth)
};

/// Changepoint matching plus duration correlation over the matched pairs.
inline EvaluationReport evaluate(const std::vector<segmentation::Segment>& segments,
                                 const std::vector<GroundTruthSegment>& ground_truth,
                                 std::size_t tolerance = kDefaultTolerance) {
  std::vector<std::size_t> predicted;
  predicted.reserve(segments.size());
  for (const auto& s : segments) predicted.push_back(s.changepoint);
  const auto matches = match_changepoints(predicted, ground_truth, tolerance);
  EvaluationReport report;
  report.true_positives = matches.true_positives();
  report.false_positives = matches.false_positives();
  report.false_negatives = matches.false_negatives();
  report.scores = detection_metrics(matches);
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& [p, g] : matches.pairs) {
    report.matched_durations.emplace_back(segments[p].duration, static_cast<double>(ground_truth[g].duration()));
    x.push_back(segments[p].duration);
    y.push_back(static_cast<double>(ground_truth[g].duration()));
  }
  try {
    report.pearson = pearson_r(x, y);
  } catch (const NumericalError&) {
    report.pearson.reset();
  }
  return report;
}

}  // namespace kids::metrics
