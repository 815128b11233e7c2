#pragma once

// Online run-length inference: message passing over run-length hypotheses with
// a Normal-Wishart observation model and a constant (geometric) hazard.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kids/errors.hpp"
#include "kids/kinematics.hpp"
#include "kids/normal_wishart.hpp"

namespace kids::bocpd {

struct Hazard {
  double p = 0.01;  // probability of a changepoint at each step

  void validate() const {
    if (!(p > 0.0 && p < 1.0)) {
      throw ConfigError("hazard probability must lie in (0, 1), got " + std::to_string(p));
    }
  }
};

inline double log_sum_exp(std::span<const double> values) {
  double peak = -std::numeric_limits<double>::infinity();
  for (double v : values) peak = std::max(peak, v);
  if (!std::isfinite(peak)) return peak;
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - peak);
  return peak + std::log(sum);
}

struct PosteriorEntry {
  std::size_t run_length = 0;
  double probability = 0.0;
};

using PosteriorColumn = std::vector<PosteriorEntry>;

/// P(R_k = zeta | o_1..o_k) for k = 0..T. Column k holds only run lengths that
/// carry mass, in ascending order; every zeta > k is implicitly zero.
class RunLengthPosterior {
 public:
  RunLengthPosterior() { columns_.push_back({{0, 1.0}}); }

  std::size_t steps() const { return columns_.size() - 1; }

  const PosteriorColumn& column(std::size_t k) const { return columns_.at(k); }

  double at(std::size_t run_length, std::size_t k) const {
    const auto& col = columns_.at(k);
    const auto it = std::lower_bound(col.begin(), col.end(), run_length,
                                     [](const PosteriorEntry& e, std::size_t r) { return e.run_length < r; });
    return (it != col.end() && it->run_length == run_length) ? it->probability : 0.0;
  }

  void append(PosteriorColumn column) { columns_.push_back(std::move(column)); }

  /// (T+1) x (T+1) dense matrix, rows = run length, columns = time.
  Eigen::MatrixXd dense() const {
    const auto n = static_cast<Eigen::Index>(columns_.size());
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
      for (const auto& e : columns_[static_cast<std::size_t>(k)]) {
        out(static_cast<Eigen::Index>(e.run_length), k) = e.probability;
      }
    }
    return out;
  }

 private:
  std::vector<PosteriorColumn> columns_;
};

/// One run-length hypothesis. `params` is the Normal-Wishart posterior over
/// the `run_length` most recent observations; `log_prob` is its normalized log
/// posterior probability.
template <int Dim>
struct Hypothesis {
  std::size_t run_length = 0;
  double log_prob = 0.0;
  NormalWishart<Dim> params;
};

/// Hypotheses are stored oldest (longest run) first so a growth step updates
/// in place and the new changepoint hypothesis is appended at the back.
template <int Dim>
using HypothesisSet = std::vector<Hypothesis<Dim>>;

struct StepOutcome {
  PosteriorColumn column;
  double log_evidence = 0.0;  // log P(o_k | o_1..o_{k-1})
};

/// Advances the hypothesis set by one observation.
///
/// Every hypothesis predicts `o` with its own Student-t. Growth keeps the
/// hypothesis with weight (1 - p) * predictive; the new zero-length hypothesis
/// collects p * predictive from all of them. The sum over both kinds is the
/// normalizing evidence, so the changepoint hypothesis always ends at exactly
/// log p. When `prune_threshold` is positive, hypotheses below it are dropped
/// and the rest renormalized.
template <int Dim>
StepOutcome step(HypothesisSet<Dim>& states, const Vector<Dim>& o, const Hazard& hazard,
                 const NormalWishart<Dim>& prior, double prune_threshold = 0.0) {
  if (states.empty()) throw ConfigError("run-length step requires at least one hypothesis");
  std::vector<double> weighted(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    weighted[i] = states[i].log_prob + log_predictive(o, states[i].params);
  }
  const double evidence = log_sum_exp(weighted);
  if (!std::isfinite(evidence)) {
    throw NumericalError("every run-length hypothesis underflowed");
  }
  const double log_growth = std::log1p(-hazard.p);
  for (std::size_t i = 0; i < states.size(); ++i) {
    auto& h = states[i];
    h.log_prob = weighted[i] - evidence + log_growth;
    h.run_length += 1;
    h.params = absorb(h.params, o);
  }
  states.push_back({0, std::log(hazard.p), prior});

  if (prune_threshold > 0.0) {
    const double log_cut = std::log(prune_threshold);
    std::erase_if(states, [&](const Hypothesis<Dim>& h) { return h.log_prob < log_cut; });
    std::vector<double> kept(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) kept[i] = states[i].log_prob;
    const double norm = log_sum_exp(kept);
    for (auto& h : states) h.log_prob -= norm;
  }

  StepOutcome out;
  out.log_evidence = evidence;
  out.column.reserve(states.size());
  for (auto it = states.rbegin(); it != states.rend(); ++it) {
    out.column.push_back({it->run_length, std::exp(it->log_prob)});
  }
  return out;
}

/// Stateful driver around step(): starts from P(R_0 = 0) = 1.
template <int Dim>
class RunLengthFilter {
 public:
  RunLengthFilter(NormalWishart<Dim> prior, Hazard hazard, std::optional<double> prune_threshold = {})
      : prior_(std::move(prior)), hazard_(hazard), prune_(prune_threshold.value_or(0.0)) {
    prior_.validate();
    hazard_.validate();
    if (prune_ < 0.0 || prune_ >= 1.0) throw ConfigError("prune threshold must lie in [0, 1)");
    states_.push_back({0, 0.0, prior_});
  }

  const PosteriorColumn& update(const Vector<Dim>& o) {
    try {
      auto outcome = step(states_, o, hazard_, prior_, prune_);
      log_evidence_ += outcome.log_evidence;
      last_ = std::move(outcome.column);
    } catch (const NumericalError& e) {
      throw NumericalError("run-length inference at step " + std::to_string(time_ + 1) + ": " + e.what());
    }
    ++time_;
    return last_;
  }

  std::size_t time() const { return time_; }
  const HypothesisSet<Dim>& hypotheses() const { return states_; }
  double log_evidence() const { return log_evidence_; }

 private:
  NormalWishart<Dim> prior_;
  Hazard hazard_;
  double prune_ = 0.0;
  HypothesisSet<Dim> states_;
  PosteriorColumn last_;
  std::size_t time_ = 0;
  double log_evidence_ = 0.0;
};

template <int Dim>
RunLengthPosterior run_inference(std::span<const Vector<Dim>> series, const NormalWishart<Dim>& prior,
                                 const Hazard& hazard, std::optional<double> prune_threshold = {}) {
  if (series.empty()) throw ConfigError("run-length inference needs a nonempty series");
  RunLengthFilter<Dim> filter(prior, hazard, prune_threshold);
  RunLengthPosterior posterior;
  for (const auto& o : series) posterior.append(filter.update(o));
  return posterior;
}

inline RunLengthPosterior run_inference(const EmbeddingSeries& series, const NormalWishart3& prior,
                                        const Hazard& hazard, std::optional<double> prune_threshold = {}) {
  return run_inference<3>(std::span<const Embedding>(series.points), prior, hazard, prune_threshold);
}

}  // namespace kids::bocpd
