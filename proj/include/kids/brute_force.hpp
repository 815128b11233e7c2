#pragma once

// Exhaustive reference for the run-length posterior. Enumerates every
// changepoint/growth sequence of each prefix length and scores it as a product
// of per-segment sequential predictives, each segment restarting from the
// prior. Shares no bookkeeping with the recursion in bocpd.hpp, only the
// conjugate update and the predictive density. Exponential in T; tests only.
//
// Segment parameters are built observation by observation rather than with
// the batch formula: under the near-flat prior the scatter of a short window
// is nearly singular, and the two summation orders differ by ~1e-8 relative
// in its smallest eigenvalue, enough to move posterior entries by ~5e-9.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "kids/bocpd.hpp"

namespace kids::bocpd {

inline constexpr std::size_t kBruteForceMaxSteps = 12;

template <int Dim>
RunLengthPosterior brute_force_posterior(std::span<const Vector<Dim>> series, const NormalWishart<Dim>& prior,
                                         const Hazard& hazard) {
  if (series.size() > kBruteForceMaxSteps) {
    throw ConfigError("brute-force posterior is limited to T <= 12, got T = " + std::to_string(series.size()));
  }
  hazard.validate();
  const double log_cp = std::log(hazard.p);
  const double log_grow = std::log1p(-hazard.p);
  RunLengthPosterior posterior;
  for (std::size_t k = 1; k <= series.size(); ++k) {
    // joint[zeta] accumulates P(R_k = zeta, o_1..o_k) in log space.
    std::vector<std::vector<double>> joint(k + 1);
    for (std::uint64_t config = 0; config < (std::uint64_t{1} << k); ++config) {
      std::size_t run = 0;  // R_{j-1}
      NormalWishart<Dim> segment = prior;  // fitted to the `run` observations before o_j
      double log_joint = 0.0;
      for (std::size_t j = 1; j <= k; ++j) {
        log_joint += log_predictive(series[j - 1], segment);
        const bool changepoint = (config >> (j - 1)) & 1U;
        log_joint += changepoint ? log_cp : log_grow;
        run = changepoint ? 0 : run + 1;
        segment = changepoint ? prior : absorb(segment, series[j - 1]);
      }
      joint[run].push_back(log_joint);
    }
    std::vector<double> per_run(k + 1, -std::numeric_limits<double>::infinity());
    for (std::size_t r = 0; r <= k; ++r) {
      if (!joint[r].empty()) per_run[r] = log_sum_exp(joint[r]);
    }
    const double evidence = log_sum_exp(per_run);
    PosteriorColumn column;
    for (std::size_t r = 0; r <= k; ++r) {
      if (std::isfinite(per_run[r])) column.push_back({r, std::exp(per_run[r] - evidence)});
    }
    posterior.append(std::move(column));
  }
  return posterior;
}

}  // namespace kids::bocpd
