#pragma once

// Seeded synthetic "sleep sessions" with exact ground truth: a shuffled
// sequence of quasi-static postures on the ADR shell separated by short
// transition bursts.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "kids/errors.hpp"
#include "kids/kinematics.hpp"
#include "kids/metrics.hpp"
#include "kids/random.hpp"

namespace kids::sim {

struct SessionConfig {
  int postures = 12;
  int replications = 2;
  int duration_min = 20;  // downsampled samples per posture
  int duration_max = 60;
  int transition_min = 1;
  int transition_max = 3;
  double sigma = 0.05;          // within-posture noise scale (embedding units)
  double min_separation = 3.0;  // between posture means, in units of sigma
  int mean_candidates = 256;    // best-candidate draws per posture mean
  int tail_samples = 5;         // after the last transition; makes the final changepoint observable
  int decimation = 100;
  double raw_rate_hz = 30.0;
  std::uint64_t seed = 1;

  void validate() const {
    if (postures < 1 || replications < 1) throw ConfigError("session needs at least one posture and replication");
    if (postures == 1 && replications > 1) {
      throw ConfigError("a single posture cannot be replicated without two identical neighbours");
    }
    if (duration_min < 1 || duration_max < duration_min) throw ConfigError("invalid posture duration range");
    if (transition_min < 1 || transition_max < transition_min) throw ConfigError("invalid transition length range");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ConfigError("noise scale sigma must be positive");
    if (!(min_separation >= 0.0)) throw ConfigError("posture separation must be non-negative");
    if (mean_candidates < 1) throw ConfigError("need at least one candidate per posture mean");
    if (tail_samples < 0) throw ConfigError("tail sample count must be non-negative");
    if (decimation < 1) throw ConfigError("decimation factor must be >= 1");
    if (!(raw_rate_hz > 0.0)) throw ConfigError("raw sample rate must be positive");
  }
};

struct LabeledSession {
  EmbeddingSeries series;                             // downsampled, ADR shell
  std::vector<metrics::GroundTruthSegment> segments;  // inference-step units
  std::vector<std::size_t> changepoints;              // == segment ends
  std::vector<int> posture_order;
  std::optional<EmbeddingSeries> raw;                 // raw-rate ADR embeddings
  std::vector<AxisAngle> raw_axis_angle;              // raw-rate axis-angle samples
};

namespace detail {

inline Embedding into_shell(const Embedding& p) {
  const double r = p.norm();
  if (r < 1e-12) return Embedding{0.0, 0.0, 1.0};
  return p / r * std::clamp(r, kinematics::kInnerRadius, kinematics::kOuterRadius);
}

/// Folds a radius back into the open shell (1, 2). Clamping would pile samples
/// onto radius 1, the identity rotation, whose axis a quaternion cannot carry,
/// and onto radius 2, where q and -q give opposite embeddings.
inline double reflect_radius(double r) {
  constexpr double lo = kinematics::kInnerRadius;
  constexpr double hi = kinematics::kOuterRadius;
  constexpr double width = hi - lo;
  double x = std::fmod(r - lo, 2.0 * width);
  if (x < 0.0) x += 2.0 * width;
  if (x > width) x = 2.0 * width - x;
  return std::clamp(lo + x, lo + 1e-9, hi - 1e-9);
}

/// Isotropic noise split into radial and tangent parts around `base`, then
/// put back inside the [1, 2] shell.
inline Embedding perturb(const Embedding& base, double sd, Rng& rng) {
  const Embedding noise = rng.normal3(sd);
  const double r = base.norm();
  const Embedding dir = base / r;
  const double radial = noise.dot(dir);
  const Embedding tangent = noise - radial * dir;
  const Embedding moved_dir = (dir + tangent / r).normalized();
  return reflect_radius(r + radial) * moved_dir;
}

inline double min_pairwise_distance(const std::vector<Embedding>& points) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) best = std::min(best, (points[i] - points[j]).norm());
  }
  return best;
}

/// Best-candidate placement: each new mean is the candidate farthest from the
/// ones already placed, so postures spread over the shell. The configured
/// separation is a hard floor checked afterwards.
inline std::vector<Embedding> draw_means(std::size_t count, const SessionConfig& cfg, Rng& rng) {
  const double margin = std::min(3.0 * cfg.sigma, 0.25);
  const double r_lo = kinematics::kInnerRadius + margin;
  const double r_hi = kinematics::kOuterRadius - margin;
  std::vector<Embedding> means;
  while (means.size() < count) {
    Embedding best = Embedding::Zero();
    double best_gap = -1.0;
    for (int c = 0; c < cfg.mean_candidates; ++c) {
      const Embedding candidate = rng.uniform(r_lo, r_hi) * rng.unit_vector();
      double gap = std::numeric_limits<double>::infinity();
      for (const auto& m : means) gap = std::min(gap, (m - candidate).norm());
      if (gap > best_gap) {
        best_gap = gap;
        best = candidate;
      }
    }
    means.push_back(best);
  }
  const double min_dist = cfg.min_separation * cfg.sigma;
  if (count > 1 && min_pairwise_distance(means) < min_dist) {
    throw ConfigError("cannot place " + std::to_string(count) + " posture means " + std::to_string(min_dist) +
                      " apart on the ADR shell");
  }
  return means;
}

/// Shuffled replications with no posture following itself.
inline std::vector<int> shuffled_order(const SessionConfig& cfg, Rng& rng) {
  std::vector<int> order;
  for (int rep = 0; rep < cfg.replications; ++rep) {
    for (int p = 0; p < cfg.postures; ++p) order.push_back(p);
  }
  for (int attempt = 0; attempt < 10000; ++attempt) {
    rng.shuffle(order);
    if (std::adjacent_find(order.begin(), order.end()) == order.end()) return order;
  }
  throw ConfigError("cannot order postures without immediate repeats");
}

}  // namespace detail

/// Block of the downsampled session: one base point and the noise scale used
/// around it.
struct SessionBlock {
  Embedding base;
  double sd = 0.0;
};

struct SessionPlan {
  std::vector<SessionBlock> blocks;
  std::vector<metrics::GroundTruthSegment> segments;
  std::vector<int> order;
};

inline SessionPlan plan_session(const SessionConfig& cfg, Rng& rng) {
  cfg.validate();
  // One extra mean for the final "awake" tail.
  const auto means = detail::draw_means(static_cast<std::size_t>(cfg.postures) + 1, cfg, rng);
  SessionPlan plan;
  plan.order = detail::shuffled_order(cfg, rng);
  auto transition = [&](const Embedding& from, const Embedding& to) {
    const auto length = rng.uniform_int(cfg.transition_min, cfg.transition_max);
    for (std::int64_t j = 1; j <= length; ++j) {
      const double f = static_cast<double>(j) / static_cast<double>(length + 1);
      plan.blocks.push_back({detail::into_shell(from + f * (to - from)), 2.0 * cfg.sigma});
    }
  };
  for (std::size_t slot = 0; slot < plan.order.size(); ++slot) {
    const Embedding& mean = means[static_cast<std::size_t>(plan.order[slot])];
    if (slot > 0) transition(means[static_cast<std::size_t>(plan.order[slot - 1])], mean);
    const auto duration = rng.uniform_int(cfg.duration_min, cfg.duration_max);
    // Block i is observed at inference step i + 1.
    const std::size_t start = plan.blocks.size() + 1;
    for (std::int64_t i = 0; i < duration; ++i) plan.blocks.push_back({mean, cfg.sigma});
    plan.segments.push_back({start, start + static_cast<std::size_t>(duration)});
  }
  const Embedding& awake = means.back();
  transition(means[static_cast<std::size_t>(plan.order.back())], awake);
  for (int i = 0; i < cfg.tail_samples; ++i) plan.blocks.push_back({awake, cfg.sigma});
  return plan;
}

namespace detail {

inline LabeledSession realize(const SessionConfig& cfg, Rng& rng, SessionPlan& plan) {
  plan = plan_session(cfg, rng);
  LabeledSession session;
  session.segments = plan.segments;
  session.posture_order = plan.order;
  for (const auto& s : plan.segments) session.changepoints.push_back(s.end);
  session.series.source = EmbeddingSource::Adr;
  session.series.sample_rate_hz = cfg.raw_rate_hz / cfg.decimation;
  for (std::size_t i = 0; i < plan.blocks.size(); ++i) {
    session.series.points.push_back(perturb(plan.blocks[i].base, plan.blocks[i].sd, rng));
    session.series.timestamps.push_back(static_cast<double>(i * static_cast<std::size_t>(cfg.decimation)) / cfg.raw_rate_hz);
  }
  return session;
}

}  // namespace detail

/// Downsampled embedding-level session.
inline LabeledSession generate_session(const SessionConfig& cfg) {
  Rng rng(cfg.seed);
  SessionPlan plan;
  return detail::realize(cfg, rng, plan);
}

/// Same session expanded to the raw sensor rate as axis-angle samples. Every
/// `decimation`-th raw sample is exactly the downsampled embedding; the others
/// are fresh draws around the same block.
inline LabeledSession generate_session_axis_angle(const SessionConfig& cfg) {
  Rng rng(cfg.seed);
  SessionPlan plan;
  LabeledSession session = detail::realize(cfg, rng, plan);
  EmbeddingSeries raw;
  raw.source = EmbeddingSource::Adr;
  raw.sample_rate_hz = cfg.raw_rate_hz;
  const auto factor = static_cast<std::size_t>(cfg.decimation);
  raw.points.reserve(plan.blocks.size() * factor);
  for (std::size_t i = 0; i < plan.blocks.size(); ++i) {
    for (std::size_t j = 0; j < factor; ++j) {
      raw.points.push_back(j == 0 ? session.series.points[i]
                                  : detail::perturb(plan.blocks[i].base, plan.blocks[i].sd, rng));
      raw.timestamps.push_back(static_cast<double>(i * factor + j) / cfg.raw_rate_hz);
    }
  }
  session.raw_axis_angle.reserve(raw.points.size());
  for (const auto& p : raw.points) session.raw_axis_angle.push_back(kinematics::adr_invert(p));
  session.raw = std::move(raw);
  return session;
}

}  // namespace kids::sim
