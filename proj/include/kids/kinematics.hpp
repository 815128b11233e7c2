#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "kids/errors.hpp"

namespace kids {

using Embedding = Eigen::Vector3d;

struct Quaternion {
  double w = 1.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }
};

struct AxisAngle {
  Eigen::Vector3d axis{0.0, 0.0, 1.0};
  double angle = 0.0;  // radians, [0, pi]
};

enum class EmbeddingSource { Adr, External };

inline const char* to_string(EmbeddingSource source) {
  return source == EmbeddingSource::Adr ? "adr" : "external";
}

/// Embeddings on a time grid. External embeddings carry no shell constraint.
struct EmbeddingSeries {
  std::vector<Embedding> points;
  std::vector<double> timestamps;  // seconds
  double sample_rate_hz = 0.0;
  EmbeddingSource source = EmbeddingSource::Adr;

  std::size_t size() const { return points.size(); }
  bool unconstrained() const { return source == EmbeddingSource::External; }

  void validate() const {
    if (points.size() != timestamps.size()) {
      throw ConfigError("embedding series: " + std::to_string(points.size()) + " points but " +
                        std::to_string(timestamps.size()) + " timestamps");
    }
    for (std::size_t i = 1; i < timestamps.size(); ++i) {
      if (!(timestamps[i] > timestamps[i - 1])) {
        throw ConfigError("embedding series: timestamps not strictly increasing at row " +
                          std::to_string(i));
      }
    }
  }
};

namespace kinematics {

inline constexpr double kDegenerateAngle = 1e-8;
inline constexpr double kInnerRadius = 1.0;
inline constexpr double kOuterRadius = 2.0;
inline constexpr double kShellTolerance = 1e-9;

/// Unit quaternion with w >= 0; for w == 0 the first nonzero of (x, y, z) is
/// made positive. q and -q describe the same rotation.
inline Quaternion canonicalize(const Quaternion& q) {
  const double n = q.norm();
  if (n == 0.0 || !std::isfinite(n)) throw ConfigError("cannot convert a zero or non-finite quaternion");
  Quaternion c{q.w / n, q.x / n, q.y / n, q.z / n};
  bool flip = c.w < 0.0;
  if (c.w == 0.0) {
    const double lead = c.x != 0.0 ? c.x : (c.y != 0.0 ? c.y : c.z);
    flip = lead < 0.0;
  }
  if (flip) c = {-c.w, -c.x, -c.y, -c.z};
  return c;
}

/// Standard conversion, angle = 2 acos(w) after canonicalization. Below
/// kDegenerateAngle the axis is undefined and `fallback_axis` is used.
inline AxisAngle quaternion_to_axis_angle(const Quaternion& q,
                                          const Eigen::Vector3d& fallback_axis = {0.0, 0.0, 1.0}) {
  const Quaternion c = canonicalize(q);
  const Eigen::Vector3d v{c.x, c.y, c.z};
  const double s = v.norm();
  // atan2 keeps precision near w == 1 where acos does not.
  const double angle = 2.0 * std::atan2(s, c.w);
  if (angle <= kDegenerateAngle || s == 0.0) return {fallback_axis, angle};
  return {v / s, angle};
}

inline Quaternion axis_angle_to_quaternion(const AxisAngle& aa) {
  const double half = 0.5 * aa.angle;
  const double s = std::sin(half);
  return {std::cos(half), s * aa.axis.x(), s * aa.axis.y(), s * aa.axis.z()};
}

/// Converts a whole timeseries. A degenerate sample inherits the previous
/// sample's axis so the embedding does not jump across the inner shell.
inline std::vector<AxisAngle> quaternions_to_axis_angles(const std::vector<Quaternion>& qs) {
  std::vector<AxisAngle> out;
  out.reserve(qs.size());
  Eigen::Vector3d carry{0.0, 0.0, 1.0};
  for (const auto& q : qs) {
    out.push_back(quaternion_to_axis_angle(q, carry));
    carry = out.back().axis;
  }
  return out;
}

inline void validate_axis_angle(const AxisAngle& aa) {
  if (std::abs(aa.axis.norm() - 1.0) > 1e-9) {
    throw ConfigError("axis-angle: axis is not unit length (norm " + std::to_string(aa.axis.norm()) + ")");
  }
  if (!(aa.angle >= 0.0 && aa.angle <= std::numbers::pi + 1e-12)) {
    throw ConfigError("axis-angle: angle " + std::to_string(aa.angle) + " outside [0, pi]");
  }
}

/// Radial interpolation: radius 1 at angle 0, radius 2 at angle pi.
inline Embedding adr_embed(const AxisAngle& aa) {
  validate_axis_angle(aa);
  const double radius = aa.angle / std::numbers::pi + kInnerRadius;
  return radius * aa.axis;
}

inline AxisAngle adr_invert(const Embedding& o) {
  const double r = o.norm();
  if (r < kInnerRadius - kShellTolerance || r > kOuterRadius + kShellTolerance) {
    throw ConfigError("ADR inverse: norm " + std::to_string(r) + " outside the [1, 2] shell");
  }
  const double angle = std::clamp((r - kInnerRadius) * std::numbers::pi, 0.0, std::numbers::pi);
  return {o / r, angle};
}

inline std::vector<Embedding> adr_embed_all(const std::vector<AxisAngle>& samples) {
  std::vector<Embedding> out;
  out.reserve(samples.size());
  for (const auto& aa : samples) out.push_back(adr_embed(aa));
  return out;
}

/// Keeps samples 0, factor, 2*factor, ... without filtering.
inline EmbeddingSeries decimate(const EmbeddingSeries& series, int factor) {
  if (factor < 1) throw ConfigError("decimation factor must be >= 1, got " + std::to_string(factor));
  EmbeddingSeries out;
  out.source = series.source;
  out.sample_rate_hz = series.sample_rate_hz / factor;
  const auto step = static_cast<std::size_t>(factor);
  for (std::size_t i = 0; i < series.size(); i += step) {
    out.points.push_back(series.points[i]);
    out.timestamps.push_back(series.timestamps[i]);
  }
  return out;
}

}  // namespace kinematics
}  // namespace kids
