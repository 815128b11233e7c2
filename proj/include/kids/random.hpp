#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace kids {

/// Seeded generator with a fixed sampling algorithm.
///
/// The bit source is std::mt19937_64, whose output sequence is pinned by the
/// C++ standard. The standard distributions are implementation-defined, so the
/// transforms to uniform and normal variates are spelled out here: 53-bit
/// uniforms and the Marsaglia polar method. Two builds on different platforms
/// therefore draw the same sessions for the same seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer on [lo, hi], inclusive. Uses rejection, no modulo bias.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return lo + static_cast<std::int64_t>(engine_());
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    std::uint64_t draw = engine_();
    while (draw >= limit) draw = engine_();
    return lo + static_cast<std::int64_t>(draw % span);
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u = 0.0;
    double v = 0.0;
    double s = 0.0;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double factor = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * factor;
    has_spare_ = true;
    return u * factor;
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  Eigen::Vector3d normal3(double sd) {
    const double a = normal(0.0, sd);
    const double b = normal(0.0, sd);
    const double c = normal(0.0, sd);
    return {a, b, c};
  }

  /// Uniformly distributed direction on the unit sphere.
  Eigen::Vector3d unit_vector() {
    Eigen::Vector3d v;
    do {
      v = normal3(1.0);
    } while (v.norm() < 1e-12);
    return v.normalized();
  }

  /// Fisher-Yates with this generator's integers.
  template <typename Container>
  void shuffle(Container& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace kids
