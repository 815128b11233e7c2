#pragma once

// On-disk formats: orientation/embedding timeseries, ground-truth labels,
// segments, run-length traces and the posterior matrix.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "kids/bocpd.hpp"
#include "kids/errors.hpp"
#include "kids/io.hpp"
#include "kids/kinematics.hpp"
#include "kids/metrics.hpp"
#include "kids/segmentation.hpp"

namespace kids::formats {

enum class InputLayout { Quaternion, AxisAngle, Embedding };

inline const char* to_string(InputLayout layout) {
  switch (layout) {
    case InputLayout::Quaternion: return "quaternion";
    case InputLayout::AxisAngle: return "axis-angle";
    case InputLayout::Embedding: return "embedding";
  }
  return "?";
}

inline InputLayout detect_layout(const std::vector<std::string>& header, const std::string& where) {
  using H = std::vector<std::string>;
  if (header == H{"t", "qw", "qx", "qy", "qz"}) return InputLayout::Quaternion;
  if (header == H{"t", "x1", "x2", "x3", "x4"}) return InputLayout::AxisAngle;
  if (header == H{"t", "o1", "o2", "o3"}) return InputLayout::Embedding;
  std::string joined;
  for (const auto& h : header) joined += (joined.empty() ? "" : ",") + h;
  throw ParseError(where + ": unrecognized header '" + joined +
                   "' (expected t,qw,qx,qy,qz or t,x1,x2,x3,x4 or t,o1,o2,o3)");
}

struct LoadedSeries {
  EmbeddingSeries series;  // at the file's own rate, before decimation
  InputLayout layout = InputLayout::Embedding;
};

inline double estimate_rate(const std::vector<double>& t) {
  if (t.size() < 2) return 0.0;
  return static_cast<double>(t.size() - 1) / (t.back() - t.front());
}

/// Reads any of the three input layouts. Quaternion and axis-angle rows go
/// through ADR; embedding rows are taken as external and unconstrained.
inline LoadedSeries load_series(const std::filesystem::path& path) {
  const auto table = io::read_csv(path);
  LoadedSeries out;
  out.layout = detect_layout(table.header, path.string());
  if (table.rows.empty()) throw ParseError(path.string() + ": no data rows");
  auto& series = out.series;
  series.timestamps.reserve(table.rows.size());
  for (const auto& row : table.rows) series.timestamps.push_back(row[0]);
  auto row_error = [&](std::size_t i, const std::string& what) {
    return ParseError(path.string() + ": data row " + std::to_string(i + 1) + ": " + what);
  };
  switch (out.layout) {
    case InputLayout::Quaternion: {
      std::vector<Quaternion> qs;
      for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& r = table.rows[i];
        const Quaternion q{r[1], r[2], r[3], r[4]};
        if (!std::isfinite(q.norm()) || std::abs(q.norm() - 1.0) > 1e-6) {
          throw row_error(i, "quaternion is not unit length");
        }
        qs.push_back(q);
      }
      series.points = kinematics::adr_embed_all(kinematics::quaternions_to_axis_angles(qs));
      series.source = EmbeddingSource::Adr;
      break;
    }
    case InputLayout::AxisAngle: {
      for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& r = table.rows[i];
        AxisAngle aa{{r[1], r[2], r[3]}, r[4]};
        const double n = aa.axis.norm();
        if (std::abs(n - 1.0) > 1e-6) throw row_error(i, "axis is not unit length");
        aa.axis /= n;
        if (aa.angle < 0.0 || aa.angle > std::numbers::pi + 1e-9) throw row_error(i, "angle outside [0, pi]");
        aa.angle = std::clamp(aa.angle, 0.0, std::numbers::pi);
        series.points.push_back(kinematics::adr_embed(aa));
      }
      series.source = EmbeddingSource::Adr;
      break;
    }
    case InputLayout::Embedding: {
      for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& r = table.rows[i];
        const Embedding o{r[1], r[2], r[3]};
        if (!o.allFinite()) throw row_error(i, "non-finite embedding");
        series.points.push_back(o);
      }
      series.source = EmbeddingSource::External;
      break;
    }
  }
  try {
    series.validate();
  } catch (const ConfigError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  series.sample_rate_hz = estimate_rate(series.timestamps);
  return out;
}

inline std::vector<metrics::GroundTruthSegment> load_labels(const std::filesystem::path& path) {
  const auto table = io::read_csv(path);
  if (table.header != std::vector<std::string>{"segment_start", "segment_end"}) {
    throw ParseError(path.string() + ": expected header segment_start,segment_end");
  }
  std::vector<metrics::GroundTruthSegment> segments;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const double s = table.rows[i][0];
    const double e = table.rows[i][1];
    if (s < 0 || e <= s || s != std::floor(s) || e != std::floor(e)) {
      throw ParseError(path.string() + ": label row " + std::to_string(i + 1) + " is not an integer interval with end > start");
    }
    segments.push_back({static_cast<std::size_t>(s), static_cast<std::size_t>(e)});
  }
  return segments;
}

inline std::vector<segmentation::Segment> load_segments(const std::filesystem::path& path) {
  const auto table = io::read_csv(path);
  if (table.header != std::vector<std::string>{"changepoint_idx", "duration", "start_idx"}) {
    throw ParseError(path.string() + ": expected header changepoint_idx,duration,start_idx");
  }
  std::vector<segmentation::Segment> segments;
  for (const auto& r : table.rows) {
    if (r[0] < 0 || r[0] != std::floor(r[0])) throw ParseError(path.string() + ": changepoint_idx must be a non-negative integer");
    segments.push_back({static_cast<std::size_t>(r[0]), r[1], r[2]});
  }
  return segments;
}

inline std::string labels_csv(const std::vector<metrics::GroundTruthSegment>& segments) {
  std::string out = "segment_start,segment_end\n";
  for (const auto& s : segments) out += std::to_string(s.start) + "," + std::to_string(s.end) + "\n";
  return out;
}

inline std::string segments_csv(const std::vector<segmentation::Segment>& segments) {
  std::string out = "changepoint_idx,duration,start_idx\n";
  for (const auto& s : segments) {
    out += std::to_string(s.changepoint) + "," + io::format_double(s.duration) + "," + io::format_double(s.start) + "\n";
  }
  return out;
}

inline std::string trace_csv(const segmentation::RunLengthTrace& raw, const segmentation::RunLengthTrace& processed) {
  std::string out = "k,raw,postprocessed\n";
  for (std::size_t k = 0; k < raw.size(); ++k) {
    out += std::to_string(k) + "," + io::format_double(raw[k]) + "," + io::format_double(processed[k]) + "\n";
  }
  return out;
}

inline std::string embedding_csv(const EmbeddingSeries& series) {
  std::string out = "t,o1,o2,o3\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& p = series.points[i];
    out += io::format_double(series.timestamps[i]) + "," + io::format_double(p.x()) + "," +
           io::format_double(p.y()) + "," + io::format_double(p.z()) + "\n";
  }
  return out;
}

inline std::string axis_angle_csv(const std::vector<double>& timestamps, const std::vector<AxisAngle>& samples) {
  std::string out = "t,x1,x2,x3,x4\n";
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    out += io::format_double(timestamps[i]) + "," + io::format_double(s.axis.x()) + "," +
           io::format_double(s.axis.y()) + "," + io::format_double(s.axis.z()) + "," + io::format_double(s.angle) + "\n";
  }
  return out;
}

inline std::string quaternion_csv(const std::vector<double>& timestamps, const std::vector<AxisAngle>& samples) {
  std::string out = "t,qw,qx,qy,qz\n";
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto q = kinematics::axis_angle_to_quaternion(samples[i]);
    out += io::format_double(timestamps[i]) + "," + io::format_double(q.w) + "," + io::format_double(q.x) + "," +
           io::format_double(q.y) + "," + io::format_double(q.z) + "\n";
  }
  return out;
}

/// Dense posterior, rows = run length, columns = time step.
inline std::string posterior_csv(const bocpd::RunLengthPosterior& posterior) {
  const std::size_t n = posterior.steps() + 1;
  std::string out;
  for (std::size_t k = 0; k < n; ++k) out += (k ? ",k" : "k") + std::to_string(k);
  out += "\n";
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t k = 0; k < n; ++k) {
      if (k) out += ',';
      out += io::format_double(posterior.at(r, k));
    }
    out += "\n";
  }
  return out;
}

/// Binary graymap of the posterior, time along x and run length up the y axis
/// (zeta = 0 on the bottom row). Each time step is scaled by its own maximum
/// and drawn dark-on-light, so the most probable run length is black.
inline std::string posterior_pgm(const bocpd::RunLengthPosterior& posterior) {
  const std::size_t n = posterior.steps() + 1;
  std::vector<unsigned char> pixels(n * n, 255);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& column = posterior.column(k);
    double peak = 0.0;
    for (const auto& e : column) peak = std::max(peak, e.probability);
    if (peak <= 0.0) continue;
    for (const auto& e : column) {
      const std::size_t row = n - 1 - e.run_length;
      const double level = std::round(255.0 * (1.0 - e.probability / peak));
      pixels[row * n + k] = static_cast<unsigned char>(std::clamp(level, 0.0, 255.0));
    }
  }
  std::string out = "P5\n" + std::to_string(n) + " " + std::to_string(n) + "\n255\n";
  out.append(reinterpret_cast<const char*>(pixels.data()), pixels.size());
  return out;
}

}  // namespace kids::formats
