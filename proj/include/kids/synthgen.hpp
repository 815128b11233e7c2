#pragma once

// Procedural unit cube -> unit sphere mapping and the synthetic axis-angle
// dataset built on top of it.

#include <array>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "kids/errors.hpp"
#include "kids/io.hpp"

namespace kids::synthgen {

enum class Face { PosX, NegX, PosY, NegY, PosZ, NegZ };

inline constexpr std::array<Face, 6> kFaceOrder = {Face::PosX, Face::NegX, Face::PosY,
                                                   Face::NegY, Face::PosZ, Face::NegZ};

inline Eigen::Vector3d face_normal(Face face) {
  switch (face) {
    case Face::PosX: return {1, 0, 0};
    case Face::NegX: return {-1, 0, 0};
    case Face::PosY: return {0, 1, 0};
    case Face::NegY: return {0, -1, 0};
    case Face::PosZ: return {0, 0, 1};
    case Face::NegZ: return {0, 0, -1};
  }
  return {0, 0, 0};
}

/// In-plane basis (u, v) of a face with u x v == normal.
inline std::array<Eigen::Vector3d, 2> face_tangents(Face face) {
  const Eigen::Vector3d x{1, 0, 0};
  const Eigen::Vector3d y{0, 1, 0};
  const Eigen::Vector3d z{0, 0, 1};
  switch (face) {
    case Face::PosX: return {y, z};
    case Face::NegX: return {z, y};
    case Face::PosY: return {z, x};
    case Face::NegY: return {x, z};
    case Face::PosZ: return {x, y};
    case Face::NegZ: return {y, x};
  }
  return {x, y};
}

inline const char* face_name(Face face) {
  static constexpr std::array<const char*, 6> names = {"+x", "-x", "+y", "-y", "+z", "-z"};
  return names[static_cast<std::size_t>(face)];
}

struct FaceSpec {
  Face face = Face::PosX;
  int resolution = 2;  // vertices per side
};

struct CubeVertex {
  Eigen::Vector3d position;
  Face face = Face::PosX;
  std::size_t index = 0;  // row-major index within its face
};

/// Regular resolution x resolution grid spanning [-1, 1]^2 on the face plane.
/// Vertex (i, j) sits at normal + a_i * u + b_j * v with
/// a_i = -1 + 2i/(resolution-1); rows advance along v.
inline std::vector<CubeVertex> build_face_grid(const FaceSpec& spec) {
  if (spec.resolution < 2) {
    throw ConfigError("face grid resolution must be >= 2, got " + std::to_string(spec.resolution));
  }
  const int n = spec.resolution;
  const Eigen::Vector3d normal = face_normal(spec.face);
  const auto [u, v] = face_tangents(spec.face);
  std::vector<CubeVertex> grid;
  grid.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
  for (int row = 0; row < n; ++row) {
    const double b = -1.0 + 2.0 * row / (n - 1);
    for (int col = 0; col < n; ++col) {
      const double a = -1.0 + 2.0 * col / (n - 1);
      grid.push_back({normal + a * u + b * v, spec.face, grid.size()});
    }
  }
  return grid;
}

/// All six face grids in +x, -x, +y, -y, +z, -z order. Edge and corner vertices
/// appear once per face that owns them (6 * resolution^2 total).
inline std::vector<CubeVertex> build_cube_mesh(int resolution) {
  std::vector<CubeVertex> mesh;
  for (Face face : kFaceOrder) {
    auto grid = build_face_grid({face, resolution});
    mesh.insert(mesh.end(), grid.begin(), grid.end());
  }
  return mesh;
}

/// Radial (Euclidean norm) projection. Clusters vertices near the cube corners.
inline Eigen::Vector3d project_euclidean(const Eigen::Vector3d& v) {
  const double norm = v.norm();
  if (norm == 0.0) throw ConfigError("cannot project the zero vector onto the sphere");
  return v / norm;
}

inline constexpr double kSurfaceTolerance = 1e-9;

inline bool on_cube_surface(const Eigen::Vector3d& v, double tol = kSurfaceTolerance) {
  if (v.cwiseAbs().maxCoeff() > 1.0 + tol) return false;
  return std::abs(std::abs(v.x()) - 1.0) <= tol || std::abs(std::abs(v.y()) - 1.0) <= tol ||
         std::abs(std::abs(v.z()) - 1.0) <= tol;
}

/// Ellipsoidal projection of a cube-surface point onto the unit sphere:
///   x_e = x sqrt(1 - y^2/2 - z^2/2 + y^2 z^2/3)   (and cyclically)
/// Face centres are fixed points; the result is exactly unit length whenever
/// one coordinate is +-1.
inline Eigen::Vector3d project_ellipsoidal(const Eigen::Vector3d& v) {
  if (!on_cube_surface(v)) {
    throw ConfigError("ellipsoidal projection requires a point on the cube surface");
  }
  const double x2 = v.x() * v.x();
  const double y2 = v.y() * v.y();
  const double z2 = v.z() * v.z();
  return {v.x() * std::sqrt(1.0 - 0.5 * y2 - 0.5 * z2 + y2 * z2 / 3.0),
          v.y() * std::sqrt(1.0 - 0.5 * x2 - 0.5 * z2 + x2 * z2 / 3.0),
          v.z() * std::sqrt(1.0 - 0.5 * x2 - 0.5 * y2 + x2 * y2 / 3.0)};
}

enum class Projection { Ellipsoidal, Euclidean };

inline std::vector<Eigen::Vector3d> project_mesh(const std::vector<CubeVertex>& mesh,
                                                 Projection projection = Projection::Ellipsoidal) {
  std::vector<Eigen::Vector3d> axes;
  axes.reserve(mesh.size());
  for (const auto& vertex : mesh) {
    axes.push_back(projection == Projection::Ellipsoidal ? project_ellipsoidal(vertex.position)
                                                         : project_euclidean(vertex.position));
  }
  return axes;
}

/// Drops points within `tol` (max-abs distance) of an earlier point. Only used
/// for uniformity analysis; the dataset keeps duplicates.
inline std::vector<Eigen::Vector3d> dedupe(const std::vector<Eigen::Vector3d>& points,
                                           double tol = 1e-9) {
  std::vector<Eigen::Vector3d> unique;
  for (const auto& p : points) {
    bool seen = false;
    for (const auto& q : unique) {
      if ((p - q).cwiseAbs().maxCoeff() <= tol) {
        seen = true;
        break;
      }
    }
    if (!seen) unique.push_back(p);
  }
  return unique;
}

/// {k*pi/n : k = n, n-1, ..., 1}
inline std::vector<double> generate_angle_set(int n) {
  if (n < 1) throw ConfigError("angle count must be >= 1, got " + std::to_string(n));
  std::vector<double> angles;
  angles.reserve(static_cast<std::size_t>(n));
  for (int k = n; k >= 1; --k) angles.push_back(k * std::numbers::pi / n);
  return angles;
}

struct OrientationRow {
  Eigen::Vector3d axis;
  double angle = 0.0;
};

struct SyntheticOrientationDataset {
  std::vector<OrientationRow> rows;
  std::size_t axis_count = 0;
  std::size_t angle_count = 0;
};

/// Every axis paired with every angle, axis-major.
inline SyntheticOrientationDataset generate_synthetic_dataset(const std::vector<Eigen::Vector3d>& axes,
                                                              const std::vector<double>& angles) {
  if (axes.empty() || angles.empty()) {
    throw ConfigError("synthetic dataset needs at least one axis and one angle");
  }
  SyntheticOrientationDataset dataset;
  dataset.axis_count = axes.size();
  dataset.angle_count = angles.size();
  dataset.rows.reserve(axes.size() * angles.size());
  for (const auto& axis : axes) {
    for (double angle : angles) dataset.rows.push_back({axis, angle});
  }
  return dataset;
}

inline std::string dataset_csv(const SyntheticOrientationDataset& dataset) {
  std::string out = "a1,a2,a3,angle_rad\n";
  out.reserve(dataset.rows.size() * 80);
  for (const auto& row : dataset.rows) {
    out += io::format_double(row.axis.x());
    out += ',';
    out += io::format_double(row.axis.y());
    out += ',';
    out += io::format_double(row.axis.z());
    out += ',';
    out += io::format_double(row.angle);
    out += '\n';
  }
  return out;
}

/// Writes `a1,a2,a3,angle_rad` plus one row per orientation; returns the
/// number of data rows.
inline std::size_t export_dataset_csv(const SyntheticOrientationDataset& dataset,
                                      const std::filesystem::path& destination) {
  if (destination.empty()) throw IoError("synthetic dataset export: empty destination path");
  io::write_file_atomic(destination, dataset_csv(dataset));
  return dataset.rows.size();
}

}  // namespace kids::synthgen
