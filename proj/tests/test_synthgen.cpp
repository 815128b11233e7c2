#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>

#include <Eigen/Geometry>

#include "kids/random.hpp"
#include "kids/synthgen.hpp"

using namespace kids;
using namespace kids::synthgen;
using Eigen::Vector3d;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "kids_test_synthgen";
  std::filesystem::create_directories(dir);
  return dir / name;
}

// Random point on the cube surface: pick a face, then uniform in-plane.
Vector3d random_surface_point(Rng& rng) {
  const auto face = kFaceOrder[static_cast<std::size_t>(rng.uniform_int(0, 5))];
  const auto [u, v] = face_tangents(face);
  return face_normal(face) + rng.uniform(-1.0, 1.0) * u + rng.uniform(-1.0, 1.0) * v;
}

double min_angular_distance(const std::vector<Vector3d>& points) {
  double best = std::numbers::pi;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      best = std::min(best, std::acos(std::clamp(points[i].dot(points[j]), -1.0, 1.0)));
    }
  }
  return best;
}

}  // namespace

TEST(FaceGrid, CornerOnlyGrid) {
  const auto grid = build_face_grid({Face::PosX, 2});
  ASSERT_EQ(grid.size(), 4u);
  std::set<std::pair<double, double>> yz;
  for (const auto& v : grid) {
    EXPECT_EQ(v.position.x(), 1.0);
    yz.insert({v.position.y(), v.position.z()});
  }
  EXPECT_EQ(yz, (std::set<std::pair<double, double>>{{-1, -1}, {-1, 1}, {1, -1}, {1, 1}}));
}

TEST(FaceGrid, CountAndSpacing) {
  for (Face f : kFaceOrder) {
    const auto grid = build_face_grid({f, 15});
    ASSERT_EQ(grid.size(), 225u);
    std::set<std::size_t> ids;
    for (const auto& v : grid) ids.insert(v.index);
    EXPECT_EQ(ids.size(), 225u);
    // Neighbours along a row differ by exactly 2/(n-1) in one coordinate.
    for (int row = 0; row < 15; ++row) {
      for (int col = 0; col + 1 < 15; ++col) {
        const auto d = grid[row * 15 + col + 1].position - grid[row * 15 + col].position;
        EXPECT_NEAR(d.norm(), 2.0 / 14.0, 1e-15);
      }
    }
    for (int row = 0; row + 1 < 15; ++row) {
      const auto d = grid[(row + 1) * 15].position - grid[row * 15].position;
      EXPECT_NEAR(d.norm(), 2.0 / 14.0, 1e-15);
    }
  }
}

TEST(FaceGrid, CentreVertex) {
  const auto grid = build_face_grid({Face::PosZ, 3});
  bool found = false;
  for (const auto& v : grid) found = found || v.position == Vector3d(0, 0, 1);
  EXPECT_TRUE(found);
}

TEST(FaceGrid, FixedCoordinateMatchesFace) {
  for (Face f : kFaceOrder) {
    const Vector3d n = face_normal(f);
    for (const auto& v : build_face_grid({f, 7})) {
      EXPECT_EQ(v.face, f);
      EXPECT_EQ(v.position.dot(n), 1.0);
      int on_boundary = 0;
      for (int c = 0; c < 3; ++c) on_boundary += std::abs(v.position[c]) == 1.0;
      EXPECT_GE(on_boundary, 1);
      EXPECT_LE(v.position.cwiseAbs().maxCoeff(), 1.0);
    }
  }
}

TEST(FaceGrid, TangentsAreRightHanded) {
  for (Face f : kFaceOrder) {
    const auto [u, v] = face_tangents(f);
    EXPECT_EQ(u.cross(v), face_normal(f)) << face_name(f);
  }
}

TEST(FaceGrid, RejectsLowResolution) {
  EXPECT_THROW(build_face_grid({Face::PosX, 1}), ConfigError);
  EXPECT_THROW(build_face_grid({Face::PosX, 0}), ConfigError);
  EXPECT_THROW(build_cube_mesh(1), ConfigError);
}

TEST(CubeMesh, Counts) {
  EXPECT_EQ(build_cube_mesh(15).size(), 1350u);
  EXPECT_EQ(build_cube_mesh(3).size(), 54u);
  const auto corners = build_cube_mesh(2);
  ASSERT_EQ(corners.size(), 24u);
  std::vector<Vector3d> positions;
  for (const auto& v : corners) positions.push_back(v.position);
  const auto unique = dedupe(positions);
  EXPECT_EQ(unique.size(), 8u);
  for (const auto& u : unique) {
    int copies = 0;
    for (const auto& p : positions) copies += p == u;
    EXPECT_EQ(copies, 3);
  }
}

TEST(CubeMesh, FaceOrder) {
  const auto mesh = build_cube_mesh(4);
  for (std::size_t f = 0; f < 6; ++f) {
    for (std::size_t i = 0; i < 16; ++i) EXPECT_EQ(mesh[f * 16 + i].face, kFaceOrder[f]);
  }
}

TEST(EuclideanProjection, Examples) {
  EXPECT_EQ(project_euclidean({1, 0, 0}), Vector3d(1, 0, 0));
  const double s = 1.0 / std::sqrt(3.0);
  EXPECT_TRUE(project_euclidean({1, 1, 1}).isApprox(Vector3d(s, s, s), 1e-15));
  const Vector3d p = project_euclidean({1, 0.5, 0});
  EXPECT_NEAR(p.x(), 0.894427190999916, 1e-12);
  EXPECT_NEAR(p.y(), 0.447213595499958, 1e-12);
  EXPECT_EQ(p.z(), 0.0);
  EXPECT_THROW(project_euclidean({0, 0, 0}), ConfigError);
}

TEST(EllipsoidalProjection, Examples) {
  EXPECT_EQ(project_ellipsoidal({1, 0, 0}), Vector3d(1, 0, 0));
  const double s = std::sqrt(1.0 / 3.0);
  const Vector3d corner = project_ellipsoidal({1, 1, 1});
  for (int c = 0; c < 3; ++c) EXPECT_NEAR(corner[c], s, 1e-12);
  const Vector3d edge = project_ellipsoidal({1, 1, 0});
  EXPECT_NEAR(edge.x(), std::sqrt(0.5), 1e-12);
  EXPECT_NEAR(edge.y(), std::sqrt(0.5), 1e-12);
  EXPECT_EQ(edge.z(), 0.0);
}

TEST(EllipsoidalProjection, RejectsInteriorPoints) {
  EXPECT_THROW(project_ellipsoidal({0.5, 0.2, 0.1}), ConfigError);
  EXPECT_THROW(project_ellipsoidal({0, 0, 0}), ConfigError);
  EXPECT_THROW(project_ellipsoidal({1 - 1e-6, 0, 0}), ConfigError);
  EXPECT_NO_THROW(project_ellipsoidal({1 - 1e-10, 0.3, 0}));
}

TEST(EllipsoidalProjection, UnitNormOnMeshAndRandomSurface) {
  double worst = 0.0;
  for (const auto& v : build_cube_mesh(15)) worst = std::max(worst, std::abs(project_ellipsoidal(v.position).norm() - 1.0));
  Rng rng(2024);
  for (int i = 0; i < 100000; ++i) {
    worst = std::max(worst, std::abs(project_ellipsoidal(random_surface_point(rng)).norm() - 1.0));
  }
  EXPECT_LT(worst, 1e-12);
}

TEST(EllipsoidalProjection, AgreesWithEuclideanAtCentresAndCorners) {
  for (Face f : kFaceOrder) {
    const Vector3d c = face_normal(f);
    EXPECT_TRUE(project_ellipsoidal(c).isApprox(project_euclidean(c), 1e-15));
  }
  for (int sx : {-1, 1}) {
    for (int sy : {-1, 1}) {
      for (int sz : {-1, 1}) {
        const Vector3d c(sx, sy, sz);
        EXPECT_LT((project_ellipsoidal(c) - project_euclidean(c)).cwiseAbs().maxCoeff(), 1e-12);
      }
    }
  }
}

TEST(EllipsoidalProjection, PermutationAndSignEquivariance) {
  Rng rng(11);
  const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  for (int i = 0; i < 2000; ++i) {
    const Vector3d p = random_surface_point(rng);
    const Vector3d e = project_ellipsoidal(p);
    for (const auto& perm : perms) {
      Vector3d signs(rng.uniform() < 0.5 ? -1 : 1, rng.uniform() < 0.5 ? -1 : 1, rng.uniform() < 0.5 ? -1 : 1);
      Vector3d q;
      Vector3d expected;
      for (int c = 0; c < 3; ++c) {
        q[c] = signs[c] * p[perm[c]];
        expected[c] = signs[c] * e[perm[c]];
      }
      EXPECT_LT((project_ellipsoidal(q) - expected).cwiseAbs().maxCoeff(), 1e-15);
    }
  }
}

TEST(EllipsoidalProjection, SpreadsPointsMoreEvenlyThanEuclidean) {
  const auto mesh = build_cube_mesh(15);
  const auto ell = dedupe(project_mesh(mesh, Projection::Ellipsoidal));
  const auto euc = dedupe(project_mesh(mesh, Projection::Euclidean));
  EXPECT_EQ(ell.size(), euc.size());
  EXPECT_EQ(ell.size(), 6u * 13u * 13u + 12u * 13u + 8u);
  EXPECT_GT(min_angular_distance(ell), min_angular_distance(euc));
}

TEST(AngleSet, Examples) {
  const auto a36 = generate_angle_set(36);
  ASSERT_EQ(a36.size(), 36u);
  EXPECT_DOUBLE_EQ(a36.front(), std::numbers::pi);
  EXPECT_DOUBLE_EQ(a36.back(), std::numbers::pi / 36);
  for (std::size_t i = 1; i < a36.size(); ++i) EXPECT_LT(a36[i], a36[i - 1]);
  EXPECT_EQ(generate_angle_set(1), std::vector<double>{std::numbers::pi});
  const auto a2 = generate_angle_set(2);
  ASSERT_EQ(a2.size(), 2u);
  EXPECT_DOUBLE_EQ(a2[0], std::numbers::pi);
  EXPECT_DOUBLE_EQ(a2[1], std::numbers::pi / 2);
  EXPECT_THROW(generate_angle_set(0), ConfigError);
}

TEST(SyntheticDataset, CartesianProduct) {
  const auto axes = project_mesh(build_cube_mesh(15));
  const auto angles = generate_angle_set(36);
  const auto ds = generate_synthetic_dataset(axes, angles);
  EXPECT_EQ(ds.rows.size(), 48600u);
  EXPECT_EQ(ds.axis_count, 1350u);
  EXPECT_EQ(ds.angle_count, 36u);
  const std::set<double> allowed(angles.begin(), angles.end());
  for (const auto& r : ds.rows) {
    EXPECT_TRUE(allowed.count(r.angle));
    EXPECT_NEAR(r.axis.norm(), 1.0, 1e-12);
  }
  EXPECT_EQ(generate_synthetic_dataset({Vector3d(0, 0, 1)}, {1.0}).rows.size(), 1u);
  EXPECT_EQ(generate_synthetic_dataset({Vector3d(0, 0, 1), Vector3d(1, 0, 0)}, {1.0, 2.0, 3.0}).rows.size(), 6u);
  EXPECT_THROW(generate_synthetic_dataset({}, angles), ConfigError);
  EXPECT_THROW(generate_synthetic_dataset(axes, {}), ConfigError);
}

TEST(SyntheticDataset, ExportCsv) {
  const auto ds = generate_synthetic_dataset(project_mesh(build_cube_mesh(15)), generate_angle_set(36));
  const auto path = scratch("full.csv");
  EXPECT_EQ(export_dataset_csv(ds, path), 48600u);
  const auto text = slurp(path);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 48601);
  EXPECT_EQ(text.substr(0, text.find('\n')), "a1,a2,a3,angle_rad");
  // Values read back bit-exactly.
  std::istringstream lines(text);
  std::string line;
  std::getline(lines, line);
  std::getline(lines, line);
  EXPECT_EQ(std::stod(line.substr(line.rfind(',') + 1)), ds.rows[0].angle);
}

TEST(SyntheticDataset, ExportIsDeterministic) {
  const auto ds = generate_synthetic_dataset({project_ellipsoidal({1, 0.3, -0.7})}, {std::numbers::pi / 7});
  const auto a = scratch("one_a.csv");
  const auto b = scratch("one_b.csv");
  export_dataset_csv(ds, a);
  export_dataset_csv(ds, b);
  const auto text = slurp(a);
  EXPECT_EQ(text, slurp(b));
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
}

TEST(SyntheticDataset, EmptyPathIsAnError) {
  const auto ds = generate_synthetic_dataset({Vector3d(0, 0, 1)}, {1.0});
  EXPECT_THROW(export_dataset_csv(ds, ""), IoError);
  EXPECT_THROW(export_dataset_csv(ds, "/nonexistent_dir_kids/x.csv"), IoError);
}
