#pragma once

#include "eigencascade/common.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace eigencascade {

/// Finite dataset in R^dim. Row i holds the coordinates of the point with id i.
class PointCloud {
 public:
  using Storage = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  PointCloud() = default;

  explicit PointCloud(Storage coords) : coords_(std::move(coords)) {
    detail::require(coords_.size() == 0 || coords_.cols() > 0, "point cloud: dimension must be positive");
    detail::require(coords_.allFinite(), "point cloud: coordinates must be finite");
  }

  PointCloud(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return;
    const auto dim = static_cast<Index>(rows.front().size());
    detail::require(dim > 0, "point cloud: dimension must be positive");
    coords_.resize(static_cast<Index>(rows.size()), dim);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      detail::require(static_cast<Index>(rows[i].size()) == dim,
                      "point cloud: row " + std::to_string(i) + " has mismatched dimension");
      for (Index c = 0; c < dim; ++c) coords_(static_cast<Index>(i), c) = rows[i][static_cast<std::size_t>(c)];
    }
    detail::require(coords_.allFinite(), "point cloud: coordinates must be finite");
  }

  Index size() const { return coords_.rows(); }
  Index dim() const { return coords_.cols(); }
  bool empty() const { return coords_.rows() == 0; }

  std::span<const double> point(Index id) const {
    return {coords_.data() + id * coords_.cols(), static_cast<std::size_t>(coords_.cols())};
  }

  const Storage& coords() const { return coords_; }

  PointCloud scaled(double factor) const {
    detail::require(factor > 0.0 && std::isfinite(factor), "prescale factor must be positive");
    return PointCloud(Storage(coords_ * factor));
  }

  PointCloud subset(std::span<const int> ids) const {
    Storage out(static_cast<Index>(ids.size()), dim());
    for (std::size_t r = 0; r < ids.size(); ++r) out.row(static_cast<Index>(r)) = coords_.row(ids[r]);
    return PointCloud(std::move(out));
  }

 private:
  Storage coords_;
};

inline double distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InputError("distance: dimension mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return std::sqrt(s);
}

inline double distance(const PointCloud& X, Index a, Index b) { return distance(X.point(a), X.point(b)); }

/// K(r) = max(1 - r, 0).
inline double hat_profile(double r) { return std::max(1.0 - r, 0.0); }

/// Compactly supported radial kernel k_h(a, b) = K(d(a, b) / h).
struct RadialKernel {
  std::function<double(double)> profile = hat_profile;
  double bandwidth = 1.0;

  /// Kernel value at distance `d`; zero outside the support d >= h.
  double at_distance(double d) const {
    if (!(bandwidth > 0.0)) throw InputError("kernel bandwidth must be positive");
    if (d >= bandwidth) return 0.0;
    return profile(d / bandwidth);
  }
};

inline double kernel_eval(const RadialKernel& k, std::span<const double> a, std::span<const double> b) {
  if (!(k.bandwidth > 0.0)) throw InputError("kernel bandwidth must be positive");
  return k.at_distance(distance(a, b));
}

// ---------------------------------------------------------------------------
// Synthetic datasets

struct DatasetSpec {
  std::string name = "cantor";
  // cantor: iteration depth and samples per square side (grid*grid points per square)
  int depth = 7;
  int grid = 1;
  // pin: lattice subdivisions along each triangle edge
  int resolution = 40;
  // sphere: rings per annulus, samples per ring, inner angular radius in degrees
  int radial = 8;
  int angular = 60;
  double inner_angle_deg = 20.0;
  // uniform: count and dimension
  int n = 1000;
  int dim = 2;
  // y: sample spacing along each segment
  double spacing = 0.02;
  // flares: lattice spacing of the central disk, points and spacing growth per arm
  double center_spacing = 0.025;
  std::vector<int> arm_points = {40, 40, 40, 40};
  std::vector<double> arm_growth = {1.02, 1.03, 1.04, 1.05};
  std::uint64_t seed = 0;
  // csv
  std::string path;
};

namespace detail {

inline PointCloud from_points(const std::vector<std::array<double, 3>>& pts, Index dim) {
  PointCloud::Storage s(static_cast<Index>(pts.size()), dim);
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (Index c = 0; c < dim; ++c) s(static_cast<Index>(i), c) = pts[i][static_cast<std::size_t>(c)];
  return PointCloud(std::move(s));
}

// Keeps the first occurrence of points closer than `tol` to an earlier point.
inline std::vector<std::array<double, 3>> drop_near_duplicates(const std::vector<std::array<double, 3>>& pts,
                                                              double tol) {
  std::vector<std::array<double, 3>> out;
  out.reserve(pts.size());
  for (const auto& p : pts) {
    bool dup = false;
    for (const auto& q : out) {
      const double d = std::hypot(p[0] - q[0], p[1] - q[1], p[2] - q[2]);
      if (d < tol) {
        dup = true;
        break;
      }
    }
    if (!dup) out.push_back(p);
  }
  return out;
}

}  // namespace detail

/// Cantor square at iteration `depth`: 4^depth squares of side 3^-depth, each
/// sampled on a grid x grid lattice of cell centers.
inline PointCloud cantor_square(int depth, int grid) {
  detail::require(depth >= 0, "cantor: depth must be >= 0");
  detail::require(grid >= 1, "cantor: grid must be >= 1");
  std::vector<std::array<double, 2>> corners{{0.0, 0.0}};
  double side = 1.0;
  for (int k = 0; k < depth; ++k) {
    const double step = 2.0 * side / 3.0;
    std::vector<std::array<double, 2>> next;
    next.reserve(corners.size() * 4);
    for (const auto& c : corners)
      for (int qy = 0; qy < 2; ++qy)
        for (int qx = 0; qx < 2; ++qx) next.push_back({c[0] + qx * step, c[1] + qy * step});
    corners = std::move(next);
    side /= 3.0;
  }
  const Index per = static_cast<Index>(grid) * grid;
  PointCloud::Storage s(static_cast<Index>(corners.size()) * per, 2);
  Index row = 0;
  for (const auto& c : corners)
    for (int gy = 0; gy < grid; ++gy)
      for (int gx = 0; gx < grid; ++gx) {
        s(row, 0) = c[0] + (gx + 0.5) * side / grid;
        s(row, 1) = c[1] + (gy + 0.5) * side / grid;
        ++row;
      }
  return PointCloud(std::move(s));
}

/// Which iteration-`level` Cantor block each point of `cantor_square(depth, grid)`
/// belongs to (0 .. 4^level - 1). Points are emitted block-contiguously.
inline std::vector<int> cantor_block_labels(int depth, int grid, int level) {
  detail::require(level >= 0 && level <= depth, "cantor labels: level out of range");
  const long per_square = static_cast<long>(grid) * grid;
  long squares = 1;
  for (int k = 0; k < depth; ++k) squares *= 4;
  long squares_per_block = 1;
  for (int k = level; k < depth; ++k) squares_per_block *= 4;
  std::vector<int> labels(static_cast<std::size_t>(squares * per_square));
  for (std::size_t i = 0; i < labels.size(); ++i)
    labels[i] = static_cast<int>(static_cast<long>(i) / per_square / squares_per_block);
  return labels;
}

/// Three lattice-sampled triangles arranged as a pinwheel, invariant under
/// rotation by 120 degrees about the origin. The shared apex (origin) is point 0.
inline PointCloud pinwheel(int resolution) {
  detail::require(resolution >= 1, "pin: resolution must be >= 1");
  const std::array<double, 2> b{1.0, 0.0};
  const std::array<double, 2> c{0.8, 0.5};
  std::vector<std::array<double, 2>> base;
  for (int a = 0; a <= resolution; ++a)
    for (int bb = 0; a + bb <= resolution; ++bb) {
      if (a == 0 && bb == 0) continue;
      const double s = static_cast<double>(a) / resolution;
      const double t = static_cast<double>(bb) / resolution;
      base.push_back({s * b[0] + t * c[0], s * b[1] + t * c[1]});
    }
  PointCloud::Storage out(static_cast<Index>(3 * base.size() + 1), 2);
  out.row(0).setZero();
  Index row = 1;
  for (int r = 0; r < 3; ++r) {
    const double th = 2.0 * std::numbers::pi * r / 3.0;
    const double cs = std::cos(th), sn = std::sin(th);
    for (const auto& p : base) {
      out(row, 0) = cs * p[0] - sn * p[1];
      out(row, 1) = sn * p[0] + cs * p[1];
      ++row;
    }
  }
  return PointCloud(std::move(out));
}

/// Six annuli on the unit sphere centred on the cube-face axes, each spanning
/// angular radii [inner, 45] degrees so neighbouring annuli touch tangentially.
inline PointCloud sphere_annuli(int radial, int angular, double inner_angle_deg) {
  detail::require(radial >= 2, "sphere: radial must be >= 2");
  detail::require(angular >= 4 && angular % 4 == 0, "sphere: angular must be a positive multiple of 4");
  detail::require(inner_angle_deg >= 0.0 && inner_angle_deg < 45.0, "sphere: inner angle must lie in [0, 45)");
  using V3 = std::array<double, 3>;
  const std::array<std::array<V3, 3>, 6> frames{{
      {V3{1, 0, 0}, V3{0, 1, 0}, V3{0, 0, 1}},
      {V3{-1, 0, 0}, V3{0, 1, 0}, V3{0, 0, 1}},
      {V3{0, 1, 0}, V3{0, 0, 1}, V3{1, 0, 0}},
      {V3{0, -1, 0}, V3{0, 0, 1}, V3{1, 0, 0}},
      {V3{0, 0, 1}, V3{1, 0, 0}, V3{0, 1, 0}},
      {V3{0, 0, -1}, V3{1, 0, 0}, V3{0, 1, 0}},
  }};
  const double deg = std::numbers::pi / 180.0;
  std::vector<V3> pts;
  for (const auto& f : frames)
    for (int r = 0; r < radial; ++r) {
      const double th = (inner_angle_deg + (45.0 - inner_angle_deg) * r / (radial - 1)) * deg;
      for (int k = 0; k < angular; ++k) {
        const double ph = 2.0 * std::numbers::pi * k / angular;
        V3 p{};
        for (int c = 0; c < 3; ++c)
          p[c] = std::cos(th) * f[0][c] + std::sin(th) * (std::cos(ph) * f[1][c] + std::sin(ph) * f[2][c]);
        pts.push_back(p);
      }
    }
  return detail::from_points(detail::drop_near_duplicates(pts, 1e-9), 3);
}

inline PointCloud uniform_cube(int n, int dim, std::uint64_t seed) {
  detail::require(n >= 1, "uniform: n must be >= 1");
  detail::require(dim >= 1, "uniform: dim must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  PointCloud::Storage s(n, dim);
  for (Index i = 0; i < n; ++i)
    for (Index c = 0; c < dim; ++c) s(i, c) = U(rng);
  return PointCloud(std::move(s));
}

/// Planar "Y": a vertical stem from (0,-1) to the junction (0,-0.25) and two
/// arms from the junction to (-1,1) and (1,1), sampled at `spacing`.
inline PointCloud y_shape(double spacing) {
  detail::require(spacing > 0.0 && spacing < 0.5, "y: spacing must lie in (0, 0.5)");
  std::vector<std::array<double, 3>> pts;
  const std::array<double, 2> junction{0.0, -0.25};
  auto segment = [&](std::array<double, 2> from, std::array<double, 2> to) {
    const double len = std::hypot(to[0] - from[0], to[1] - from[1]);
    const int steps = static_cast<int>(std::ceil(len / spacing));
    for (int s = 1; s <= steps; ++s) {
      const double t = static_cast<double>(s) / steps;
      pts.push_back({from[0] + t * (to[0] - from[0]), from[1] + t * (to[1] - from[1]), 0.0});
    }
  };
  pts.push_back({junction[0], junction[1], 0.0});
  segment(junction, {0.0, -1.0});
  segment(junction, {-1.0, 1.0});
  segment(junction, {1.0, 1.0});
  return detail::from_points(pts, 2);
}

/// Square-lattice disk of radius 1/4 at the origin with four arms along the
/// axes. Arm a starts one lattice step outside the disk and its sample spacing
/// grows by the factor arm_growth[a] per point, so density decays toward each
/// tip at a different rate. Labels: 0 = disk, 1..4 = arm.
inline PointCloud four_flares(double center_spacing, const std::vector<int>& arm_points,
                              const std::vector<double>& arm_growth, std::vector<int>* labels = nullptr) {
  detail::require(center_spacing > 0.0 && center_spacing < 0.25, "flares: center_spacing must lie in (0, 0.25)");
  detail::require(arm_points.size() == 4 && arm_growth.size() == 4, "flares: exactly four arms are required");
  for (int a : arm_points) detail::require(a >= 2, "flares: each arm needs >= 2 points");
  for (double g : arm_growth) detail::require(g >= 1.0 && g < 2.0, "flares: arm growth must lie in [1, 2)");
  constexpr double radius = 0.25;
  std::vector<std::array<double, 3>> pts;
  std::vector<int> lab;
  const int K = static_cast<int>(radius / center_spacing) + 1;
  for (int i = -K; i <= K; ++i)
    for (int j = -K; j <= K; ++j) {
      const double x = i * center_spacing, y = j * center_spacing;
      if (x * x + y * y <= radius * radius + 1e-12) {
        pts.push_back({x, y, 0.0});
        lab.push_back(0);
      }
    }
  const std::array<std::array<double, 2>, 4> dirs{{{1, 0}, {0, 1}, {-1, 0}, {0, -1}}};
  for (std::size_t a = 0; a < 4; ++a) {
    double r = radius + center_spacing;
    double step = center_spacing;
    for (int k = 0; k < arm_points[a]; ++k) {
      pts.push_back({r * dirs[a][0], r * dirs[a][1], 0.0});
      lab.push_back(static_cast<int>(a) + 1);
      r += step;
      step *= arm_growth[a];
    }
  }
  if (labels) *labels = std::move(lab);
  return detail::from_points(pts, 2);
}

// ---------------------------------------------------------------------------
// CSV: one point per row, decimal floats, no header; row index = id.

inline void write_csv(const PointCloud& X, std::ostream& os) {
  char buf[64];
  for (Index i = 0; i < X.size(); ++i) {
    for (Index c = 0; c < X.dim(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", X.coords()(i, c));
      if (c) os << ',';
      os << buf;
    }
    os << '\n';
  }
}

inline PointCloud read_csv(std::istream& is) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line == "\r") continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        throw InputError("csv: cannot parse '" + cell + "' on row " + std::to_string(rows.size()));
      }
    }
    rows.push_back(std::move(row));
  }
  return PointCloud(rows);
}

inline PointCloud read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open point cloud file: " + path);
  return read_csv(in);
}

inline PointCloud generate_dataset(const DatasetSpec& spec) {
  if (spec.name == "cantor") return cantor_square(spec.depth, spec.grid);
  if (spec.name == "pin") return pinwheel(spec.resolution);
  if (spec.name == "sphere") return sphere_annuli(spec.radial, spec.angular, spec.inner_angle_deg);
  if (spec.name == "uniform") return uniform_cube(spec.n, spec.dim, spec.seed);
  if (spec.name == "y") return y_shape(spec.spacing);
  if (spec.name == "flares") return four_flares(spec.center_spacing, spec.arm_points, spec.arm_growth);
  if (spec.name == "csv") return read_csv_file(spec.path);
  throw InputError("unknown dataset '" + spec.name + "'");
}

}  // namespace eigencascade
