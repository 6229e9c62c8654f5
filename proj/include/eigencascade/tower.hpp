#pragma once

#include "eigencascade/cover_tree.hpp"
#include "eigencascade/laplacian.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace eigencascade {

struct CoverSet {
  int center = -1;
  double radius = 0.0;
};

/// Balls B(x, R 2^{i+1}) around the level sets of a cover tree, one cover per
/// scale, linked by refinement maps p_i from scale i to scale i+1.
class CoverTower {
 public:
  CoverTower() = default;
  CoverTower(double ratio, std::vector<int> levels, std::vector<std::vector<CoverSet>> covers,
             std::vector<std::vector<int>> refinement)
      : ratio_(ratio), levels_(std::move(levels)), covers_(std::move(covers)), refinement_(std::move(refinement)) {}

  double ratio() const { return ratio_; }
  /// Levels in ascending order (finest first).
  const std::vector<int>& levels() const { return levels_; }
  std::size_t num_scales() const { return levels_.size(); }

  std::size_t slot(int level) const {
    for (std::size_t k = 0; k < levels_.size(); ++k)
      if (levels_[k] == level) return k;
    throw InputError("cover tower: scale " + std::to_string(level) + " not present");
  }
  bool has_scale(int level) const {
    for (int l : levels_)
      if (l == level) return true;
    return false;
  }

  const std::vector<CoverSet>& cover(int level) const { return covers_[slot(level)]; }
  /// p_i: cover-set index at `level` -> cover-set index at the next coarser scale.
  const std::vector<int>& refinement(int level) const {
    const auto k = slot(level);
    if (k + 1 >= levels_.size()) throw InputError("cover tower: no coarser scale above " + std::to_string(level));
    return refinement_[k];
  }

  /// r_i = R 2^i: bandwidth of the partition of unity at scale i.
  double pou_radius(int level) const { return ratio_ * std::ldexp(1.0, level); }

  /// Indices of points of X in none of the (open) cover balls at `level`.
  std::vector<Index> uncovered_points(int level, const PointCloud& X) const {
    std::vector<Index> out;
    for (Index y = 0; y < X.size(); ++y) {
      bool inside = false;
      for (const auto& s : cover(level))
        if (distance(X, y, s.center) < s.radius) {
          inside = true;
          break;
        }
      if (!inside) out.push_back(y);
    }
    return out;
  }

 private:
  double ratio_ = 1.0;
  std::vector<int> levels_;
  std::vector<std::vector<CoverSet>> covers_;
  std::vector<std::vector<int>> refinement_;
};

/// Builds the tower over levels [range.first, range.second] (all tree levels by
/// default). Each refinement edge x -> p(x) is certified by
/// d(x, p(x)) + R 2^{i+1} <= R 2^{i+2}; a failing edge is an input error.
inline CoverTower tower_from_cover_tree(const CoverTree& T, const PointCloud& X, double R = 1.0,
                                        std::optional<std::pair<int, int>> range = std::nullopt) {
  if (!(R >= 1.0)) throw InputError("tower: ratio R must be >= 1");
  const int lo = range ? range->first : T.bottom_level();
  const int hi = range ? range->second : T.top_level();
  detail::require(lo <= hi, "tower: empty scale range");
  detail::require(lo >= T.bottom_level() && hi <= T.top_level(), "tower: requested scales are not in the tree");

  std::vector<int> levels;
  std::vector<std::vector<CoverSet>> covers;
  std::vector<std::vector<int>> refinement;
  for (int i = lo; i <= hi; ++i) {
    levels.push_back(i);
    std::vector<CoverSet> c;
    for (int x : T.level(i)) c.push_back({x, R * std::ldexp(1.0, i + 1)});
    covers.push_back(std::move(c));
  }
  for (int i = lo; i < hi; ++i) {
    const auto& fine = T.level(i);
    const auto& coarse = T.level(i + 1);
    std::vector<int> pos(static_cast<std::size_t>(T.num_points()), -1);
    for (std::size_t k = 0; k < coarse.size(); ++k) pos[static_cast<std::size_t>(coarse[k])] = static_cast<int>(k);
    std::vector<int> p(fine.size());
    const double r_fine = R * std::ldexp(1.0, i + 1);
    const double r_coarse = R * std::ldexp(1.0, i + 2);
    for (std::size_t k = 0; k < fine.size(); ++k) {
      const int gp = T.grandparent(fine[k], i + 1);
      const int idx = pos[static_cast<std::size_t>(gp)];
      if (idx < 0) throw InputError("tower: grandparent outside the coarser level set");
      if (!(distance(X, fine[k], gp) + r_fine <= r_coarse))
        throw InputError("tower: refinement containment fails for point " + std::to_string(fine[k]) + " at scale " +
                         std::to_string(i));
      p[k] = idx;
    }
    refinement.push_back(std::move(p));
  }
  return CoverTower(R, std::move(levels), std::move(covers), std::move(refinement));
}

/// 1-skeleton of the nerve at one scale with density-aware weights
/// W_kj = |GP^{-1}(x_k)| |GP^{-1}(x_j)| k_{2 r_i}(x_k, x_j).
struct NerveGraph {
  int level = 0;
  double radius = 0.0;
  std::vector<int> centers;
  std::vector<int> counts;
  SparseMatrix weights;
  std::vector<int> isolated;

  Index size() const { return static_cast<Index>(centers.size()); }
};

inline NerveGraph build_nerve_graph(const CoverTower& tower, int level, const CoverTree& T, const PointCloud& X,
                                    const std::function<double(double)>& profile = hat_profile) {
  const auto& cover = tower.cover(level);
  NerveGraph g;
  g.level = level;
  g.radius = cover.empty() ? 0.0 : cover.front().radius;
  for (const auto& s : cover) g.centers.push_back(s.center);
  g.counts = T.descendant_counts(level);
  if (g.counts.size() != g.centers.size()) throw InputError("nerve: tower scale does not match the tree level");

  const RadialKernel k{profile, 2.0 * tower.pou_radius(level)};
  const auto n = static_cast<Index>(g.centers.size());
  std::vector<Triplet> trip;
  for (Index a = 0; a < n; ++a)
    for (Index b = a + 1; b < n; ++b) {
      const double kv = k.at_distance(distance(X, g.centers[static_cast<std::size_t>(a)], g.centers[static_cast<std::size_t>(b)]));
      if (kv > 0.0) {
        const double w = static_cast<double>(g.counts[static_cast<std::size_t>(a)]) *
                         static_cast<double>(g.counts[static_cast<std::size_t>(b)]) * kv;
        trip.emplace_back(a, b, w);
        trip.emplace_back(b, a, w);
      }
    }
  g.weights.resize(n, n);
  g.weights.setFromTriplets(trip.begin(), trip.end());
  g.weights.makeCompressed();
  for (Index a = 0; a < n; ++a)
    if (g.weights.col(a).nonZeros() == 0) g.isolated.push_back(static_cast<int>(a));
  return g;
}

/// phi^i_x(y) = k_{r_i}(x, y) / sum_{x' in C_i} k_{r_i}(x', y).
class PartitionOfUnity {
 public:
  PartitionOfUnity(const CoverTower& tower, const PointCloud& X,
                   std::function<double(double)> profile = hat_profile)
      : tower_(tower), profile_(std::move(profile)) {
    for (int level : tower_.levels()) {
      std::vector<int> ids;
      for (const auto& s : tower_.cover(level)) ids.push_back(s.center);
      centers_.push_back(X.subset(ids));
    }
  }

  /// Non-zero barycentric coordinates (cover-set index, weight) of `y` at `level`.
  std::vector<std::pair<int, double>> eval(int level, std::span<const double> y) const {
    const auto& C = centers_[tower_.slot(level)];
    const RadialKernel k{profile_, tower_.pou_radius(level)};
    std::vector<std::pair<int, double>> out;
    double total = 0.0;
    for (Index c = 0; c < C.size(); ++c) {
      const double v = k.at_distance(distance(C.point(c), y));
      if (v > 0.0) {
        out.emplace_back(static_cast<int>(c), v);
        total += v;
      }
    }
    if (out.empty()) throw DomainError("partition of unity: point not covered at scale " + std::to_string(level));
    for (auto& [idx, v] : out) v /= total;
    return out;
  }

  const CoverTower& tower() const { return tower_; }

 private:
  CoverTower tower_;
  std::function<double(double)> profile_;
  std::vector<PointCloud> centers_;
};

inline std::vector<std::pair<int, double>> pou_eval(const PartitionOfUnity& pou, int level, std::span<const double> y) {
  return pou.eval(level, y);
}

struct PulledBackFunction {
  Vector values;                 // NaN at uncovered points
  std::vector<Index> uncovered;  // per-point domain errors
};

/// y -> sum_x phi^i_x(y) f(x): the linear extension of a vertex function to the
/// nerve, precomposed with the nerve map.
inline PulledBackFunction extend_and_pull_back(const Vector& f, const PartitionOfUnity& pou, int level, const PointCloud& Y) {
  detail::require(f.size() == static_cast<Index>(pou.tower().cover(level).size()),
                  "extend_and_pull_back: function size does not match the number of vertices");
  PulledBackFunction out;
  out.values.resize(Y.size());
  for (Index y = 0; y < Y.size(); ++y) {
    try {
      double s = 0.0;
      for (const auto& [idx, w] : pou.eval(level, Y.point(y))) s += w * f(idx);
      out.values(y) = s;
    } catch (const DomainError&) {
      out.values(y) = std::numeric_limits<double>::quiet_NaN();
      out.uncovered.push_back(y);
    }
  }
  return out;
}

/// [p* f](u) = f(p(u)).
inline Vector pullback_vertex_function(std::span<const int> p, const Vector& f) { return pullback_vertex_cochain(p, f); }

/// Matrix of p*: one unit entry per row.
inline SparseMatrix pullback_matrix(std::span<const int> p, Index n_coarse) {
  std::vector<Triplet> trip;
  for (std::size_t u = 0; u < p.size(); ++u) {
    detail::require(p[u] >= 0 && p[u] < n_coarse, "pullback: refinement map points outside the coarse vertex set");
    trip.emplace_back(static_cast<Index>(u), p[u], 1.0);
  }
  SparseMatrix P(static_cast<Index>(p.size()), n_coarse);
  P.setFromTriplets(trip.begin(), trip.end());
  return P;
}

}  // namespace eigencascade
