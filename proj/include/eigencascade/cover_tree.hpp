#pragma once

#include "eigencascade/geometry.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace eigencascade {

/// Dyadic cover tree over point ids 0..n-1.
///
/// Level sets C_j for bottom_level() <= j <= top_level() satisfy
///   nesting     C_j is a subset of C_{j-1}
///   cover       d(x, GP_j(x)) < 2^{j+1} - 2^i   for x in C_i, j > i
///   separation  d(x, x') > 2^j                   for distinct x, x' in C_j
/// for trees produced by build_cover_tree. Trees assembled by hand through the
/// raw constructor are not checked; use verify_invariants.
class CoverTree {
 public:
  CoverTree() = default;

  /// `levels[k]` lists the ids in C_{bottom + k}. `parents[k][id]` is the id of
  /// the parent (in C_{bottom + k + 1}) of `id` in C_{bottom + k}, or -1.
  /// The parent table of the top level is ignored.
  CoverTree(int bottom, int top, Index n_points, std::vector<std::vector<int>> levels,
            std::vector<std::vector<int>> parents)
      : bottom_(bottom), top_(top), n_(n_points), levels_(std::move(levels)), parents_(std::move(parents)) {
    detail::require(top_ >= bottom_, "cover tree: top level below bottom level");
    const auto count = static_cast<std::size_t>(top_ - bottom_ + 1);
    detail::require(levels_.size() == count, "cover tree: wrong number of level sets");
    parents_.resize(count);
    member_.assign(count, std::vector<char>(static_cast<std::size_t>(n_), 0));
    for (std::size_t k = 0; k < count; ++k) {
      std::sort(levels_[k].begin(), levels_[k].end());
      for (int id : levels_[k]) {
        detail::require(id >= 0 && id < n_, "cover tree: point id out of range");
        member_[k][static_cast<std::size_t>(id)] = 1;
      }
      parents_[k].resize(static_cast<std::size_t>(n_), -1);
    }
  }

  int bottom_level() const { return bottom_; }
  int top_level() const { return top_; }
  Index num_points() const { return n_; }
  int num_levels() const { return top_ - bottom_ + 1; }

  const std::vector<int>& level(int j) const { return levels_[slot(j)]; }

  bool contains(int id, int j) const {
    if (j < bottom_ || j > top_ || id < 0 || id >= n_) return false;
    return member_[slot(j)][static_cast<std::size_t>(id)] != 0;
  }

  /// Parent in C_{j+1} of `id` in C_j, or -1 when undefined.
  int parent(int id, int j) const {
    if (j < bottom_ || j >= top_ || id < 0 || id >= n_) return -1;
    return parents_[slot(j)][static_cast<std::size_t>(id)];
  }

  /// Highest level containing `id` (the level at which it enters the tree).
  int entry_level(int id) const {
    for (int j = top_; j >= bottom_; --j)
      if (contains(id, j)) return j;
    return bottom_ - 1;
  }

  /// GP_j(x): the unique ancestor of x in C_j (x itself when x is in C_j).
  int grandparent(int x, int j) const {
    if (j > top_) throw InputError("grandparent: level " + std::to_string(j) + " is above the top level");
    if (j < bottom_) throw InputError("grandparent: level " + std::to_string(j) + " is below the bottom level");
    if (x < 0 || x >= n_) throw InputError("grandparent: point id out of range");
    if (contains(x, j)) return x;
    int level = entry_level(x);
    if (level < bottom_) throw InputError("grandparent: point " + std::to_string(x) + " is not in the tree");
    int y = x;
    while (level < j) {
      y = parent(y, level);
      if (y < 0) throw InputError("grandparent: broken parent chain");
      ++level;
    }
    return y;
  }

  /// |GP_j^{-1}(y)| over the distinct ids of C_{j-1} (the union of all finer
  /// levels, which are nested). At the bottom level every point counts itself.
  int descendant_count(int y, int j) const {
    if (!contains(y, j)) throw InputError("descendant_count: point " + std::to_string(y) + " is not in C_" + std::to_string(j));
    if (j == bottom_) return 1;
    return descendant_count(y, j, j - 1);
  }

  /// Number of ids x in C_source with GP_j(x) = y.
  int descendant_count(int y, int j, int source) const {
    if (!contains(y, j)) throw InputError("descendant_count: point " + std::to_string(y) + " is not in C_" + std::to_string(j));
    detail::require(source >= bottom_ && source <= j, "descendant_count: source level out of range");
    int count = 0;
    for (int x : level(source))
      if (grandparent(x, j) == y) ++count;
    return count;
  }

  /// descendant_count(y, j) for every y in C_j, in level order.
  std::vector<int> descendant_counts(int j) const {
    const auto& Cj = level(j);
    std::vector<int> out(Cj.size(), 1);
    if (j == bottom_) return out;
    std::vector<int> pos(static_cast<std::size_t>(n_), -1);
    for (std::size_t k = 0; k < Cj.size(); ++k) pos[static_cast<std::size_t>(Cj[k])] = static_cast<int>(k);
    std::fill(out.begin(), out.end(), 0);
    for (int x : level(j - 1)) {
      const int p = contains(x, j) ? x : parent(x, j - 1);
      ++out[static_cast<std::size_t>(pos[static_cast<std::size_t>(p)])];
    }
    return out;
  }

 private:
  std::size_t slot(int j) const {
    if (j < bottom_ || j > top_) throw InputError("cover tree: level " + std::to_string(j) + " out of range");
    return static_cast<std::size_t>(j - bottom_);
  }

  int bottom_ = 0;
  int top_ = 0;
  Index n_ = 0;
  std::vector<std::vector<int>> levels_;
  std::vector<std::vector<int>> parents_;
  std::vector<std::vector<char>> member_;
};

struct CoverTreeOptions {
  /// Lowest level the tree may reach; when it cuts above the natural bottom
  /// the bottom level no longer contains every point.
  std::optional<int> min_level;
};

/// Builds the tree top-down: C_j extends C_{j+1} greedily in id order with
/// every point farther than 2^j from all current members, so each level is a
/// maximal 2^j-separated subset. A point entering at level j is attached to
/// its nearest member of C_{j+1} (smallest id on ties), which lies within 2^{j+1}.
inline CoverTree build_cover_tree(const PointCloud& X, const CoverTreeOptions& opts = {}) {
  const Index n = X.size();
  if (n == 0) throw InputError("build_cover_tree: empty point cloud");
  if (n == 1) return CoverTree(0, 0, 1, {{0}}, {{-1}});

  double dmin = std::numeric_limits<double>::infinity();
  double rmax = 0.0;
  for (Index a = 0; a < n; ++a)
    for (Index b = a + 1; b < n; ++b) {
      const double d = distance(X, a, b);
      dmin = std::min(dmin, d);
      if (a == 0) rmax = std::max(rmax, d);
    }
  if (!(dmin > 0.0)) throw InputError("build_cover_tree: duplicate points are not supported");

  int bottom = static_cast<int>(std::ceil(std::log2(dmin))) - 1;
  // guard against log2 rounding: the bottom level must separate every pair
  while (!(std::ldexp(1.0, bottom) < dmin)) --bottom;
  if (opts.min_level) bottom = std::max(bottom, *opts.min_level);
  int start = static_cast<int>(std::ceil(std::log2(rmax)));
  while (std::ldexp(1.0, start) < rmax) ++start;
  start = std::max(start, bottom);

  // Greedy nets from `start` (a single root: every point is within 2^start of
  // point 0) down to `bottom`.
  std::vector<std::vector<int>> nets;  // nets[0] = C_start
  std::vector<char> in_net(static_cast<std::size_t>(n), 0);
  std::vector<int> net{0};
  in_net[0] = 1;
  for (int j = start; j >= bottom; --j) {
    const double sep = std::ldexp(1.0, j);
    for (Index x = 0; x < n; ++x) {
      if (in_net[static_cast<std::size_t>(x)]) continue;
      bool separated = true;
      for (int c : net)
        if (!(distance(X, x, c) > sep)) {
          separated = false;
          break;
        }
      if (separated) {
        net.push_back(static_cast<int>(x));
        in_net[static_cast<std::size_t>(x)] = 1;
      }
    }
    nets.push_back(net);
  }

  // top = smallest level whose net is a single point
  int top = start;
  for (std::size_t k = 0; k < nets.size(); ++k)
    if (nets[k].size() == 1) top = start - static_cast<int>(k);

  const int count = top - bottom + 1;
  std::vector<std::vector<int>> levels(static_cast<std::size_t>(count));
  for (int j = bottom; j <= top; ++j) levels[static_cast<std::size_t>(j - bottom)] = nets[static_cast<std::size_t>(start - j)];

  std::vector<std::vector<int>> parents(static_cast<std::size_t>(count), std::vector<int>(static_cast<std::size_t>(n), -1));
  for (int j = bottom; j < top; ++j) {
    const auto& upper = levels[static_cast<std::size_t>(j + 1 - bottom)];
    std::vector<char> is_upper(static_cast<std::size_t>(n), 0);
    for (int c : upper) is_upper[static_cast<std::size_t>(c)] = 1;
    auto& par = parents[static_cast<std::size_t>(j - bottom)];
    for (int x : levels[static_cast<std::size_t>(j - bottom)]) {
      if (is_upper[static_cast<std::size_t>(x)]) {
        par[static_cast<std::size_t>(x)] = x;
        continue;
      }
      double best = std::numeric_limits<double>::infinity();
      int arg = -1;
      for (int c : upper) {
        const double d = distance(X, x, c);
        if (d < best || (d == best && c < arg)) {
          best = d;
          arg = c;
        }
      }
      par[static_cast<std::size_t>(x)] = arg;
    }
  }
  return CoverTree(bottom, top, n, std::move(levels), std::move(parents));
}

enum class InvariantKind { nesting, cover, separation, structure };

inline const char* to_string(InvariantKind k) {
  switch (k) {
    case InvariantKind::nesting: return "nesting";
    case InvariantKind::cover: return "cover";
    case InvariantKind::separation: return "separation";
    case InvariantKind::structure: return "structure";
  }
  return "?";
}

/// One violated instance. For nesting: `a` is in C_{level_i} but not in
/// C_{level_i - 1}. For cover: d(a, b = GP_{level_j}(a)) >= bound with a in
/// C_{level_i}. For separation: a, b in C_{level_j} with d(a, b) <= bound.
struct Violation {
  InvariantKind kind;
  int level_i = 0;
  int level_j = 0;
  int a = -1;
  int b = -1;
  double dist = 0.0;
  double bound = 0.0;
};

struct InvariantReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  const Violation* first() const { return violations.empty() ? nullptr : &violations.front(); }
};

/// Exhaustive check of nesting, cover and separation with strict inequalities
/// and zero tolerance.
inline InvariantReport verify_invariants(const CoverTree& T, const PointCloud& X) {
  InvariantReport rep;
  if (T.num_points() != X.size()) {
    rep.violations.push_back({InvariantKind::structure, 0, 0, -1, -1, 0.0, 0.0});
    return rep;
  }
  for (int i = T.bottom_level() + 1; i <= T.top_level(); ++i)
    for (int x : T.level(i))
      if (!T.contains(x, i - 1)) rep.violations.push_back({InvariantKind::nesting, i, i - 1, x, -1, 0.0, 0.0});

  for (int i = T.bottom_level(); i < T.top_level(); ++i)
    for (int x : T.level(i)) {
      int y = x;
      for (int j = i + 1; j <= T.top_level(); ++j) {
        y = T.contains(y, j) ? y : T.parent(y, j - 1);
        if (y < 0 || !T.contains(y, j)) {
          rep.violations.push_back({InvariantKind::structure, i, j, x, y, 0.0, 0.0});
          break;
        }
        const double d = distance(X, x, y);
        const double bound = std::ldexp(1.0, j + 1) - std::ldexp(1.0, i);
        if (!(d < bound)) rep.violations.push_back({InvariantKind::cover, i, j, x, y, d, bound});
      }
    }

  for (int j = T.bottom_level(); j <= T.top_level(); ++j) {
    const auto& C = T.level(j);
    const double sep = std::ldexp(1.0, j);
    for (std::size_t a = 0; a < C.size(); ++a)
      for (std::size_t b = a + 1; b < C.size(); ++b) {
        const double d = distance(X, C[a], C[b]);
        if (!(d > sep)) rep.violations.push_back({InvariantKind::separation, j, j, C[a], C[b], d, sep});
      }
  }
  return rep;
}

}  // namespace eigencascade
