#pragma once

#include "eigencascade/cascade.hpp"
#include "eigencascade/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <vector>

namespace eigencascade {

enum class FilterKind { eccentricity, gaussian_density, custom };

inline const char* to_string(FilterKind k) {
  switch (k) {
    case FilterKind::eccentricity: return "eccentricity";
    case FilterKind::gaussian_density: return "gaussian_density";
    case FilterKind::custom: return "custom";
  }
  return "?";
}

struct FilterSpec {
  FilterKind kind = FilterKind::eccentricity;
  double exponent = 1.0;       // eccentricity exponent p
  int neighbors = 10;          // density bandwidth: mean distance to this nearest neighbor
  std::vector<double> values;  // custom
};

struct FilterFunction {
  FilterKind kind = FilterKind::custom;
  double parameter = 0.0;  // exponent or bandwidth
  Vector values;
};

/// e(x) = (mean_y d(x, y)^p)^(1/p) over all points y, x included.
inline FilterFunction eccentricity(const PointCloud& X, double p = 1.0) {
  detail::require(!X.empty(), "filter: empty dataset");
  detail::require(p > 0.0 && std::isfinite(p), "filter: eccentricity exponent must be positive");
  const Index n = X.size();
  FilterFunction f{FilterKind::eccentricity, p, Vector::Zero(n)};
  for (Index a = 0; a < n; ++a) {
    double s = 0.0;
    for (Index b = 0; b < n; ++b) s += std::pow(distance(X, a, b), p);
    f.values(a) = std::pow(s / static_cast<double>(n), 1.0 / p);
  }
  return f;
}

/// Mean over points of the distance to the k-th nearest other point.
inline double mean_knn_distance(const PointCloud& X, int k) {
  const Index n = X.size();
  detail::require(k >= 1 && n > k, "filter: nearest-neighbor bandwidth needs more than k points");
  std::vector<double> d(static_cast<std::size_t>(n - 1));
  double total = 0.0;
  for (Index a = 0; a < n; ++a) {
    std::size_t c = 0;
    for (Index b = 0; b < n; ++b)
      if (b != a) d[c++] = distance(X, a, b);
    std::nth_element(d.begin(), d.begin() + (k - 1), d.end());
    total += d[static_cast<std::size_t>(k - 1)];
  }
  return total / static_cast<double>(n);
}

/// rho(x) = mean_y exp(-d(x, y)^2 / (2 h^2)) with h the mean distance to the
/// k-th nearest neighbor.
inline FilterFunction gaussian_density(const PointCloud& X, int k = 10) {
  const double h = mean_knn_distance(X, k);
  if (!(h > 0.0)) throw InputError("filter: degenerate density bandwidth (coincident points)");
  const Index n = X.size();
  FilterFunction f{FilterKind::gaussian_density, h, Vector::Zero(n)};
  for (Index a = 0; a < n; ++a) {
    double s = 0.0;
    for (Index b = 0; b < n; ++b) {
      const double d = distance(X, a, b);
      s += std::exp(-d * d / (2.0 * h * h));
    }
    f.values(a) = s / static_cast<double>(n);
  }
  return f;
}

inline FilterFunction coordinate_filter(const PointCloud& X, Index axis) {
  detail::require(axis >= 0 && axis < X.dim(), "filter: coordinate axis out of range");
  return {FilterKind::custom, static_cast<double>(axis), X.coords().col(axis)};
}

inline FilterFunction eval_filter(const PointCloud& X, const FilterSpec& spec) {
  switch (spec.kind) {
    case FilterKind::eccentricity: return eccentricity(X, spec.exponent);
    case FilterKind::gaussian_density: return gaussian_density(X, spec.neighbors);
    case FilterKind::custom: {
      detail::require(static_cast<Index>(spec.values.size()) == X.size(), "filter: custom values must cover every point");
      FilterFunction f{FilterKind::custom, 0.0, Eigen::Map<const Vector>(spec.values.data(), X.size())};
      detail::require(f.values.allFinite(), "filter: custom values must be finite");
      return f;
    }
  }
  throw InputError("filter: unknown kind");
}

/// Closed intervals of common length l = (hi - lo) / (n - (n - 1) g); interval
/// k starts at lo + k l (1 - g), so neighbors overlap by g l.
struct IntervalCover {
  double lo = 0.0, hi = 0.0, overlap = 0.0;
  std::vector<std::pair<double, double>> intervals;

  std::size_t size() const { return intervals.size(); }
  double length() const { return intervals.empty() ? 0.0 : intervals.front().second - intervals.front().first; }
};

inline IntervalCover build_interval_cover(double lo, double hi, int n, double g) {
  if (n < 1) throw InputError("interval cover: need at least one interval");
  if (!(g > 0.0 && g < 1.0)) throw InputError("interval cover: overlap must lie in (0, 1)");
  if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi)) throw InputError("interval cover: need a finite range with hi > lo");
  IntervalCover c{lo, hi, g, {}};
  const double len = (hi - lo) / (n - (n - 1) * g);
  for (int k = 0; k < n; ++k) {
    const double a = lo + k * len * (1.0 - g);
    c.intervals.emplace_back(a, k + 1 == n ? hi : a + len);
  }
  return c;
}

/// Single-linkage clusters of `ids`, cut at tau times the mean nearest-neighbor
/// distance within `ids`. Clusters are sorted, ordered by smallest member.
inline std::vector<std::vector<int>> cluster_preimage(const PointCloud& X, const std::vector<int>& ids, double tau = 3.0) {
  detail::require(tau > 0.0, "clustering: tau must be positive");
  const std::size_t k = ids.size();
  if (k == 0) return {};
  if (k == 1) return {{ids[0]}};
  Matrix D(static_cast<Index>(k), static_cast<Index>(k));
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = 0; b < k; ++b) D(static_cast<Index>(a), static_cast<Index>(b)) = distance(X, ids[a], ids[b]);
  double nn_total = 0.0;
  for (std::size_t a = 0; a < k; ++a) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < k; ++b)
      if (a != b) best = std::min(best, D(static_cast<Index>(a), static_cast<Index>(b)));
    nn_total += best;
  }
  const double threshold = tau * nn_total / static_cast<double>(k);

  std::vector<std::size_t> root(k);
  std::iota(root.begin(), root.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (root[x] != x) x = root[x] = root[root[x]];
    return x;
  };
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = a + 1; b < k; ++b)
      if (D(static_cast<Index>(a), static_cast<Index>(b)) <= threshold) {
        const auto ra = find(a), rb = find(b);
        if (ra != rb) root[std::max(ra, rb)] = std::min(ra, rb);
      }
  std::map<std::size_t, std::vector<int>> groups;
  for (std::size_t a = 0; a < k; ++a) groups[find(a)].push_back(ids[a]);
  std::vector<std::vector<int>> out;
  for (auto& [r, g] : groups) {
    std::sort(g.begin(), g.end());
    out.push_back(std::move(g));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return out;
}

struct MapperVertex {
  std::vector<int> members;  // sorted point ids
  int interval = 0;
};

struct PrunedCluster {
  int interval = 0;
  int point = 0;
};

struct MapperGraph {
  std::vector<MapperVertex> vertices;
  SparseMatrix weights;  // W_ij = |X_i cap X_j|
  std::vector<PrunedCluster> pruned;
  int n_intervals = 0;

  Index size() const { return static_cast<Index>(vertices.size()); }
  int degree(Index v) const { return static_cast<int>(weights.col(v).nonZeros()); }
};

struct MapperOptions {
  double overlap = 0.5;
  double tau = 3.0;
  bool prune_singletons = true;
};

/// Clusters every interval preimage, drops singleton clusters, and joins
/// clusters that share points.
inline MapperGraph build_mapper_graph(const PointCloud& X, const FilterFunction& f, const IntervalCover& cover,
                                      double tau = 3.0, bool prune_singletons = true) {
  detail::require(f.values.size() == X.size(), "mapper: filter does not match the dataset");
  MapperGraph G;
  G.n_intervals = static_cast<int>(cover.size());
  for (std::size_t k = 0; k < cover.size(); ++k) {
    const auto [a, b] = cover.intervals[k];
    std::vector<int> ids;
    for (Index y = 0; y < X.size(); ++y)
      if (f.values(y) >= a && f.values(y) <= b) ids.push_back(static_cast<int>(y));
    for (auto& c : cluster_preimage(X, ids, tau)) {
      if (prune_singletons && c.size() == 1) {
        G.pruned.push_back({static_cast<int>(k), c.front()});
        continue;
      }
      G.vertices.push_back({std::move(c), static_cast<int>(k)});
    }
  }
  if (G.vertices.empty()) throw InputError("mapper: every cluster was pruned");

  std::vector<std::vector<int>> owners(static_cast<std::size_t>(X.size()));
  for (std::size_t v = 0; v < G.vertices.size(); ++v)
    for (int p : G.vertices[v].members) owners[static_cast<std::size_t>(p)].push_back(static_cast<int>(v));
  std::map<std::pair<int, int>, int> shared;
  for (const auto& o : owners)
    for (std::size_t a = 0; a < o.size(); ++a)
      for (std::size_t b = a + 1; b < o.size(); ++b) ++shared[{o[a], o[b]}];
  std::vector<Triplet> trip;
  for (const auto& [e, w] : shared) {
    trip.emplace_back(e.first, e.second, w);
    trip.emplace_back(e.second, e.first, w);
  }
  G.weights.resize(G.size(), G.size());
  G.weights.setFromTriplets(trip.begin(), trip.end());
  G.weights.makeCompressed();
  return G;
}

enum class PouMode { gaussian, indicator };

inline const char* to_string(PouMode m) { return m == PouMode::gaussian ? "gaussian" : "indicator"; }

struct TransferOperator {
  SparseMatrix matrix;             // fine vertices x coarse vertices
  std::vector<int> flagged_rows;   // fine clusters with no covered member
};

/// Cluster partition of unity at every point of X (rows) over the vertices of
/// G (columns). Gaussian mode: phi_i = g_i / sum_j g_j with g_i the spherical
/// Gaussian fitted to cluster i. Indicator mode: uniform over the clusters
/// containing the point; points in no cluster get an empty row.
inline Matrix cluster_pou(const MapperGraph& G, const PointCloud& X, PouMode mode) {
  const Index n = X.size(), k = G.size(), d = X.dim();
  Matrix phi = Matrix::Zero(n, k);
  if (mode == PouMode::indicator) {
    for (Index v = 0; v < k; ++v)
      for (int p : G.vertices[static_cast<std::size_t>(v)].members) phi(p, v) = 1.0;
    for (Index y = 0; y < n; ++y) {
      const double s = phi.row(y).sum();
      if (s > 0.0) phi.row(y) /= s;
    }
    return phi;
  }
  Matrix logg(n, k);
  for (Index v = 0; v < k; ++v) {
    const auto& mem = G.vertices[static_cast<std::size_t>(v)].members;
    Vector mu = Vector::Zero(d);
    for (int p : mem) mu += X.coords().row(p).transpose();
    mu /= static_cast<double>(mem.size());
    double var = 0.0;
    for (int p : mem) var += (X.coords().row(p).transpose() - mu).squaredNorm();
    var = std::max(var / static_cast<double>(mem.size()), 1e-12);
    for (Index y = 0; y < n; ++y)
      logg(y, v) = -0.5 * static_cast<double>(d) * std::log(2.0 * std::numbers::pi * var) -
                   (X.coords().row(y).transpose() - mu).squaredNorm() / (2.0 * var);
  }
  for (Index y = 0; y < n; ++y) {
    const double mx = logg.row(y).maxCoeff();
    const Eigen::RowVectorXd e = (logg.row(y).array() - mx).exp();
    phi.row(y) = e / e.sum();
  }
  return phi;
}

/// T[a, i] = mean over points x of fine cluster a of phi_i(x): coarse vertex
/// functions extended through the coarse partition of unity, then averaged
/// over each fine cluster.
inline TransferOperator averaging_transfer(const MapperGraph& coarse, const MapperGraph& fine, const PointCloud& X,
                                           PouMode mode = PouMode::gaussian) {
  const Matrix phi = cluster_pou(coarse, X, mode);
  std::vector<char> covered(static_cast<std::size_t>(X.size()));
  for (Index y = 0; y < X.size(); ++y) covered[static_cast<std::size_t>(y)] = phi.row(y).sum() > 0.0;

  TransferOperator T;
  Matrix dense = Matrix::Zero(fine.size(), coarse.size());
  for (Index a = 0; a < fine.size(); ++a) {
    const auto& mem = fine.vertices[static_cast<std::size_t>(a)].members;
    int used = 0;
    for (int p : mem)
      if (covered[static_cast<std::size_t>(p)]) {
        dense.row(a) += phi.row(p);
        ++used;
      }
    if (used > 0) {
      dense.row(a) /= static_cast<double>(used);
      continue;
    }
    T.flagged_rows.push_back(static_cast<int>(a));
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (Index y = 0; y < X.size(); ++y) {
      if (!covered[static_cast<std::size_t>(y)]) continue;
      for (int p : mem) {
        const double dd = distance(X, y, p);
        if (dd < best_d) {
          best_d = dd;
          best = static_cast<int>(y);
        }
      }
    }
    if (best < 0) throw InputError("averaging transfer: the coarse graph covers no point");
    dense.row(a) = phi.row(best);
  }
  T.matrix = dense.sparseView();
  T.matrix.makeCompressed();
  return T;
}

/// Mapper graphs over increasing interval counts, coarsest first, linked by
/// averaging transfers.
struct MapperTower {
  std::vector<int> interval_counts;
  std::vector<MapperGraph> graphs;
  std::vector<TransferOperator> transfers;  // transfers[k]: graphs[k] -> graphs[k + 1]
  FilterFunction filter;
  MapperOptions options;
  PouMode pou = PouMode::gaussian;

  ScaleLadder ladder() const {
    ScaleLadder L;
    for (std::size_t k = 0; k < graphs.size(); ++k) {
      L.sizes.push_back(graphs[k].size());
      L.labels.push_back(interval_counts[k]);
    }
    for (const auto& t : transfers) L.transfers.push_back(t.matrix);
    return L;
  }
};

inline MapperTower build_mapper_tower(const PointCloud& X, const FilterFunction& f, const std::vector<int>& interval_counts,
                                      const MapperOptions& opt = {}, PouMode pou = PouMode::gaussian) {
  detail::require(!interval_counts.empty(), "mapper tower: no interval counts");
  for (std::size_t k = 1; k < interval_counts.size(); ++k)
    detail::require(interval_counts[k] > interval_counts[k - 1], "mapper tower: interval counts must increase");
  MapperTower T;
  T.interval_counts = interval_counts;
  T.filter = f;
  T.options = opt;
  T.pou = pou;
  const double lo = f.values.minCoeff(), hi = f.values.maxCoeff();
  for (int n : interval_counts)
    T.graphs.push_back(build_mapper_graph(X, f, build_interval_cover(lo, hi, n, opt.overlap), opt.tau, opt.prune_singletons));
  for (std::size_t k = 0; k + 1 < T.graphs.size(); ++k) T.transfers.push_back(averaging_transfer(T.graphs[k], T.graphs[k + 1], X, pou));
  return T;
}

/// Geometric ramp from `first` to `last` with `count` distinct integers.
inline std::vector<int> geometric_interval_ladder(int first, int last, int count) {
  detail::require(first >= 1 && last > first && count >= 2, "interval ladder: need 1 <= first < last and count >= 2");
  std::vector<int> out;
  for (int k = 0; k < count; ++k) {
    const int v = static_cast<int>(std::lround(first * std::pow(static_cast<double>(last) / first, static_cast<double>(k) / (count - 1))));
    if (out.empty() || v > out.back()) out.push_back(v);
  }
  return out;
}

/// Per aligned vector: the label carrying the largest share of its squared
/// mass and that share. `vertex_labels` assigns each vertex a group (-1: none).
struct FlareConcentration {
  std::vector<int> label;
  std::vector<double> share;
};

/// Majority label of each vertex's member points (smallest label on ties).
inline std::vector<int> majority_labels(const MapperGraph& G, const std::vector<int>& point_labels) {
  std::vector<int> out;
  for (const auto& v : G.vertices) {
    std::map<int, int> count;
    for (int p : v.members) ++count[point_labels[static_cast<std::size_t>(p)]];
    int best = -1, best_c = -1;
    for (const auto& [l, c] : count)
      if (c > best_c) {
        best = l;
        best_c = c;
      }
    out.push_back(best);
  }
  return out;
}

inline FlareConcentration flare_concentration(const Matrix& vectors, const std::vector<int>& vertex_labels) {
  detail::require(static_cast<Index>(vertex_labels.size()) == vectors.rows(), "flares: one label per vertex is required");
  FlareConcentration out;
  for (Index j = 0; j < vectors.cols(); ++j) {
    std::map<int, double> mass;
    const double total = vectors.col(j).squaredNorm();
    for (Index v = 0; v < vectors.rows(); ++v)
      if (vertex_labels[static_cast<std::size_t>(v)] >= 0) mass[vertex_labels[static_cast<std::size_t>(v)]] += vectors(v, j) * vectors(v, j);
    int best = -1;
    double share = 0.0;
    for (const auto& [l, m] : mass)
      if (total > 0.0 && m / total > share) {
        share = m / total;
        best = l;
      }
    out.label.push_back(best);
    out.share.push_back(share);
  }
  return out;
}

struct MapperCascade {
  CascadeResult result;
  ScaleLadder ladder;
  std::vector<int> components;  // connected components per level
};

/// Double cascade over a mapper tower with intersection-weight Laplacians.
inline MapperCascade mapper_double_cascade(const MapperTower& tower, const SolverConfig& cfg, std::optional<double> delta,
                                           double epsilon) {
  detail::require(tower.graphs.size() >= 2, "mapper cascade: need at least two levels");
  MapperCascade out;
  out.ladder = tower.ladder();
  std::vector<GraphOperators> ops;
  for (const auto& g : tower.graphs) {
    ops.emplace_back(WeightedGraph(g.weights));
    int c = 0;
    connected_components(g.weights, &c);
    out.components.push_back(c);
  }
  out.result = double_cascade(out.ladder, ops, cfg, Matrix(), delta, epsilon);
  return out;
}

}  // namespace eigencascade
