#pragma once

#include "eigencascade/common.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <queue>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace eigencascade {

enum class LaplacianKind { unnormalized, symmetric, random_walk };

/// What a normalized Laplacian does with a zero-degree vertex.
/// zero_diagonal: the vertex becomes its own component with eigenvalue 0.
enum class IsolatedPolicy { zero_diagonal, reject };

inline const char* to_string(LaplacianKind k) {
  switch (k) {
    case LaplacianKind::unnormalized: return "unnormalized";
    case LaplacianKind::symmetric: return "symmetric";
    case LaplacianKind::random_walk: return "random_walk";
  }
  return "?";
}

/// Symmetric non-negative weights with zero diagonal and D_ii = sum_j W_ij.
class WeightedGraph {
 public:
  WeightedGraph() = default;

  explicit WeightedGraph(SparseMatrix W) : W_(std::move(W)) {
    detail::require(W_.rows() == W_.cols(), "weighted graph: weight matrix must be square");
    W_.prune(0.0);
    W_.makeCompressed();
    degree_ = Vector::Zero(W_.rows());
    for (Index c = 0; c < W_.outerSize(); ++c)
      for (SparseMatrix::InnerIterator it(W_, c); it; ++it) {
        detail::require(std::isfinite(it.value()) && it.value() >= 0.0, "weighted graph: weights must be finite and non-negative");
        detail::require(it.row() != it.col(), "weighted graph: diagonal weights must be zero");
      }
    const SparseMatrix asym = SparseMatrix(W_.transpose()) - W_;
    for (Index c = 0; c < asym.outerSize(); ++c)
      for (SparseMatrix::InnerIterator it(asym, c); it; ++it)
        detail::require(it.value() == 0.0, "weighted graph: weight matrix must be symmetric");
    // column c of a symmetric matrix is row c
    for (Index c = 0; c < W_.outerSize(); ++c) {
      double s = 0.0;
      for (SparseMatrix::InnerIterator it(W_, c); it; ++it) s += it.value();
      degree_(c) = s;
    }
  }

  Index size() const { return W_.rows(); }
  const SparseMatrix& weights() const { return W_; }
  const Vector& degrees() const { return degree_; }

  std::vector<int> isolated() const {
    std::vector<int> out;
    for (Index i = 0; i < size(); ++i)
      if (degree_(i) == 0.0) out.push_back(static_cast<int>(i));
    return out;
  }

 private:
  SparseMatrix W_;
  Vector degree_;
};

struct LaplacianOperator {
  LaplacianKind kind = LaplacianKind::unnormalized;
  SparseMatrix matrix;

  Index size() const { return matrix.rows(); }
  Matrix apply(const Matrix& X) const { return matrix * X; }
};

/// L = D - W, L_sym = I - D^{-1/2} W D^{-1/2}, L_rw = I - D^{-1} W.
inline LaplacianOperator build_laplacian(const WeightedGraph& g, LaplacianKind kind,
                                         IsolatedPolicy policy = IsolatedPolicy::zero_diagonal) {
  const Index n = g.size();
  const Vector& d = g.degrees();
  if (kind != LaplacianKind::unnormalized && policy == IsolatedPolicy::reject)
    for (Index i = 0; i < n; ++i)
      if (d(i) == 0.0) throw DegenerateDegreeError("laplacian: vertex " + std::to_string(i) + " has zero degree");

  std::vector<Triplet> trip;
  trip.reserve(static_cast<std::size_t>(g.weights().nonZeros() + n));
  for (Index c = 0; c < g.weights().outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(g.weights(), c); it; ++it) {
      const Index r = it.row();
      double v = 0.0;
      switch (kind) {
        case LaplacianKind::unnormalized: v = -it.value(); break;
        case LaplacianKind::symmetric: v = -it.value() / std::sqrt(d(r) * d(c)); break;
        case LaplacianKind::random_walk: v = -it.value() / d(r); break;
      }
      trip.emplace_back(r, c, v);
    }
  for (Index i = 0; i < n; ++i) {
    const double diag = kind == LaplacianKind::unnormalized ? d(i) : (d(i) == 0.0 ? 0.0 : 1.0);
    if (diag != 0.0) trip.emplace_back(i, i, diag);
  }
  LaplacianOperator L{kind, SparseMatrix(n, n)};
  L.matrix.setFromTriplets(trip.begin(), trip.end());
  L.matrix.makeCompressed();
  return L;
}

/// Connected-component label per vertex (labels 0..count-1 in order of first vertex).
inline std::vector<int> connected_components(const SparseMatrix& W, int* count = nullptr) {
  const Index n = W.rows();
  std::vector<int> label(static_cast<std::size_t>(n), -1);
  int next = 0;
  for (Index s = 0; s < n; ++s) {
    if (label[static_cast<std::size_t>(s)] >= 0) continue;
    std::queue<Index> q;
    q.push(s);
    label[static_cast<std::size_t>(s)] = next;
    while (!q.empty()) {
      const Index u = q.front();
      q.pop();
      for (SparseMatrix::InnerIterator it(W, u); it; ++it)
        if (it.value() != 0.0 && label[static_cast<std::size_t>(it.row())] < 0) {
          label[static_cast<std::size_t>(it.row())] = next;
          q.push(it.row());
        }
    }
    ++next;
  }
  if (count) *count = next;
  return label;
}

/// (row, col, value) per stored entry, one per line.
inline void write_triplets(const SparseMatrix& M, std::ostream& os) {
  char buf[96];
  for (Index c = 0; c < M.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(M, c); it; ++it) {
      std::snprintf(buf, sizeof buf, "%lld %lld %.17g\n", static_cast<long long>(it.row()),
                    static_cast<long long>(it.col()), it.value());
      os << buf;
    }
}

// ---------------------------------------------------------------------------
// Cochains on the 1-skeleton of a simplicial complex.

/// Vertices 0..n-1 and undirected edges stored once as (u, v) with u < v.
struct SimplicialGraph {
  Index num_vertices = 0;
  std::vector<std::pair<int, int>> edges;

  SimplicialGraph() = default;
  SimplicialGraph(Index n, std::vector<std::pair<int, int>> e) : num_vertices(n) {
    for (auto [u, v] : e) {
      detail::require(u != v, "simplicial graph: self loops are not simplices");
      detail::require(u >= 0 && v >= 0 && u < n && v < n, "simplicial graph: vertex out of range");
      edges.emplace_back(std::min(u, v), std::max(u, v));
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  }

  /// Edge index of {u, v}, or -1.
  int edge_index(int u, int v) const {
    const std::pair<int, int> key{std::min(u, v), std::max(u, v)};
    const auto it = std::lower_bound(edges.begin(), edges.end(), key);
    return (it != edges.end() && *it == key) ? static_cast<int>(it - edges.begin()) : -1;
  }

  static SimplicialGraph from_weights(const SparseMatrix& W) {
    std::vector<std::pair<int, int>> e;
    for (Index c = 0; c < W.outerSize(); ++c)
      for (SparseMatrix::InnerIterator it(W, c); it; ++it)
        if (it.row() < c && it.value() != 0.0) e.emplace_back(static_cast<int>(it.row()), static_cast<int>(c));
    return SimplicialGraph(W.rows(), std::move(e));
  }
};

/// Antisymmetric edge function: values[e] = g(u, v) for edges[e] = (u, v), u < v.
struct EdgeCochain {
  Vector values;

  double at(const SimplicialGraph& K, int a, int b) const {
    const int e = K.edge_index(a, b);
    if (e < 0) throw InputError("cochain: (" + std::to_string(a) + "," + std::to_string(b) + ") is not an edge");
    return a < b ? values(e) : -values(e);
  }

  /// From values on ordered pairs; both orientations may be given but must
  /// be antisymmetric. Missing edges are zero.
  static EdgeCochain from_ordered_pairs(const SimplicialGraph& K, const std::map<std::pair<int, int>, double>& g) {
    EdgeCochain c{Vector::Zero(static_cast<Index>(K.edges.size()))};
    std::vector<char> seen(K.edges.size(), 0);
    for (const auto& [key, val] : g) {
      const auto [a, b] = key;
      const int e = K.edge_index(a, b);
      if (e < 0) throw InputError("cochain: (" + std::to_string(a) + "," + std::to_string(b) + ") is not an edge");
      const double oriented = a < b ? val : -val;
      if (seen[static_cast<std::size_t>(e)] && c.values(e) != oriented)
        throw InputError("cochain: values on (" + std::to_string(a) + "," + std::to_string(b) + ") are not antisymmetric");
      c.values(e) = oriented;
      seen[static_cast<std::size_t>(e)] = 1;
    }
    return c;
  }
};

/// [delta f](u, v) = f(v) - f(u).
inline EdgeCochain coboundary(const Vector& f, const SimplicialGraph& K) {
  detail::require(f.size() == K.num_vertices, "coboundary: function size does not match vertex count");
  EdgeCochain g{Vector(static_cast<Index>(K.edges.size()))};
  for (std::size_t e = 0; e < K.edges.size(); ++e) g.values(static_cast<Index>(e)) = f(K.edges[e].second) - f(K.edges[e].first);
  return g;
}

/// [delta^dagger g](u) = sum_{v ~ u} g(v, u), unit simplex weights.
inline Vector coboundary_adjoint(const EdgeCochain& g, const SimplicialGraph& K) {
  detail::require(g.values.size() == static_cast<Index>(K.edges.size()), "coboundary adjoint: cochain size does not match edge count");
  Vector out = Vector::Zero(K.num_vertices);
  for (std::size_t e = 0; e < K.edges.size(); ++e) {
    const auto [u, v] = K.edges[e];
    const double guv = g.values(static_cast<Index>(e));
    out(u) += -guv;  // g(v, u)
    out(v) += guv;   // g(u, v)
  }
  return out;
}

/// Sum over unoriented edges.
inline double inner(const EdgeCochain& a, const EdgeCochain& b) { return a.values.dot(b.values); }

/// delta^dagger o delta as a matrix.
inline SparseMatrix hodge_laplacian(const SimplicialGraph& K) {
  std::vector<Triplet> trip;
  for (auto [u, v] : K.edges) {
    trip.emplace_back(u, u, 1.0);
    trip.emplace_back(v, v, 1.0);
    trip.emplace_back(u, v, -1.0);
    trip.emplace_back(v, u, -1.0);
  }
  SparseMatrix H(K.num_vertices, K.num_vertices);
  H.setFromTriplets(trip.begin(), trip.end());
  return H;
}

/// [p* f](u) = f(p(u)) for a vertex map p.
inline Vector pullback_vertex_cochain(std::span<const int> p, const Vector& f) {
  Vector out(static_cast<Index>(p.size()));
  for (std::size_t u = 0; u < p.size(); ++u) {
    detail::require(p[u] >= 0 && p[u] < f.size(), "pullback: vertex map points outside the target complex");
    out(static_cast<Index>(u)) = f(p[u]);
  }
  return out;
}

/// Pullback of an edge cochain along a vertex map p: K1 -> K2;
/// edges collapsed to a vertex receive 0.
inline EdgeCochain pullback_edge_cochain(std::span<const int> p, const SimplicialGraph& K1, const SimplicialGraph& K2,
                                         const EdgeCochain& g) {
  EdgeCochain out{Vector::Zero(static_cast<Index>(K1.edges.size()))};
  for (std::size_t e = 0; e < K1.edges.size(); ++e) {
    const int a = p[static_cast<std::size_t>(K1.edges[e].first)];
    const int b = p[static_cast<std::size_t>(K1.edges[e].second)];
    if (a != b) out.values(static_cast<Index>(e)) = g.at(K2, a, b);
  }
  return out;
}

/// Weighted coboundary delta_w with rows sqrt(w_uv) (e_v / sqrt(d_v) - e_u / sqrt(d_u)),
/// so that delta_w^T delta_w = L_sym away from isolated vertices.
inline SparseMatrix weighted_coboundary(const WeightedGraph& g) {
  const auto K = SimplicialGraph::from_weights(g.weights());
  std::vector<Triplet> trip;
  for (std::size_t e = 0; e < K.edges.size(); ++e) {
    const auto [u, v] = K.edges[e];
    const double s = std::sqrt(g.weights().coeff(u, v));
    trip.emplace_back(static_cast<Index>(e), u, -s / std::sqrt(g.degrees()(u)));
    trip.emplace_back(static_cast<Index>(e), v, s / std::sqrt(g.degrees()(v)));
  }
  SparseMatrix B(static_cast<Index>(K.edges.size()), g.size());
  B.setFromTriplets(trip.begin(), trip.end());
  return B;
}

/// Frobenius norm of delta_w^T delta_w - L_sym.
inline double symmetric_hodge_residual(const WeightedGraph& g) {
  const SparseMatrix B = weighted_coboundary(g);
  const SparseMatrix H = SparseMatrix(B.transpose()) * B;
  const SparseMatrix diff = H - build_laplacian(g, LaplacianKind::symmetric).matrix;
  return diff.norm();
}

struct NoncommutativityReport {
  double adjoint_of_pullback = 0.0;  // [delta^dagger p* f](a)
  double pullback_of_adjoint = 0.0;  // [p* delta^dagger f](a)
  bool coboundary_commutes = false;  // delta p* = p* delta on every tested 0-cochain
  bool adjoint_commutes() const { return adjoint_of_pullback == pullback_of_adjoint; }
};

/// K1 = full simplex on {a, b, c}, K2 = edge {A, B}, p(a) = A, p(b) = p(c) = B,
/// f(A, B) = 1. Evaluates both compositions at a, and checks delta p* = p* delta
/// exactly on all integer 0-cochains on K2 with values in [-3, 3].
inline NoncommutativityReport noncommutativity_witness() {
  const SimplicialGraph K1(3, {{0, 1}, {0, 2}, {1, 2}});
  const SimplicialGraph K2(2, {{0, 1}});
  const std::vector<int> p{0, 1, 1};
  const auto f = EdgeCochain::from_ordered_pairs(K2, {{{0, 1}, 1.0}});

  NoncommutativityReport rep;
  rep.adjoint_of_pullback = coboundary_adjoint(pullback_edge_cochain(p, K1, K2, f), K1)(0);
  rep.pullback_of_adjoint = pullback_vertex_cochain(p, coboundary_adjoint(f, K2))(0);

  rep.coboundary_commutes = true;
  for (int x = -3; x <= 3; ++x)
    for (int y = -3; y <= 3; ++y) {
      Vector f0(2);
      f0 << x, y;
      const Vector lhs = coboundary(pullback_vertex_cochain(p, f0), K1).values;
      const Vector rhs = pullback_edge_cochain(p, K1, K2, coboundary(f0, K2)).values;
      if (lhs != rhs) rep.coboundary_commutes = false;
    }
  return rep;
}

}  // namespace eigencascade
