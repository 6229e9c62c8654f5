#pragma once

#include "eigencascade/eigensolver.hpp"
#include "eigencascade/laplacian.hpp"
#include "eigencascade/subspace.hpp"
#include "eigencascade/tower.hpp"

#include <chrono>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace eigencascade {

/// The normalized Laplacians of one scale.
struct GraphOperators {
  WeightedGraph graph;
  SparseMatrix sym;
  SparseMatrix rw;

  GraphOperators() = default;
  explicit GraphOperators(WeightedGraph g)
      : graph(std::move(g)),
        sym(build_laplacian(graph, LaplacianKind::symmetric).matrix),
        rw(build_laplacian(graph, LaplacianKind::random_walk).matrix) {}

  Index size() const { return graph.size(); }

  /// D^{1/2} x with zero-degree entries left unchanged.
  Matrix to_sym(const Matrix& x) const {
    Vector s(size());
    for (Index i = 0; i < size(); ++i) s(i) = graph.degrees()(i) > 0.0 ? std::sqrt(graph.degrees()(i)) : 1.0;
    return s.asDiagonal() * x;
  }
};

/// Scales ordered coarsest first. transfers[k] maps vertex functions on scale k
/// to vertex functions on scale k+1 (the next finer one) and has rows summing to 1.
struct ScaleLadder {
  std::vector<Index> sizes;
  std::vector<SparseMatrix> transfers;
  std::vector<int> labels;

  std::size_t num_scales() const { return sizes.size(); }

  void validate() const {
    detail::require(!sizes.empty(), "ladder: no scales");
    detail::require(transfers.size() + 1 == sizes.size(), "ladder: need one transfer per adjacent pair of scales");
    detail::require(labels.empty() || labels.size() == sizes.size(), "ladder: label count mismatch");
    for (std::size_t k = 0; k < transfers.size(); ++k) {
      const auto& T = transfers[k];
      detail::require(T.rows() == sizes[k + 1] && T.cols() == sizes[k],
                      "ladder: transfer " + std::to_string(k) + " has the wrong shape");
      const Vector rows = T * Vector::Ones(T.cols());
      for (Index r = 0; r < rows.size(); ++r)
        detail::require(std::abs(rows(r) - 1.0) <= 1e-12, "ladder: transfer " + std::to_string(k) + " does not preserve constants");
    }
  }

  int label(std::size_t k) const { return labels.empty() ? static_cast<int>(k) : labels[k]; }
};

/// Ladder over the tower scales in [lo, hi] (all by default), coarsest first,
/// with pullbacks along the refinement maps as transfers.
inline ScaleLadder ladder_from_tower(const CoverTower& tower, std::optional<std::pair<int, int>> range = std::nullopt) {
  ScaleLadder L;
  const auto& lv = tower.levels();
  const int lo = range ? range->first : lv.front();
  const int hi = range ? range->second : lv.back();
  for (auto it = lv.rbegin(); it != lv.rend(); ++it) {
    if (*it < lo || *it > hi) continue;
    L.labels.push_back(*it);
    L.sizes.push_back(static_cast<Index>(tower.cover(*it).size()));
  }
  detail::require(!L.labels.empty(), "ladder: no tower scales in range");
  for (std::size_t k = 0; k + 1 < L.labels.size(); ++k) {
    const int fine = L.labels[k + 1];
    detail::require(L.labels[k] == fine + 1, "ladder: scales must be consecutive");
    L.transfers.push_back(pullback_matrix(tower.refinement(fine), L.sizes[k]));
  }
  return L;
}

/// One solve in a cascade: eigenpairs of L_rw (via L_sym), the initial guesses
/// u (random-walk form) handed to the solver, and the solve wall time.
struct ScaleSolve {
  EigenPacket packet;
  Matrix guess;
  double seconds = 0.0;
  double spectral_bound = 0.0;  // ||L_rw||_inf, an upper bound on |lambda|
};

inline double inf_norm(const SparseMatrix& A) {
  Vector rows = Vector::Zero(A.rows());
  for (Index c = 0; c < A.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(A, c); it; ++it) rows(it.row()) += std::abs(it.value());
  return rows.size() ? rows.maxCoeff() : 0.0;
}

namespace detail {

inline std::string scale_prefix(const ScaleLadder& L, std::size_t k) { return "scale " + std::to_string(L.label(k)) + ": "; }

template <class F>
auto with_scale(const ScaleLadder& L, std::size_t k, F&& f) {
  try {
    return f();
  } catch (const InputError& e) {
    throw InputError(scale_prefix(L, k) + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(scale_prefix(L, k) + e.what());
  }
}

}  // namespace detail

/// Solves one scale from a random-walk-form guess block (possibly empty).
inline ScaleSolve solve_scale(const GraphOperators& ops, const Matrix& guess, const SolverConfig& cfg) {
  SolverConfig c = cfg;
  c.m = static_cast<int>(std::min<Index>(cfg.m, ops.size()));
  Matrix g = guess.cols() > c.m ? Matrix(guess.leftCols(c.m)) : guess;
  const Matrix init = g.cols() > 0 ? ops.to_sym(g) : Matrix(ops.size(), 0);
  ScaleSolve s;
  s.guess = g;
  const auto t0 = std::chrono::steady_clock::now();
  const EigenPacket sym = solve_smallest(ops.sym, init, c);
  const auto t1 = std::chrono::steady_clock::now();
  s.seconds = std::chrono::duration<double>(t1 - t0).count();
  s.packet = sym_to_rw(sym, ops.graph.degrees(), ops.rw);
  s.spectral_bound = inf_norm(ops.rw);
  return s;
}

/// Warm-starts each scale with the transferred eigenvectors of the previous
/// (coarser) scale. `start` seeds the coarsest solve (random-walk form; may be
/// empty). Scale k pads its guess block with seed cfg.seed + k.
inline std::vector<ScaleSolve> first_cascade(const ScaleLadder& ladder, const std::vector<GraphOperators>& ops,
                                             const SolverConfig& cfg, const Matrix& start = Matrix()) {
  ladder.validate();
  detail::require(ops.size() == ladder.num_scales(), "first cascade: one operator per scale is required");
  for (std::size_t k = 0; k < ops.size(); ++k)
    detail::require(ops[k].size() == ladder.sizes[k], detail::scale_prefix(ladder, k) + "operator size does not match the ladder");

  std::vector<ScaleSolve> out;
  for (std::size_t k = 0; k < ops.size(); ++k) {
    SolverConfig c = cfg;
    c.seed = cfg.seed + k;
    Matrix guess;
    if (k == 0)
      guess = start.cols() > 0 ? start : Matrix(ops[0].size(), 0);
    else
      guess = ladder.transfers[k - 1] * out.back().packet.vectors;
    out.push_back(detail::with_scale(ladder, k, [&] { return solve_scale(ops[k], guess, c); }));
  }
  return out;
}

/// Contiguous index blocks of the eigenvalue list (0-based indices).
struct EigenspacePartition {
  std::vector<std::vector<int>> blocks;

  std::size_t size() const { return blocks.size(); }
  int block_of(int j) const {
    for (std::size_t b = 0; b < blocks.size(); ++b)
      for (int i : blocks[b])
        if (i == j) return static_cast<int>(b);
    return -1;
  }
};

/// 10^3 * machine epsilon * max |lambda|, where the maximum also runs over
/// `spectral_bound` so that an all-null block does not shrink delta to nothing.
inline double default_delta(const Vector& values, double spectral_bound = 0.0) {
  const double mx = std::max(values.size() ? values.cwiseAbs().maxCoeff() : 0.0, spectral_bound);
  return 1e3 * std::numeric_limits<double>::epsilon() * mx;
}

/// j joins the block of j-1 when |lambda_{j-1} - lambda_j| < delta or
/// lambda_j / lambda_{j-1} < 1 + epsilon; the ratio test is skipped when
/// lambda_{j-1} <= 0.
inline EigenspacePartition cluster_eigenvalues(const Vector& values, double delta, double epsilon) {
  detail::require(delta >= 0.0 && epsilon >= 0.0, "cluster_eigenvalues: thresholds must be non-negative");
  for (Index j = 1; j < values.size(); ++j)
    if (values(j) < values(j - 1)) throw InputError("cluster_eigenvalues: values are not sorted ascending");
  EigenspacePartition P;
  for (Index j = 0; j < values.size(); ++j) {
    bool join = false;
    if (j > 0) {
      const double prev = values(j - 1), cur = values(j);
      join = std::abs(prev - cur) < delta || (prev > 0.0 && cur / prev < 1.0 + epsilon);
    }
    if (join)
      P.blocks.back().push_back(static_cast<int>(j));
    else
      P.blocks.push_back({static_cast<int>(j)});
  }
  return P;
}

struct ScaleResult {
  int label = 0;
  Vector values;
  Vector residuals;
  Matrix v;          // eigenvectors of L_rw, unit length
  Matrix w;          // aligned basis, unit length, orthonormal within each block
  Matrix projected;  // Proj_V(p*(w^{coarser}_j)) before re-orthonormalization; zero columns where undefined
  std::vector<char> has_projection;
  Matrix u;          // initial guesses handed to the solver
  EigenspacePartition partition;
  double delta = 0.0;
  int iterations = 0;
  bool converged = false;
  double seconds = 0.0;
  std::vector<int> fallback_blocks;  // blocks completed from the eigenvectors after rank collapse
};

struct CascadeResult {
  std::vector<ScaleResult> scales;  // coarsest first
  std::optional<double> delta;      // nullopt: default_delta per scale
  double epsilon = 0.02;
  SolverConfig solver;
};

namespace detail {

// Completes `accepted` to `want` columns spanning span(V) with the eigenvectors
// least aligned with what is already accepted.
inline Matrix complete_from(const Matrix& accepted, const Matrix& V, Index want) {
  Matrix A = accepted;
  std::vector<char> used(static_cast<std::size_t>(V.cols()), 0);
  while (A.cols() < want) {
    Index best = -1;
    double best_align = std::numeric_limits<double>::infinity();
    for (Index c = 0; c < V.cols(); ++c) {
      if (used[static_cast<std::size_t>(c)]) continue;
      const double a = A.cols() ? (A.transpose() * V.col(c)).norm() / V.col(c).norm() : 0.0;
      if (a < best_align) {
        best_align = a;
        best = c;
      }
    }
    if (best < 0) break;
    used[static_cast<std::size_t>(best)] = 1;
    const Matrix q = orthonormalize_against(A, V.col(best), 1e-8);
    if (q.cols() == 1) {
      A.conservativeResize(Eigen::NoChange, A.cols() + 1);
      A.col(A.cols() - 1) = q.col(0);
    }
  }
  if (A.cols() < want) throw NumericalError("second cascade: eigenvector block is rank deficient");
  return A;
}

}  // namespace detail

/// Projects the transferred coarser basis onto each eigenvalue cluster's
/// eigenspace: w^i_j = Proj_V(p*(w^{i+1}_j)) with V = span{v^i_j : j in block},
/// then orthonormalizes each block by ordered Gram-Schmidt. Slots whose
/// projection is missing or collapses (relative norm < 1e-8) are filled with
/// the least-aligned eigenvectors of the block; collapses are flagged.
inline CascadeResult second_cascade(const std::vector<ScaleSolve>& first, const ScaleLadder& ladder,
                                    std::optional<double> delta, double epsilon) {
  ladder.validate();
  detail::require(first.size() == ladder.num_scales(), "second cascade: one solve per scale is required");
  CascadeResult res;
  res.delta = delta;
  res.epsilon = epsilon;
  for (std::size_t k = 0; k < first.size(); ++k) {
    const auto& pk = first[k].packet;
    ScaleResult s;
    s.label = ladder.label(k);
    s.values = pk.values;
    s.residuals = pk.residual_norms;
    s.v = pk.vectors;
    s.u = first[k].guess;
    s.iterations = pk.iterations;
    s.converged = pk.converged;
    s.seconds = first[k].seconds;
    s.delta = delta ? *delta : default_delta(pk.values, first[k].spectral_bound);
    s.partition = cluster_eigenvalues(pk.values, s.delta, epsilon);
    const Index n = s.v.rows(), m = s.v.cols();
    s.projected = Matrix::Zero(n, m);
    s.has_projection.assign(static_cast<std::size_t>(m), 0);

    if (k == 0) {
      s.w = s.v;
      res.scales.push_back(std::move(s));
      continue;
    }
    const Matrix U = ladder.transfers[k - 1] * res.scales[k - 1].w;
    s.w = Matrix::Zero(n, m);
    for (std::size_t b = 0; b < s.partition.blocks.size(); ++b) {
      const auto& block = s.partition.blocks[b];
      Matrix Vblock(n, static_cast<Index>(block.size()));
      for (std::size_t a = 0; a < block.size(); ++a) Vblock.col(static_cast<Index>(a)) = s.v.col(block[a]);
      const Matrix Vb = orthonormal_basis(Vblock, 1e-14);

      Matrix accepted(n, 0);
      std::vector<int> slots;    // filled in order
      std::vector<int> missing;  // to complete
      bool collapsed = false;
      for (int j : block) {
        if (j < U.cols()) {
          const Vector raw = Vb * (Vb.transpose() * U.col(j));
          s.projected.col(j) = raw;
          s.has_projection[static_cast<std::size_t>(j)] = 1;
          if (raw.norm() >= 1e-8 * U.col(j).norm()) {
            const Matrix q = orthonormalize_against(accepted, raw, 1e-8);
            if (q.cols() == 1) {
              accepted.conservativeResize(Eigen::NoChange, accepted.cols() + 1);
              accepted.col(accepted.cols() - 1) = q.col(0);
              slots.push_back(j);
              continue;
            }
          }
          collapsed = true;
        }
        missing.push_back(j);
      }
      const Index filled = accepted.cols();
      const Matrix full = detail::complete_from(accepted, Vb, static_cast<Index>(block.size()));
      for (std::size_t a = 0; a < slots.size(); ++a) s.w.col(slots[a]) = full.col(static_cast<Index>(a));
      for (std::size_t a = 0; a < missing.size(); ++a) s.w.col(missing[a]) = full.col(filled + static_cast<Index>(a));
      if (collapsed) s.fallback_blocks.push_back(static_cast<int>(b));
    }
    res.scales.push_back(std::move(s));
  }
  return res;
}

inline CascadeResult double_cascade(const ScaleLadder& ladder, const std::vector<GraphOperators>& ops,
                                    const SolverConfig& cfg, const Matrix& start, std::optional<double> delta,
                                    double epsilon) {
  auto r = second_cascade(first_cascade(ladder, ops, cfg, start), ladder, delta, epsilon);
  r.solver = cfg;
  return r;
}

/// A_jk = |<a_j, T b_k>| / (|a_j| |T b_k|): cosine alignment between the
/// columns of `fine` and the transferred columns of `coarse`.
inline Matrix alignment_matrix(const Matrix& fine, const SparseMatrix& transfer, const Matrix& coarse) {
  const Matrix Tb = transfer * coarse;
  Matrix A(fine.cols(), Tb.cols());
  for (Index j = 0; j < fine.cols(); ++j)
    for (Index k = 0; k < Tb.cols(); ++k) {
      const double den = fine.col(j).norm() * Tb.col(k).norm();
      A(j, k) = den > 0.0 ? std::abs(fine.col(j).dot(Tb.col(k))) / den : 0.0;
    }
  return A;
}

/// A(j, j) strictly exceeds every other entry of row j.
inline bool row_diagonally_dominant(const Matrix& A, Index j) {
  for (Index k = 0; k < A.cols(); ++k)
    if (k != j && !(A(j, j) > A(j, k))) return false;
  return true;
}

}  // namespace eigencascade
