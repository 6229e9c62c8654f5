#pragma once

#include "eigencascade/laplacian.hpp"
#include "eigencascade/subspace.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace eigencascade {

struct SolverConfig {
  int m = 16;            // number of requested pairs
  double tol = 1e-10;    // absolute residual tolerance ||Av - lambda v||
  int max_iters = 2000;
  std::uint64_t seed = 0;
  int guard = -1;        // extra block columns not required to converge; -1: max(4, m / 2)
};

/// Eigenpairs in ascending order of value. Vectors are orthonormal when they
/// come from solve_smallest; after sym_to_rw they are unit length and
/// D-orthogonal instead.
struct EigenPacket {
  Vector values;
  Matrix vectors;
  Vector residual_norms;
  int iterations = 0;
  bool converged = false;
  std::vector<double> trace_history;  // sum of the requested Ritz values, one entry per Rayleigh-Ritz step

  Index size() const { return values.size(); }
};

using BlockOperator = std::function<Matrix(const Matrix&)>;

/// An n x m orthonormal block whose first columns span the (orthonormalized)
/// columns of `init`; the rest are random Gaussian columns drawn from `seed`
/// and orthonormalized against everything before them. Linearly dependent
/// init columns are dropped and replaced by random ones.
inline Matrix pad_block(const Matrix& init, Index m, std::uint64_t seed, Index n = -1) {
  if (n < 0) n = init.rows();
  detail::require(init.cols() == 0 || init.rows() == n, "pad_block: init has the wrong number of rows");
  if (m > n) throw InputError("pad_block: requested " + std::to_string(m) + " columns in dimension " + std::to_string(n));
  detail::require(init.cols() <= m, "pad_block: init has more columns than requested");
  Matrix X = init.cols() > 0 ? orthonormal_basis(init) : Matrix(n, 0);
  if (X.cols() == m) return X;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N(0.0, 1.0);
  Matrix out(n, m);
  out.leftCols(X.cols()) = X;
  Index k = X.cols();
  int attempts = 0;
  while (k < m) {
    if (++attempts > 10 * m + 100) throw NumericalError("pad_block: could not complete an orthonormal block");
    Matrix r(n, 1);
    for (Index i = 0; i < n; ++i) r(i, 0) = N(rng);
    const Matrix q = orthonormalize_against(out.leftCols(k), r, 1e-8);
    if (q.cols() == 1) out.col(k++) = q.col(0);
  }
  return out;
}

namespace detail {

inline void rayleigh_ritz(const Matrix& S, const Matrix& AS, Index m, Matrix& C, Vector& theta) {
  Matrix H = S.transpose() * AS;
  H = 0.5 * (H + H.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> es(H);
  if (es.info() != Eigen::Success) throw NumericalError("Rayleigh-Ritz: dense eigensolve failed");
  theta = es.eigenvalues().head(m);
  C = es.eigenvectors().leftCols(m);
}

}  // namespace detail

/// Locally optimal block preconditioned conjugate gradient for the m smallest
/// eigenpairs of a symmetric operator.
///
/// Each iteration performs Rayleigh-Ritz on span[X, W, P] where W holds the
/// (preconditioned) residuals of the unconverged pairs and P the previous
/// search directions of those pairs. Converged pairs stay in X but contribute
/// no residual directions (soft locking). The basis is kept orthonormal with
/// the dropping Gram-Schmidt of orthonormalize_against.
///
/// `iterations` counts basis expansions: an init block that already consists of
/// eigenvectors returns after the initial Rayleigh-Ritz with iterations = 0.
/// Hitting max_iters returns the best iterate with converged = false.
inline EigenPacket solve_smallest(const BlockOperator& A, Index n, const Matrix& init, const SolverConfig& cfg,
                                  const BlockOperator* preconditioner = nullptr) {
  detail::require(cfg.m >= 1, "solver: m must be >= 1");
  detail::require(cfg.tol > 0.0, "solver: tol must be positive");
  detail::require(cfg.max_iters >= 0, "solver: max_iters must be >= 0");
  if (init.cols() > 0 && init.rows() != n) throw InputError("solver: initial block has the wrong number of rows");
  const Index want = cfg.m;
  if (want > n) throw InputError("solver: requested " + std::to_string(want) + " pairs of an operator of dimension " + std::to_string(n));
  const Index guard = std::min<Index>(n - want, cfg.guard >= 0 ? cfg.guard : std::max<Index>(4, want / 2));
  const Index m = want + guard;

  Matrix X = pad_block(init.cols() > want ? Matrix(init.leftCols(want)) : init, m, cfg.seed, n);
  Matrix AX = A(X);
  if (AX.rows() != n || AX.cols() != m) throw InputError("solver: operator dimension mismatch");

  EigenPacket out;
  Matrix C;
  Vector theta;
  detail::rayleigh_ritz(X, AX, m, C, theta);
  X = (X * C).eval();
  AX = (AX * C).eval();
  out.trace_history.push_back(theta.head(want).sum());

  Matrix P(n, 0);
  Matrix R(n, m);
  Vector res(m);
  int it = 0;
  for (;;) {
    R = AX - X * theta.asDiagonal();
    res = R.colwise().norm().transpose();
    std::vector<Index> active;
    bool done = true;
    for (Index j = 0; j < m; ++j)
      if (!(res(j) <= cfg.tol)) {
        active.push_back(j);
        if (j < want) done = false;
      }
    if (done) {
      out.converged = true;
      break;
    }
    if (it >= cfg.max_iters) break;
    ++it;

    Matrix W(n, static_cast<Index>(active.size()));
    for (std::size_t a = 0; a < active.size(); ++a) W.col(static_cast<Index>(a)) = R.col(active[a]);
    if (preconditioner) W = (*preconditioner)(W);

    Matrix search(n, W.cols() + (P.cols() > 0 ? static_cast<Index>(active.size()) : 0));
    search.leftCols(W.cols()) = W;
    if (P.cols() > 0)
      for (std::size_t a = 0; a < active.size(); ++a) search.col(W.cols() + static_cast<Index>(a)) = P.col(active[a]);

    const Matrix Q = orthonormalize_against(X, search, 1e-12);
    if (Q.cols() == 0) break;  // no new directions: stagnation
    const Matrix AQ = A(Q);

    Matrix S(n, m + Q.cols()), AS(n, m + Q.cols());
    S << X, Q;
    AS << AX, AQ;
    detail::rayleigh_ritz(S, AS, m, C, theta);
    X = S * C;
    AX = AS * C;
    P = Q * C.bottomRows(Q.cols());
    out.trace_history.push_back(theta.head(want).sum());

    // re-orthonormalize if the block drifts
    const double drift = (X.transpose() * X - Matrix::Identity(m, m)).cwiseAbs().maxCoeff();
    if (drift > 1e-12) {
      X = pad_block(X, m, cfg.seed + static_cast<std::uint64_t>(it), n);
      AX = A(X);
      detail::rayleigh_ritz(X, AX, m, C, theta);
      X = (X * C).eval();
      AX = (AX * C).eval();
      P.resize(n, 0);
    }
  }
  out.values = theta.head(want);
  out.vectors = X.leftCols(want);
  out.residual_norms = res.head(want);
  out.iterations = it;
  return out;
}

inline EigenPacket solve_smallest(const SparseMatrix& L, const Matrix& init, const SolverConfig& cfg) {
  const BlockOperator A = [&L](const Matrix& V) -> Matrix { return L * V; };
  return solve_smallest(A, L.rows(), init, cfg);
}

/// Converts eigenpairs of L_sym to eigenpairs of L_rw: v_rw = D^{-1/2} v_sym,
/// renormalized, with residuals recomputed against L_rw. Zero-degree vertices
/// keep their entries (both operators vanish there).
inline EigenPacket sym_to_rw(const EigenPacket& sym, const Vector& degree, const SparseMatrix& L_rw) {
  detail::require(sym.vectors.rows() == degree.size(), "sym_to_rw: degree vector does not match the packet");
  detail::require(L_rw.rows() == degree.size(), "sym_to_rw: operator does not match the packet");
  EigenPacket out = sym;
  Vector scale(degree.size());
  for (Index i = 0; i < degree.size(); ++i) scale(i) = degree(i) > 0.0 ? 1.0 / std::sqrt(degree(i)) : 1.0;
  out.vectors = scale.asDiagonal() * sym.vectors;
  for (Index j = 0; j < out.vectors.cols(); ++j) {
    const double nrm = out.vectors.col(j).norm();
    if (nrm > 0.0) out.vectors.col(j) /= nrm;
  }
  const Matrix R = L_rw * out.vectors - out.vectors * out.values.asDiagonal();
  out.residual_norms = R.colwise().norm().transpose();
  return out;
}

}  // namespace eigencascade
