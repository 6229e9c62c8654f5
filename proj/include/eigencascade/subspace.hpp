#pragma once

#include "eigencascade/common.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace eigencascade {

/// Gram-Schmidt of the columns of B against the orthonormal columns of Q and
/// against each other. Each column is normalized first and re-projected until
/// its norm stops dropping (at least twice); columns whose remaining norm falls
/// below `drop_tol` are dropped. `kept` receives the source column of each
/// output column.
inline Matrix orthonormalize_against(const Matrix& Q, const Matrix& B, double drop_tol = 1e-12,
                                     std::vector<Index>* kept = nullptr) {
  const Index n = B.rows();
  Matrix out(n, B.cols());
  Index k = 0;
  if (kept) kept->clear();
  for (Index c = 0; c < B.cols(); ++c) {
    Vector b = B.col(c);
    const double nrm = b.norm();
    if (!(nrm > 0.0) || !std::isfinite(nrm)) continue;
    b /= nrm;
    double prev = 1.0;
    double cur = 1.0;
    bool keep = true;
    for (int pass = 0; pass < 5; ++pass) {
      if (Q.cols() > 0) b.noalias() -= Q * (Q.transpose() * b);
      if (k > 0) b.noalias() -= out.leftCols(k) * (out.leftCols(k).transpose() * b);
      cur = b.norm();
      if (!(cur >= drop_tol)) {
        keep = false;
        break;
      }
      if (pass >= 1 && cur > 0.5 * prev) break;
      prev = cur;
    }
    if (!keep) continue;
    out.col(k++) = b / cur;
    if (kept) kept->push_back(c);
  }
  return out.leftCols(k);
}

inline Matrix orthonormal_basis(const Matrix& B, double drop_tol = 1e-12) {
  return orthonormalize_against(Matrix(B.rows(), 0), B, drop_tol);
}

/// Largest principal angle between span(A) and span(B), computed from sines so
/// tiny angles keep full relative accuracy. pi/2 when the dimensions differ.
inline double max_principal_angle(const Matrix& A, const Matrix& B) {
  const Matrix QA = orthonormal_basis(A, 1e-14);
  const Matrix QB = orthonormal_basis(B, 1e-14);
  if (QA.cols() != QB.cols()) return std::numbers::pi / 2;
  if (QA.cols() == 0) return 0.0;
  const Matrix R = QB - QA * (QA.transpose() * QB);
  Eigen::SelfAdjointEigenSolver<Matrix> es(R.transpose() * R, Eigen::EigenvaluesOnly);
  const double s2 = std::max(0.0, es.eigenvalues().maxCoeff());
  return std::asin(std::min(1.0, std::sqrt(s2)));
}

/// Orthogonal projector Q Q^T onto span(B).
inline Matrix projector(const Matrix& B) {
  const Matrix Q = orthonormal_basis(B, 1e-14);
  return Q * Q.transpose();
}

}  // namespace eigencascade
