#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace eigencascade {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

/// Invalid arguments or malformed input data.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A query outside the region where a construction is defined
/// (e.g. a point not covered by any partition-of-unity function).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Breakdown of a numerical procedure.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Normalized Laplacian requested on a graph with a zero-degree vertex and
/// no isolated-vertex policy.
class DegenerateDegreeError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw InputError(what);
}

}  // namespace detail

}  // namespace eigencascade
