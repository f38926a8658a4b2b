#pragma once

#include <functional>

#include <Eigen/Core>

#include "finsler/types.hpp"

namespace finsler::linalg {

struct EigenPairs {
  Vector values;          // ascending
  Eigen::MatrixXd vectors;  // columns, matching `values`
};

/// Full symmetric eigendecomposition (Householder tridiagonalisation + QR),
/// eigenvalues ascending. Deterministic.
EigenPairs symmetric_eigen(const Eigen::MatrixXd& a);

/// Largest `count` eigenpairs of a symmetric operator y = A x given only as a
/// mat-vec, by Lanczos with full reorthogonalisation, restricted to the
/// orthogonal complement of `deflate` (columns assumed orthonormal, may be
/// empty). Deterministic start vector. Values ascending.
EigenPairs lanczos_largest(Index n, const std::function<void(const Vector&, Vector&)>& apply,
                           Index count, const Eigen::MatrixXd& deflate, Index max_steps);

/// Flips each column so that its largest-magnitude entry is positive
/// (first such entry on ties).
void canonical_signs(Eigen::Ref<Eigen::MatrixXd> columns);

/// Moore-Penrose pseudo-inverse of a symmetric matrix, eigenvalues with
/// |lambda| <= cutoff * max|lambda| treated as zero. `null_dim` receives the
/// number of discarded eigenvalues.
Eigen::MatrixXd symmetric_pinv(const Eigen::MatrixXd& a, double cutoff, Index* null_dim = nullptr,
                               double* condition = nullptr);

}  // namespace finsler::linalg
