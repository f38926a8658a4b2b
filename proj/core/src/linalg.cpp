#include "finsler/linalg.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "finsler/error.hpp"

namespace finsler::linalg {

EigenPairs symmetric_eigen(const Eigen::MatrixXd& a) {
  require(a.rows() == a.cols(), ErrorCode::DimensionMismatch, "matrix must be square");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a);
  require(solver.info() == Eigen::Success, ErrorCode::NumericalFailure,
          "symmetric eigendecomposition failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

namespace {

void orthogonalise(Vector& v, const Eigen::MatrixXd& basis, Index used) {
  // two passes of classical Gram-Schmidt
  for (int pass = 0; pass < 2; ++pass) {
    if (used > 0) v -= basis.leftCols(used) * (basis.leftCols(used).transpose() * v);
  }
}

}  // namespace

EigenPairs lanczos_largest(Index n, const std::function<void(const Vector&, Vector&)>& apply,
                           Index count, const Eigen::MatrixXd& deflate, Index max_steps) {
  require(count >= 1, ErrorCode::InvalidArgument, "count must be positive");
  const Index free_dim = n - deflate.cols();
  require(count <= free_dim, ErrorCode::InvalidArgument, "too many eigenpairs requested");
  const Index steps = std::min(std::max(max_steps, count), free_dim);

  Eigen::MatrixXd basis(n, steps);
  Vector alpha = Vector::Zero(steps);
  Vector beta = Vector::Zero(steps);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = 1.0 + 0.5 * std::sin(1.7 * static_cast<double>(i) + 0.3);
  auto project = [&deflate](Vector& x) {
    if (deflate.cols() > 0) {
      for (int pass = 0; pass < 2; ++pass) x -= deflate * (deflate.transpose() * x);
    }
  };
  project(v);
  double norm = v.norm();
  require(norm > 0.0, ErrorCode::NumericalFailure, "Lanczos start vector vanished");
  v /= norm;

  Index built = 0;
  Vector w(n);
  for (Index s = 0; s < steps; ++s) {
    basis.col(s) = v;
    built = s + 1;
    apply(v, w);
    project(w);
    alpha(s) = v.dot(w);
    orthogonalise(w, basis, built);
    project(w);
    const double b = w.norm();
    if (s + 1 == steps) break;
    if (b <= 1e-12 * std::max(1.0, std::abs(alpha(s)))) {
      // invariant subspace: restart with a deterministic vector orthogonal to the basis
      Vector r(n);
      for (Index i = 0; i < n; ++i) r(i) = std::cos(2.3 * static_cast<double>(i * (s + 2)) + 0.7);
      project(r);
      orthogonalise(r, basis, built);
      const double rn = r.norm();
      if (rn <= 1e-10) break;
      beta(s) = 0.0;
      v = r / rn;
      continue;
    }
    beta(s) = b;
    v = w / b;
  }

  // Rayleigh-Ritz on the basis: T = Q^T A Q computed explicitly for accuracy
  Eigen::MatrixXd q = basis.leftCols(built);
  Eigen::MatrixXd aq(n, built);
  Vector col(n);
  for (Index s = 0; s < built; ++s) {
    apply(q.col(s), col);
    aq.col(s) = col;
  }
  Eigen::MatrixXd t = q.transpose() * aq;
  t = 0.5 * (t + t.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(t);
  require(solver.info() == Eigen::Success, ErrorCode::NumericalFailure, "Ritz problem failed");
  const Index take = std::min(count, built);
  EigenPairs out;
  out.values = solver.eigenvalues().tail(take);
  out.vectors = q * solver.eigenvectors().rightCols(take);
  return out;
}

void canonical_signs(Eigen::Ref<Eigen::MatrixXd> columns) {
  for (Index c = 0; c < columns.cols(); ++c) {
    Index best = 0;
    double mag = -1.0;
    for (Index r = 0; r < columns.rows(); ++r) {
      const double m = std::abs(columns(r, c));
      // tolerance keeps the choice stable against rounding between equal entries
      if (m > mag * (1.0 + 1e-9) + 1e-300) {
        mag = m;
        best = r;
      }
    }
    if (columns.rows() > 0 && columns(best, c) < 0.0) columns.col(c) *= -1.0;
  }
}

Eigen::MatrixXd symmetric_pinv(const Eigen::MatrixXd& a, double cutoff, Index* null_dim,
                               double* condition) {
  const EigenPairs eig = symmetric_eigen(a);
  const double top = eig.values.cwiseAbs().maxCoeff();
  Vector inv = Vector::Zero(eig.values.size());
  Index dropped = 0;
  double smallest = top;
  for (Index i = 0; i < eig.values.size(); ++i) {
    const double l = eig.values(i);
    if (std::abs(l) <= cutoff * top || top == 0.0) {
      ++dropped;
    } else {
      inv(i) = 1.0 / l;
      smallest = std::min(smallest, std::abs(l));
    }
  }
  if (null_dim != nullptr) *null_dim = dropped;
  if (condition != nullptr) *condition = top == 0.0 ? 0.0 : top / smallest;
  return eig.vectors * inv.asDiagonal() * eig.vectors.transpose();
}

}  // namespace finsler::linalg
