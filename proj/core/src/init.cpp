#include "finsler/init.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "finsler/error.hpp"
#include "finsler/linalg.hpp"

namespace finsler {

namespace {

/// Dense solver up to this size, Lanczos beyond.
constexpr Index kDenseEigenLimit = 1200;

Eigen::MatrixXd column_pack(const RowMatrix& m) { return Eigen::MatrixXd(m); }

}  // namespace

Embedding pca_init(const DataMatrix& data, Index dim) {
  require(dim >= 1, ErrorCode::InvalidArgument, "dim must be positive");
  require(dim <= data.n_dims(), ErrorCode::InvalidArgument,
          "dim " + std::to_string(dim) + " exceeds the data dimension " + std::to_string(data.n_dims()));
  Eigen::MatrixXd x = column_pack(data.values());
  x.rowwise() -= x.colwise().mean();
  const Eigen::MatrixXd cov = x.transpose() * x;
  const auto eig = linalg::symmetric_eigen(cov);
  Eigen::MatrixXd dirs = eig.vectors.rightCols(dim).rowwise().reverse();
  linalg::canonical_signs(dirs);
  RowMatrix coords = x * dirs;
  return Embedding::euclidean(std::move(coords));
}

Embedding spectral_init(const Dissimilarities& p, Index dim) {
  const Index n = p.size();
  require(dim >= 1 && dim + 1 < n + 1 && dim < n, ErrorCode::InvalidArgument,
          "spectral init needs more points than dimensions");
  // connectivity of the affinity support
  std::vector<std::vector<Edge>> adjacency(static_cast<std::size_t>(n));
  Vector degree = Vector::Zero(n);
  for (Index i = 0; i < n; ++i) {
    for (const Entry& e : p.row(i)) {
      require(p.at(e.col, i) == e.value, ErrorCode::InvalidArgument,
              "spectral init needs symmetric affinities");
      if (e.value > 0.0) adjacency[static_cast<std::size_t>(i)].push_back({e.col, 1.0});
      degree(i) += e.value;
    }
  }
  const auto [components, ids] = weak_components(ProximityGraph(std::move(adjacency)));
  (void)ids;
  if (components > 1) {
    fail(ErrorCode::DisconnectedGraph,
         "affinity graph has " + std::to_string(components) +
             " components; join them with connect_components first",
         static_cast<double>(components));
  }
  const Vector inv_sqrt = degree.cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd vectors;
  if (n <= kDenseEigenLimit) {
    // L = I - D^-1/2 W D^-1/2, smallest eigenvalues first
    Eigen::MatrixXd lap = Eigen::MatrixXd::Identity(n, n);
    for (Index i = 0; i < n; ++i) {
      for (const Entry& e : p.row(i)) lap(i, e.col) -= inv_sqrt(i) * e.value * inv_sqrt(e.col);
    }
    const auto eig = linalg::symmetric_eigen(lap);
    vectors = eig.vectors.middleCols(1, dim);
  } else {
    // largest eigenvalues of I + D^-1/2 W D^-1/2 off the trivial direction
    Eigen::MatrixXd trivial = degree.cwiseSqrt();
    trivial /= trivial.norm();
    auto apply = [&](const Vector& x, Vector& y) {
      y = x;
      for (Index i = 0; i < n; ++i) {
        double acc = 0.0;
        for (const Entry& e : p.row(i)) acc += e.value * inv_sqrt(e.col) * x(e.col);
        y(i) += inv_sqrt(i) * acc;
      }
    };
    const auto eig = linalg::lanczos_largest(n, apply, dim, trivial, std::min<Index>(n - 1, 30 * dim + 200));
    vectors = eig.vectors.rowwise().reverse();
  }
  linalg::canonical_signs(vectors);
  RowMatrix coords = vectors;
  const double extent = coords.cwiseAbs().maxCoeff();
  require(extent > 0.0, ErrorCode::NumericalFailure, "spectral embedding collapsed");
  coords *= 10.0 / extent;
  return Embedding::euclidean(std::move(coords));
}

Embedding isomap_embed(const RowMatrix& distances, Index dim) {
  const Index n = distances.rows();
  require(distances.cols() == n, ErrorCode::DimensionMismatch, "distance matrix must be square");
  require(dim >= 1 && dim <= n, ErrorCode::InvalidArgument, "invalid embedding dimension");
  require(distances.allFinite(), ErrorCode::InvalidArgument,
          "distance matrix has non-finite entries; connect the graph first");
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const double a = distances(i, j), b = distances(j, i);
      require(std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)}),
              ErrorCode::InvalidArgument, "isomap needs a symmetric distance matrix");
    }
  }
  Eigen::MatrixXd g = distances.array().square().matrix();
  const Vector row_mean = g.rowwise().mean();
  const Vector col_mean = g.colwise().mean().transpose();
  const double grand = g.mean();
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) g(i, j) = -0.5 * (g(i, j) - row_mean(i) - col_mean(j) + grand);
  }
  g = 0.5 * (g + g.transpose()).eval();
  Vector values;
  Eigen::MatrixXd vectors;
  if (n <= kDenseEigenLimit) {
    const auto eig = linalg::symmetric_eigen(g);
    values = eig.values.tail(dim).reverse();
    vectors = eig.vectors.rightCols(dim).rowwise().reverse();
  } else {
    auto apply = [&g](const Vector& x, Vector& y) { y.noalias() = g * x; };
    const auto eig = linalg::lanczos_largest(n, apply, dim, Eigen::MatrixXd(n, 0), std::min<Index>(n, 30 * dim + 200));
    values = eig.values.reverse();
    vectors = eig.vectors.rowwise().reverse();
  }
  linalg::canonical_signs(vectors);
  RowMatrix coords(n, dim);
  for (Index c = 0; c < dim; ++c) coords.col(c) = vectors.col(c) * std::sqrt(std::max(values(c), 0.0));
  return Embedding::euclidean(std::move(coords));
}

Eigen::MatrixXd rotation_to_drift(const Vector& omega) {
  const Index m = omega.size();
  const double norm = omega.norm();
  require(m >= 1, ErrorCode::InvalidArgument, "empty drift");
  require(norm > 0.0, ErrorCode::InvalidDrift, "drift is zero; there is no axis to align");
  const Vector b = omega / norm;
  Vector a = Vector::Zero(m);
  a(m - 1) = 1.0;
  const double c = a.dot(b);
  Eigen::MatrixXd rot = Eigen::MatrixXd::Identity(m, m);
  if (c <= -1.0 + 1e-15) {
    // half turn in the (e_m, e_1) plane
    rot(m - 1, m - 1) = -1.0;
    if (m > 1) rot(0, 0) = -1.0;
    return rot;
  }
  const Eigen::MatrixXd k = b * a.transpose() - a * b.transpose();
  rot += k + (k * k) / (1.0 + c);
  return rot;
}

Embedding finsler_lift(const Embedding& base, const RandersSpace& space) {
  require(base.space().is_euclidean(), ErrorCode::InvalidArgument, "lift needs a Euclidean base");
  require(space.dim() == base.dim() + 1, ErrorCode::DimensionMismatch,
          "lift target must have one more dimension than the base");
  const Eigen::MatrixXd rot = rotation_to_drift(space.omega());
  RowMatrix lifted = RowMatrix::Zero(base.n_points(), space.dim());
  lifted.leftCols(base.dim()) = base.coords();
  RowMatrix coords = lifted * rot.transpose();
  return Embedding(std::move(coords), space);
}

}  // namespace finsler
