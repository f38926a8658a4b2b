#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace finsler {

using Index = std::ptrdiff_t;

/// Row-major dense matrix; every row is one point.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Integer class or cluster ids, one per point.
using Labels = std::vector<int>;

inline std::span<const double> row_span(const RowMatrix& m, Index i) {
  return {m.data() + i * m.cols(), static_cast<std::size_t>(m.cols())};
}

inline std::span<double> row_span(RowMatrix& m, Index i) {
  return {m.data() + i * m.cols(), static_cast<std::size_t>(m.cols())};
}

/// N points in R^n. All entries are finite.
class DataMatrix {
 public:
  DataMatrix() = default;
  explicit DataMatrix(RowMatrix values);

  Index n_points() const { return values_.rows(); }
  Index n_dims() const { return values_.cols(); }
  const RowMatrix& values() const { return values_; }
  std::span<const double> point(Index i) const { return row_span(values_, i); }

  double squared_distance(Index i, Index j) const;
  double distance(Index i, Index j) const;

 private:
  RowMatrix values_;
};

}  // namespace finsler
