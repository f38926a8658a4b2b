#pragma once

#include "finsler/geometry.hpp"
#include "finsler/types.hpp"

namespace finsler {

/// N x m coordinates living in a canonical Randers space of dimension m
/// (omega = 0 for Euclidean embeddings).
class Embedding {
 public:
  /// Throws DimensionMismatch if coords.cols() != space.dim() and
  /// NumericalFailure if any coordinate is not finite.
  Embedding(RowMatrix coords, RandersSpace space);

  static Embedding euclidean(RowMatrix coords);

  Index n_points() const { return coords_.rows(); }
  Index dim() const { return coords_.cols(); }
  const RowMatrix& coords() const { return coords_; }
  const RandersSpace& space() const { return space_; }

 private:
  RowMatrix coords_;
  RandersSpace space_;
};

}  // namespace finsler
