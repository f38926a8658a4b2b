#pragma once

#include <cmath>
#include <span>

#include "finsler/types.hpp"

namespace finsler {

/// Pairs closer than this are coincident: the API raises on them, the
/// optimisers clamp the Euclidean norm to it.
inline constexpr double kEpsDist = 1e-12;

/// The canonical Randers space: R^m with constant drift omega, ||omega||_2 < 1.
/// omega = 0 is the Euclidean space.
class RandersSpace {
 public:
  /// Throws InvalidDrift unless ||omega||_2 < 1.
  explicit RandersSpace(Vector omega);

  static RandersSpace euclidean(Index dim);
  /// Drift of the given magnitude along the last coordinate axis.
  static RandersSpace along_last_axis(Index dim, double magnitude);

  Index dim() const { return omega_.size(); }
  const Vector& omega() const { return omega_; }
  double drift_norm() const { return drift_norm_; }
  bool is_euclidean() const { return drift_norm_ == 0.0; }

 private:
  Vector omega_;
  double drift_norm_ = 0.0;
};

/// Throws InvalidDrift if the invariants of `space` do not hold.
void validate_space(const RandersSpace& space);

/// d(x, y) = ||y - x||_2 + omega^T (y - x).
double randers_distance(const RandersSpace& space, std::span<const double> x,
                        std::span<const double> y);

struct DistanceGradient {
  Vector wrt_x;
  Vector wrt_y;
};

/// Gradients of d(x, y) in both arguments; wrt_x == -wrt_y exactly.
/// Throws DegeneratePair when ||y - x||_2 <= kEpsDist.
DistanceGradient randers_distance_grad(const RandersSpace& space, std::span<const double> x,
                                       std::span<const double> y);

namespace detail {

/// Euclidean part and drift part of d(y_i, y_j), with diff = y_i - y_j.
/// Returns ||diff||_2 clamped below by kEpsDist; drift = omega^T (y_j - y_i).
struct PairGeometry {
  double norm;
  double drift;
  double forward() const { return norm + drift; }   // d(y_i, y_j)
  double backward() const { return norm - drift; }  // d(y_j, y_i)
};

inline PairGeometry pair_geometry(const double* yi, const double* yj, const double* omega,
                                  Index dim, double* diff) {
  double sq = 0.0;
  double drift = 0.0;
  for (Index d = 0; d < dim; ++d) {
    diff[d] = yi[d] - yj[d];
    sq += diff[d] * diff[d];
  }
  if (omega != nullptr) {
    for (Index d = 0; d < dim; ++d) drift -= omega[d] * diff[d];
  }
  double norm = std::sqrt(sq);
  if (norm < kEpsDist) norm = kEpsDist;
  return {norm, drift};
}

}  // namespace detail

}  // namespace finsler
