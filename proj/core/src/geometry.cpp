#include "finsler/geometry.hpp"

#include <cmath>
#include <string>

#include "finsler/embedding.hpp"
#include "finsler/error.hpp"

namespace finsler {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::DimensionMismatch: return "dimension mismatch";
    case ErrorCode::InvalidDrift: return "invalid drift";
    case ErrorCode::DegeneratePair: return "degenerate pair";
    case ErrorCode::InfeasibleTarget: return "infeasible target";
    case ErrorCode::NonConvergence: return "non-convergence";
    case ErrorCode::DisconnectedGraph: return "disconnected graph";
    case ErrorCode::ParseError: return "parse error";
    case ErrorCode::NumericalFailure: return "numerical failure";
    case ErrorCode::TooLarge: return "too large";
  }
  return "unknown error";
}

DataMatrix::DataMatrix(RowMatrix values) : values_(std::move(values)) {
  require(values_.allFinite(), ErrorCode::InvalidArgument, "data contains non-finite values");
}

double DataMatrix::squared_distance(Index i, Index j) const {
  return (values_.row(i) - values_.row(j)).squaredNorm();
}

double DataMatrix::distance(Index i, Index j) const { return std::sqrt(squared_distance(i, j)); }

RandersSpace::RandersSpace(Vector omega) : omega_(std::move(omega)) {
  require(omega_.size() > 0, ErrorCode::InvalidArgument, "space dimension must be positive");
  require(omega_.allFinite(), ErrorCode::InvalidDrift, "drift is not finite");
  drift_norm_ = omega_.norm();
  if (!(drift_norm_ < 1.0)) {
    fail(ErrorCode::InvalidDrift, "drift norm must be below 1, got " + std::to_string(drift_norm_),
         drift_norm_);
  }
}

RandersSpace RandersSpace::euclidean(Index dim) { return RandersSpace(Vector::Zero(dim)); }

RandersSpace RandersSpace::along_last_axis(Index dim, double magnitude) {
  require(dim > 0, ErrorCode::InvalidArgument, "space dimension must be positive");
  Vector omega = Vector::Zero(dim);
  omega(dim - 1) = magnitude;
  return RandersSpace(std::move(omega));
}

void validate_space(const RandersSpace& space) {
  if (!space.omega().allFinite() || !(space.omega().norm() < 1.0)) {
    fail(ErrorCode::InvalidDrift, "drift norm must be below 1");
  }
}

namespace {

void check_pair(const RandersSpace& space, std::span<const double> x, std::span<const double> y) {
  const auto dim = static_cast<std::size_t>(space.dim());
  require(x.size() == dim && y.size() == dim, ErrorCode::DimensionMismatch,
          "point dimension does not match the space");
}

}  // namespace

double randers_distance(const RandersSpace& space, std::span<const double> x,
                        std::span<const double> y) {
  check_pair(space, x, y);
  double sq = 0.0;
  double drift = 0.0;
  for (std::size_t d = 0; d < x.size(); ++d) {
    const double u = y[d] - x[d];
    sq += u * u;
    drift += space.omega()(static_cast<Index>(d)) * u;
  }
  return std::sqrt(sq) + drift;
}

DistanceGradient randers_distance_grad(const RandersSpace& space, std::span<const double> x,
                                       std::span<const double> y) {
  check_pair(space, x, y);
  const Index dim = space.dim();
  Vector u(dim);
  for (Index d = 0; d < dim; ++d) u(d) = y[static_cast<std::size_t>(d)] - x[static_cast<std::size_t>(d)];
  const double norm = u.norm();
  if (norm <= kEpsDist) fail(ErrorCode::DegeneratePair, "gradient requested at coincident points");
  Vector wrt_y = u / norm + space.omega();
  Vector wrt_x = -wrt_y;
  return {std::move(wrt_x), std::move(wrt_y)};
}

Embedding::Embedding(RowMatrix coords, RandersSpace space)
    : coords_(std::move(coords)), space_(std::move(space)) {
  require(coords_.cols() == space_.dim(), ErrorCode::DimensionMismatch,
          "embedding dimension " + std::to_string(coords_.cols()) + " does not match space dimension " +
              std::to_string(space_.dim()));
  require(coords_.allFinite(), ErrorCode::NumericalFailure, "embedding has non-finite coordinates");
}

Embedding Embedding::euclidean(RowMatrix coords) {
  const Index dim = coords.cols();
  return Embedding(std::move(coords), RandersSpace::euclidean(dim));
}

}  // namespace finsler
