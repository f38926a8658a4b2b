#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "finsler/dissim.hpp"
#include "finsler/embedding.hpp"
#include "finsler/types.hpp"

namespace finsler {

struct CurveParams {
  double a;
  double b;
  double residual_rms;  // over the fitting grid
};

/// Least-squares fit of (1 + a d^(2b))^-1 to the target curve (1 for
/// d < min_dist, exp(-(d - min_dist)/spread) beyond) on 300 points of
/// [0, 3 spread], by Levenberg-Marquardt.
CurveParams fit_ab(double min_dist, double spread);

struct UmapConfig {
  Index k = 15;
  double min_dist = 0.1;
  double spread = 1.0;
  /// Curve parameters; fitted from min_dist/spread when a or b is <= 0.
  double a = 0.0;
  double b = 0.0;
  int epochs = 200;
  int neg_samples = 5;
  double learning_rate = 1.0;
  double grad_clip = 4.0;
  std::uint64_t seed = 0;
  /// Apply c^r for both orientations of a negative pair and move the
  /// negative sample as well.
  bool symmetric_updates = false;
  /// Hogwild threads; > 1 makes runs nondeterministic.
  int threads = 1;
};

/// UMAP kernel (1 + a d^(2b))^-1.
double umap_q(double distance, double a, double b);

/// d/dy_i of -ln q and -ln(1 - q) for the Euclidean kernel. The gradient in
/// y_j is the negation of each.
Vector umap_attractive_grad(std::span<const double> yi, std::span<const double> yj, double a,
                            double b);
Vector umap_repulsive_grad(std::span<const double> yi, std::span<const double> yj, double a,
                           double b);

struct ForcePair {
  Vector attractive;
  Vector repulsive;
};

/// d/dy_i of c^a_ij = -ln q^F_ij and c^r_ij = -ln(1 - q^F_ij), q^F evaluated
/// on d(y_i, y_j). d/dy_j is exactly the negation of each.
ForcePair finsler_umap_grads(std::span<const double> yi, std::span<const double> yj,
                             const RandersSpace& space, double a, double b);

/// d/dy_j of the same c^a_ij and c^r_ij, evaluated from the tail side.
ForcePair finsler_umap_grads_tail(std::span<const double> yi, std::span<const double> yj,
                                  const RandersSpace& space, double a, double b);

/// Number of attractive updates each stored entry receives over `epochs`
/// epochs: round(epochs * p_ij / max p), entries in row order.
std::vector<int> edge_update_counts(const Dissimilarities& p, int epochs);

struct UmapResult {
  Embedding embedding;
  CurveParams curve;
};

/// Negative-sampling SGD on the (Finsler) UMAP cross-entropy. Each stored p_ij
/// is an ordered positive pair; its attractive update moves y_i and y_j, each
/// followed by neg_samples repulsive updates of y_i against uniformly drawn
/// points. Per-coordinate gradient clipping, linearly decaying step.
/// Throws NumericalFailure if a coordinate becomes non-finite.
UmapResult run_umap(const Dissimilarities& p, const UmapConfig& config, const Embedding& init,
                    const RandersSpace& space);

}  // namespace finsler
