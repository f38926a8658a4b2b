#pragma once

#include "finsler/dissim.hpp"
#include "finsler/embedding.hpp"
#include "finsler/geometry.hpp"
#include "finsler/types.hpp"

namespace finsler {

/// Centered data projected on its top `dim` principal directions. Each
/// direction is signed so that its largest-magnitude loading is positive.
Embedding pca_init(const DataMatrix& data, Index dim);

/// Rows of the `dim` eigenvectors of the symmetric normalised Laplacian
/// I - D^-1/2 W D^-1/2 following the trivial one (smallest eigenvalues first),
/// sign-normalised as pca_init and rescaled so the largest |coordinate| is 10.
/// `p` must be symmetric. Throws DisconnectedGraph if the affinity graph is
/// not connected.
Embedding spectral_init(const Dissimilarities& p, Index dim);

/// Classical scaling of a symmetric distance matrix: top `dim` eigenvectors of
/// G = -1/2 J D^(2) J scaled by sqrt(max(lambda, 0)).
/// Throws InvalidArgument for asymmetric or non-finite input.
Embedding isomap_embed(const RowMatrix& distances, Index dim);

/// Appends a zero coordinate to a Euclidean embedding and rotates so that the
/// new axis points along omega. `space.dim()` must be one more than the base
/// dimension; omega must be non-zero.
Embedding finsler_lift(const Embedding& base, const RandersSpace& space);

/// The rotation used by finsler_lift: maps e_m onto omega / ||omega||.
Eigen::MatrixXd rotation_to_drift(const Vector& omega);

}  // namespace finsler
