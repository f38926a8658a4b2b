#pragma once

#include <vector>

#include "finsler/graph.hpp"
#include "finsler/types.hpp"

namespace finsler {

/// Per-point bandwidths. sigma_i > 0; rho_i (UMAP only, zero otherwise) is at
/// most the shortest out-edge of node i. `degenerate[i]` marks rows whose
/// target could not be met and whose sigma was set by convention.
struct LocalScales {
  std::vector<double> sigma;
  std::vector<double> rho;
  std::vector<bool> degenerate;
};

inline constexpr double kSigmaLower = 1e-12;
inline constexpr double kSigmaUpper = 1e6;
inline constexpr int kBisectionSteps = 100;
inline constexpr double kBisectionTolerance = 1e-5;

/// Solves 2^H(P_i) = perplexity per node by bisection on sigma_i, where P_i is
/// the softmax of -d_ij^2 / (2 sigma_i^2) over the out-neighbours of i.
/// Rows whose out-distances are all equal are flagged degenerate and get the
/// midpoint of the search interval. Throws InfeasibleTarget when perplexity is
/// not below the out-degree, NonConvergence (value = best sigma) otherwise.
LocalScales perplexity_scales(const ProximityGraph& graph, double perplexity);

/// UMAP bandwidths: rho_i = min out-distance, sigma_i solves
/// sum_j exp(-max(0, d_ij - rho_i) / sigma_i) = log2(k), clamped to
/// [1e-3 * mean out-distance of i, kSigmaUpper]. Clamped rows are flagged.
LocalScales umap_scales(const ProximityGraph& graph, Index k);

enum class Normalization { None, RowStochastic, GlobalSum1 };
enum class Symmetry { Asymmetric, Symmetric };

struct Entry {
  Index col;
  double value;
  friend bool operator==(const Entry&, const Entry&) = default;
};

/// Sparse data dissimilarities p_ij >= 0. Rows are sorted by column, the
/// diagonal is never stored and absent entries read as 0.
class Dissimilarities {
 public:
  Dissimilarities() = default;
  Dissimilarities(std::vector<std::vector<Entry>> rows, Normalization normalization,
                  Symmetry symmetry);

  Index size() const { return static_cast<Index>(rows_.size()); }
  const std::vector<Entry>& row(Index i) const { return rows_[static_cast<std::size_t>(i)]; }
  double at(Index i, Index j) const;
  std::size_t n_entries() const;
  double total() const;
  double max_value() const;
  Normalization normalization() const { return normalization_; }
  Symmetry symmetry() const { return symmetry_; }
  /// Dense N x N copy (zeros for absent entries).
  RowMatrix to_dense() const;

  friend bool operator==(const Dissimilarities&, const Dissimilarities&) = default;

 private:
  std::vector<std::vector<Entry>> rows_;
  Normalization normalization_ = Normalization::None;
  Symmetry symmetry_ = Symmetry::Asymmetric;
};

/// Row softmax of -d_ij^2 / (2 sigma_i^2) over the out-edges of each node.
Dissimilarities tsne_p(const ProximityGraph& graph, const LocalScales& scales);

/// Divides every entry by N. Turns row-stochastic t-SNE rows into a joint
/// distribution with total mass 1 while keeping the asymmetry.
Dissimilarities normalize_global(const Dissimilarities& p);

/// exp(-max(0, d_ij - rho_i) / sigma_i) over the out-edges of each node.
Dissimilarities umap_p(const ProximityGraph& graph, const LocalScales& scales);

/// Distances copied as dissimilarities.
Dissimilarities raw_p(const ProximityGraph& graph);
/// Every finite off-diagonal entry of a dense distance matrix.
Dissimilarities raw_p(const RowMatrix& distances);

enum class SymmetrisationRule { Mean, Max, TsneMean, UmapFuzzyUnion };

/// Symmetrises p; a missing reverse entry counts as 0.
/// TsneMean is Mean applied after normalize_global, i.e. (p_ij + p_ji) / (2N).
Dissimilarities symmetrise(const Dissimilarities& p, SymmetrisationRule rule);

/// Edge lengths ||x_j - x_i|| / sigma_i: the tangent-space distance of the
/// locally rescaled metric seen from the source point. Asymmetric in general.
ProximityGraph scale_by_source(const ProximityGraph& graph, const LocalScales& scales);

/// Symmetric neighbour distances from the linearly interpolated metric:
/// d_ij = (1/sigma_i + 1/sigma_j) / 2 * ||x_j - x_i||. Reciprocal pairs whose
/// raw lengths differ use their mean length.
ProximityGraph harmonic_fix(const ProximityGraph& graph, const LocalScales& scales);

/// ||P - P^T||_F / ||P + P^T||_F over the stored entries; 0 for symmetric p.
double asymmetry_measure(const Dissimilarities& p);

}  // namespace finsler
