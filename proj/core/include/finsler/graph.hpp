#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <utility>
#include <vector>

#include "finsler/types.hpp"

namespace finsler {

inline constexpr double kUnreachable = std::numeric_limits<double>::infinity();

struct Edge {
  Index target;
  double distance;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Sparse directed graph with non-negative finite edge lengths.
///
/// Out-edges of each node are kept sorted by (distance, target). Edge (i, j)
/// may exist without (j, i). Edges added by connect_components are recorded
/// in bridges() for auditing; they otherwise behave as ordinary edges.
class ProximityGraph {
 public:
  ProximityGraph() = default;
  /// Validates: no self edges, targets in range, finite non-negative lengths,
  /// at most one edge per ordered pair.
  explicit ProximityGraph(std::vector<std::vector<Edge>> out_edges,
                          std::vector<std::pair<Index, Index>> bridges = {});

  Index n_nodes() const { return static_cast<Index>(out_.size()); }
  const std::vector<Edge>& out_edges(Index i) const { return out_[static_cast<std::size_t>(i)]; }
  Index out_degree(Index i) const { return static_cast<Index>(out_edges(i).size()); }
  Index max_out_degree() const;
  std::size_t n_edges() const;
  /// Length of edge (i, j), or kUnreachable when absent.
  double edge_length(Index i, Index j) const;
  const std::vector<std::pair<Index, Index>>& bridges() const { return bridges_; }

  friend bool operator==(const ProximityGraph&, const ProximityGraph&) = default;

 private:
  std::vector<std::vector<Edge>> out_;
  std::vector<std::pair<Index, Index>> bridges_;
};

/// Exact k nearest Euclidean neighbours (self excluded, ties to the lower index).
ProximityGraph knn_exact(const DataMatrix& data, Index k);

struct NnDescentOptions {
  std::uint64_t seed = 0;
  int max_iters = 10;
  double sample_rate = 0.5;
  /// Stop once an iteration changes fewer than delta * N * k neighbour slots.
  double delta = 0.001;
};

/// Approximate kNN graph by nearest-neighbour descent (local joins over
/// sampled new/old neighbour lists). Deterministic for a given seed.
/// Falls back to knn_exact when N <= k + 1.
ProximityGraph knn_descent(const DataMatrix& data, Index k, const NnDescentOptions& options = {});

/// Fraction of exact neighbour slots recovered by `approx`.
double knn_recall(const ProximityGraph& approx, const ProximityGraph& exact);

/// Directed all-pairs shortest paths (Dijkstra from every node).
/// Row-major N x N, 0 on the diagonal, kUnreachable where no path exists.
/// O(N^2) memory.
RowMatrix geodesic_full(const ProximityGraph& graph);

/// For every node keeps the k_plus smallest finite shortest-path distances
/// as out-edges (ties to the lower index).
ProximityGraph geodesic_truncated(const ProximityGraph& graph, Index k_plus);

/// Number of weakly connected components and a component id per node.
std::pair<Index, std::vector<Index>> weak_components(const ProximityGraph& graph);

/// Greedily joins weakly connected components: repeatedly links the closest
/// pair of points (Euclidean) between two different components with a pair of
/// opposite edges, until the graph is weakly connected.
ProximityGraph connect_components(const ProximityGraph& graph, const DataMatrix& data);

/// Adds j -> i with the length of i -> j wherever only i -> j exists.
/// A weakly connected graph becomes strongly connected.
ProximityGraph with_reverse_edges(const ProximityGraph& graph);

/// Edge-list text format: header `#nodes N`, then `i<TAB>j<TAB>distance`.
void write_edge_list(std::ostream& out, const ProximityGraph& graph);
ProximityGraph read_edge_list(std::istream& in);

}  // namespace finsler
