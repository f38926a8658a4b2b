#include "finsler/dissim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "finsler/error.hpp"

namespace finsler {

namespace {

double row_perplexity(const std::vector<Edge>& edges, double sigma, double min_sq) {
  const double inv = 1.0 / (2.0 * sigma * sigma);
  double z = 0.0;
  double weighted = 0.0;
  for (const Edge& e : edges) {
    const double shifted = (e.distance * e.distance - min_sq) * inv;
    const double w = std::exp(-shifted);
    z += w;
    weighted += w * shifted;
  }
  // H = ln z + E[shifted], in nats
  const double entropy = std::log(z) + weighted / z;
  return std::exp(entropy);
}

}  // namespace

LocalScales perplexity_scales(const ProximityGraph& graph, double perplexity) {
  require(perplexity > 0.0 && std::isfinite(perplexity), ErrorCode::InvalidArgument,
          "perplexity must be positive");
  const Index n = graph.n_nodes();
  LocalScales scales;
  scales.sigma.assign(static_cast<std::size_t>(n), 0.0);
  scales.rho.assign(static_cast<std::size_t>(n), 0.0);
  scales.degenerate.assign(static_cast<std::size_t>(n), false);
  const double midpoint = 0.5 * (kSigmaLower + kSigmaUpper);
  for (Index i = 0; i < n; ++i) {
    const auto& edges = graph.out_edges(i);
    const auto ui = static_cast<std::size_t>(i);
    if (static_cast<double>(edges.size()) <= perplexity) {
      fail(ErrorCode::InfeasibleTarget,
           "perplexity " + std::to_string(perplexity) + " is not below the out-degree " +
               std::to_string(edges.size()) + " of node " + std::to_string(i),
           perplexity);
    }
    const double dmin = edges.front().distance;
    const double dmax = edges.back().distance;
    if (dmax - dmin <= std::numeric_limits<double>::epsilon() * std::max(1.0, dmax)) {
      scales.sigma[ui] = midpoint;
      scales.degenerate[ui] = true;
      continue;
    }
    const double min_sq = dmin * dmin;
    double lo = kSigmaLower;
    double hi = kSigmaUpper;
    double best = midpoint;
    double best_err = std::numeric_limits<double>::infinity();
    bool converged = false;
    for (int step = 0; step < kBisectionSteps; ++step) {
      const double mid = 0.5 * (lo + hi);
      const double value = row_perplexity(edges, mid, min_sq);
      const double err = std::abs(value - perplexity);
      if (err < best_err) {
        best_err = err;
        best = mid;
      }
      if (err <= kBisectionTolerance) {
        converged = true;
        break;
      }
      if (value > perplexity) hi = mid;
      else lo = mid;
    }
    if (!converged) {
      fail(ErrorCode::NonConvergence,
           "perplexity bisection did not converge at node " + std::to_string(i), best);
    }
    scales.sigma[ui] = best;
  }
  return scales;
}

namespace {

double umap_row_sum(const std::vector<Edge>& edges, double rho, double sigma) {
  double total = 0.0;
  for (const Edge& e : edges) total += std::exp(-std::max(0.0, e.distance - rho) / sigma);
  return total;
}

}  // namespace

LocalScales umap_scales(const ProximityGraph& graph, Index k) {
  require(k >= 1, ErrorCode::InvalidArgument, "k must be positive");
  const Index n = graph.n_nodes();
  const double target = std::log2(static_cast<double>(k));
  LocalScales scales;
  scales.sigma.assign(static_cast<std::size_t>(n), 0.0);
  scales.rho.assign(static_cast<std::size_t>(n), 0.0);
  scales.degenerate.assign(static_cast<std::size_t>(n), false);
  for (Index i = 0; i < n; ++i) {
    const auto& edges = graph.out_edges(i);
    const auto ui = static_cast<std::size_t>(i);
    require(!edges.empty(), ErrorCode::InvalidArgument,
            "node " + std::to_string(i) + " has no out-edges");
    double mean = 0.0;
    for (const Edge& e : edges) mean += e.distance;
    mean /= static_cast<double>(edges.size());
    const double rho = edges.front().distance;
    const double sigma_min = std::max(1e-3 * mean, kSigmaLower);
    scales.rho[ui] = rho;
    if (umap_row_sum(edges, rho, sigma_min) >= target) {
      scales.sigma[ui] = sigma_min;
      scales.degenerate[ui] = true;
      continue;
    }
    if (umap_row_sum(edges, rho, kSigmaUpper) <= target) {
      scales.sigma[ui] = kSigmaUpper;
      scales.degenerate[ui] = true;
      continue;
    }
    double lo = sigma_min;
    double hi = kSigmaUpper;
    double mid = 0.5 * (lo + hi);
    for (int step = 0; step < kBisectionSteps; ++step) {
      mid = 0.5 * (lo + hi);
      const double value = umap_row_sum(edges, rho, mid);
      if (std::abs(value - target) <= kBisectionTolerance) break;
      if (value > target) hi = mid;
      else lo = mid;
    }
    scales.sigma[ui] = mid;
  }
  return scales;
}

Dissimilarities::Dissimilarities(std::vector<std::vector<Entry>> rows, Normalization normalization,
                                 Symmetry symmetry)
    : rows_(std::move(rows)), normalization_(normalization), symmetry_(symmetry) {
  const Index n = size();
  double grand = 0.0;
  for (Index i = 0; i < n; ++i) {
    auto& row = rows_[static_cast<std::size_t>(i)];
    std::sort(row.begin(), row.end(), [](const Entry& a, const Entry& b) { return a.col < b.col; });
    double sum = 0.0;
    for (std::size_t e = 0; e < row.size(); ++e) {
      const Entry& entry = row[e];
      require(entry.col >= 0 && entry.col < n && entry.col != i, ErrorCode::InvalidArgument,
              "dissimilarity entry out of range in row " + std::to_string(i));
      require(std::isfinite(entry.value) && entry.value >= 0.0, ErrorCode::InvalidArgument,
              "dissimilarities must be finite and non-negative");
      require(e == 0 || row[e - 1].col != entry.col, ErrorCode::InvalidArgument,
              "duplicate dissimilarity entry in row " + std::to_string(i));
      sum += entry.value;
    }
    if (normalization_ == Normalization::RowStochastic && !row.empty()) {
      require(std::abs(sum - 1.0) <= 1e-9, ErrorCode::InvalidArgument,
              "row " + std::to_string(i) + " is not stochastic");
    }
    grand += sum;
  }
  if (normalization_ == Normalization::GlobalSum1) {
    require(std::abs(grand - 1.0) <= 1e-9, ErrorCode::InvalidArgument,
            "dissimilarities do not sum to 1");
  }
  if (symmetry_ == Symmetry::Symmetric) {
    for (Index i = 0; i < n; ++i) {
      for (const Entry& e : rows_[static_cast<std::size_t>(i)]) {
        require(at(e.col, i) == e.value, ErrorCode::InvalidArgument,
                "dissimilarities declared symmetric are not");
      }
    }
  }
}

double Dissimilarities::at(Index i, Index j) const {
  const auto& r = row(i);
  auto it = std::lower_bound(r.begin(), r.end(), j, [](const Entry& e, Index c) { return e.col < c; });
  return (it != r.end() && it->col == j) ? it->value : 0.0;
}

std::size_t Dissimilarities::n_entries() const {
  std::size_t total = 0;
  for (const auto& r : rows_) total += r.size();
  return total;
}

double Dissimilarities::total() const {
  double sum = 0.0;
  for (const auto& r : rows_) {
    for (const Entry& e : r) sum += e.value;
  }
  return sum;
}

double Dissimilarities::max_value() const {
  double best = 0.0;
  for (const auto& r : rows_) {
    for (const Entry& e : r) best = std::max(best, e.value);
  }
  return best;
}

RowMatrix Dissimilarities::to_dense() const {
  RowMatrix dense = RowMatrix::Zero(size(), size());
  for (Index i = 0; i < size(); ++i) {
    for (const Entry& e : row(i)) dense(i, e.col) = e.value;
  }
  return dense;
}

namespace {

void check_scales(const ProximityGraph& graph, const LocalScales& scales) {
  const auto n = static_cast<std::size_t>(graph.n_nodes());
  require(scales.sigma.size() == n && scales.rho.size() == n, ErrorCode::DimensionMismatch,
          "scales do not match the graph");
  for (double s : scales.sigma) {
    require(s > 0.0 && std::isfinite(s), ErrorCode::InvalidArgument, "sigma must be positive");
  }
}

}  // namespace

Dissimilarities tsne_p(const ProximityGraph& graph, const LocalScales& scales) {
  check_scales(graph, scales);
  const Index n = graph.n_nodes();
  std::vector<std::vector<Entry>> rows(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const auto& edges = graph.out_edges(i);
    if (edges.empty()) continue;
    const double sigma = scales.sigma[static_cast<std::size_t>(i)];
    const double min_sq = edges.front().distance * edges.front().distance;
    auto& row = rows[static_cast<std::size_t>(i)];
    double z = 0.0;
    for (const Edge& e : edges) {
      const double w = std::exp(-(e.distance * e.distance - min_sq) / (2.0 * sigma * sigma));
      row.push_back({e.target, w});
      z += w;
    }
    for (Entry& e : row) e.value /= z;
  }
  return Dissimilarities(std::move(rows), Normalization::RowStochastic, Symmetry::Asymmetric);
}

Dissimilarities normalize_global(const Dissimilarities& p) {
  const Index n = p.size();
  double total = p.total();
  require(total > 0.0, ErrorCode::InvalidArgument, "cannot normalise empty dissimilarities");
  // row-stochastic input with every row populated divides by N exactly
  double divisor = static_cast<double>(n);
  if (p.normalization() != Normalization::RowStochastic) divisor = total;
  for (Index i = 0; i < n; ++i) {
    if (p.row(i).empty()) divisor = total;
  }
  std::vector<std::vector<Entry>> rows(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    rows[static_cast<std::size_t>(i)] = p.row(i);
    for (Entry& e : rows[static_cast<std::size_t>(i)]) e.value /= divisor;
  }
  return Dissimilarities(std::move(rows), Normalization::GlobalSum1, p.symmetry());
}

Dissimilarities umap_p(const ProximityGraph& graph, const LocalScales& scales) {
  check_scales(graph, scales);
  const Index n = graph.n_nodes();
  std::vector<std::vector<Entry>> rows(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    for (const Edge& e : graph.out_edges(i)) {
      rows[ui].push_back({e.target, std::exp(-std::max(0.0, e.distance - scales.rho[ui]) / scales.sigma[ui])});
    }
  }
  return Dissimilarities(std::move(rows), Normalization::None, Symmetry::Asymmetric);
}

Dissimilarities raw_p(const ProximityGraph& graph) {
  std::vector<std::vector<Entry>> rows(static_cast<std::size_t>(graph.n_nodes()));
  for (Index i = 0; i < graph.n_nodes(); ++i) {
    for (const Edge& e : graph.out_edges(i)) rows[static_cast<std::size_t>(i)].push_back({e.target, e.distance});
  }
  return Dissimilarities(std::move(rows), Normalization::None, Symmetry::Asymmetric);
}

Dissimilarities raw_p(const RowMatrix& distances) {
  require(distances.rows() == distances.cols(), ErrorCode::DimensionMismatch,
          "distance matrix must be square");
  std::vector<std::vector<Entry>> rows(static_cast<std::size_t>(distances.rows()));
  for (Index i = 0; i < distances.rows(); ++i) {
    for (Index j = 0; j < distances.cols(); ++j) {
      if (i != j && std::isfinite(distances(i, j))) rows[static_cast<std::size_t>(i)].push_back({j, distances(i, j)});
    }
  }
  return Dissimilarities(std::move(rows), Normalization::None, Symmetry::Asymmetric);
}

Dissimilarities symmetrise(const Dissimilarities& p, SymmetrisationRule rule) {
  const Index n = p.size();
  std::vector<std::vector<Entry>> rows(static_cast<std::size_t>(n));
  // union support: forward entries plus reversed ones
  for (Index i = 0; i < n; ++i) {
    for (const Entry& e : p.row(i)) {
      rows[static_cast<std::size_t>(i)].push_back({e.col, 0.0});
      rows[static_cast<std::size_t>(e.col)].push_back({i, 0.0});
    }
  }
  const double n_scale = rule == SymmetrisationRule::TsneMean ? static_cast<double>(n) : 1.0;
  for (Index i = 0; i < n; ++i) {
    auto& row = rows[static_cast<std::size_t>(i)];
    std::sort(row.begin(), row.end(), [](const Entry& a, const Entry& b) { return a.col < b.col; });
    row.erase(std::unique(row.begin(), row.end(), [](const Entry& a, const Entry& b) { return a.col == b.col; }),
              row.end());
    for (Entry& e : row) {
      const double a = p.at(i, e.col);
      const double b = p.at(e.col, i);
      switch (rule) {
        case SymmetrisationRule::Mean: e.value = 0.5 * (a + b); break;
        case SymmetrisationRule::Max: e.value = std::max(a, b); break;
        case SymmetrisationRule::TsneMean: e.value = 0.5 * (a + b) / n_scale; break;
        case SymmetrisationRule::UmapFuzzyUnion: e.value = a + b - a * b; break;
      }
    }
  }
  Normalization norm = Normalization::None;
  if (rule == SymmetrisationRule::TsneMean ||
      (rule == SymmetrisationRule::Mean && p.normalization() == Normalization::GlobalSum1)) {
    norm = Normalization::GlobalSum1;
  }
  if (norm == Normalization::GlobalSum1) {
    double total = 0.0;
    for (const auto& r : rows) {
      for (const Entry& e : r) total += e.value;
    }
    if (std::abs(total - 1.0) > 1e-9) norm = Normalization::None;
  }
  return Dissimilarities(std::move(rows), norm, Symmetry::Symmetric);
}

ProximityGraph scale_by_source(const ProximityGraph& graph, const LocalScales& scales) {
  check_scales(graph, scales);
  std::vector<std::vector<Edge>> out(static_cast<std::size_t>(graph.n_nodes()));
  for (Index i = 0; i < graph.n_nodes(); ++i) {
    const double sigma = scales.sigma[static_cast<std::size_t>(i)];
    for (const Edge& e : graph.out_edges(i)) out[static_cast<std::size_t>(i)].push_back({e.target, e.distance / sigma});
  }
  return ProximityGraph(std::move(out), graph.bridges());
}

ProximityGraph harmonic_fix(const ProximityGraph& graph, const LocalScales& scales) {
  check_scales(graph, scales);
  std::vector<std::vector<Edge>> out(static_cast<std::size_t>(graph.n_nodes()));
  for (Index i = 0; i < graph.n_nodes(); ++i) {
    const double si = scales.sigma[static_cast<std::size_t>(i)];
    for (const Edge& e : graph.out_edges(i)) {
      double length = e.distance;
      const double reverse = graph.edge_length(e.target, i);
      if (reverse != kUnreachable) length = 0.5 * (e.distance + reverse);
      const double sj = scales.sigma[static_cast<std::size_t>(e.target)];
      out[static_cast<std::size_t>(i)].push_back({e.target, 0.5 * (1.0 / si + 1.0 / sj) * length});
    }
  }
  return ProximityGraph(std::move(out), graph.bridges());
}

double asymmetry_measure(const Dissimilarities& p) {
  auto stored = [&p](Index i, Index j) {
    const auto& r = p.row(i);
    auto it = std::lower_bound(r.begin(), r.end(), j, [](const Entry& e, Index c) { return e.col < c; });
    return it != r.end() && it->col == j;
  };
  double diff = 0.0;
  double sum = 0.0;
  for (Index i = 0; i < p.size(); ++i) {
    for (const Entry& e : p.row(i)) {
      const double back = p.at(e.col, i);
      // one-sided entries stand for both ordered pairs of the union support
      const double weight = stored(e.col, i) ? 1.0 : 2.0;
      diff += weight * (e.value - back) * (e.value - back);
      sum += weight * (e.value + back) * (e.value + back);
    }
  }
  return sum == 0.0 ? 0.0 : std::sqrt(diff / sum);
}

}  // namespace finsler
