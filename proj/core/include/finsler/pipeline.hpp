#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "finsler/dissim.hpp"
#include "finsler/embedding.hpp"
#include "finsler/eval.hpp"
#include "finsler/graph.hpp"
#include "finsler/types.hpp"

namespace finsler {

enum class Method { Tsne, FinslerTsne, Umap, FinslerUmap, Isomap, FinslerMdsGd, FinslerSmacof };

std::string_view method_name(Method method);
/// Accepts the names produced by method_name plus the preset
/// "extended-umap" / "extended-finsler-umap" (sets `extended` when non-null).
Method parse_method(std::string_view name, bool* extended = nullptr);
bool is_finsler(Method method);

enum class KnnAlgorithm { Auto, Exact, Descent };

/// Below this many points Auto uses exact neighbours.
inline constexpr Index kExactKnnLimit = 4096;
inline constexpr double kDefaultOmega = 0.1;
inline constexpr Index kExtendedKPlus = 50;

struct PipelineConfig {
  Method method = Method::FinslerUmap;
  /// Target dimension m of the Euclidean methods; Finsler methods embed in
  /// the Randers space R^(m+1) unless same_dimension is set.
  Index dim = 2;
  /// Drift magnitude along the last axis. Finsler default kDefaultOmega;
  /// must be unset or 0 for Euclidean methods.
  std::optional<double> omega;
  bool same_dimension = false;
  Index k = 15;
  double perplexity = 30.0;
  double min_dist = 0.1;
  double spread = 1.0;
  std::optional<int> epochs;
  std::optional<double> learning_rate;
  /// Geodesically extend the kNN graph and keep k_plus edges per node before
  /// estimating scales (t-SNE / UMAP families).
  bool geodesic = false;
  std::optional<Index> k_plus;
  KnnAlgorithm knn = KnnAlgorithm::Auto;
  std::uint64_t seed = 0;
  bool symmetric_updates = false;
  bool plain_gd = false;
  int smacof_iterations = 100;
  int threads = 1;
};

struct RunResult {
  Embedding embedding;
  /// Per-epoch KL (t-SNE) or stress (MDS family); empty for UMAP and Isomap.
  std::vector<double> trace;
  std::string trace_name;
  ProximityGraph graph;
  LocalScales scales;
  /// Dense target dissimilarities of the MDS family (empty otherwise).
  RowMatrix targets;
};

/// A validated method configuration: graph -> scales -> p -> init -> optimise.
class Pipeline {
 public:
  Method method() const { return method_; }
  const PipelineConfig& config() const { return config_; }
  /// Space of the produced embedding.
  const RandersSpace& space() const { return space_; }
  /// Human-readable stage list, e.g. {"knn", "umap-scales", "umap-p", ...}.
  std::vector<std::string> stages() const;

  RunResult run(const DataMatrix& data) const;

 private:
  friend Pipeline build_method(const PipelineConfig& config);
  Pipeline(PipelineConfig config, RandersSpace space);

  Method method_;
  PipelineConfig config_;
  RandersSpace space_;
};

/// Validates `config` and fixes the embedding space. Throws InvalidArgument
/// for a drift on a Euclidean method or a magnitude outside [0, 1).
Pipeline build_method(const PipelineConfig& config);

/// Method defaults resolved the way run() resolves them.
int resolved_epochs(const PipelineConfig& config);
double resolved_learning_rate(const PipelineConfig& config);

/// Dense asymmetric targets of the Finsler MDS family: directed shortest
/// paths over the kNN graph with edges rescaled by the source bandwidth.
struct FinslerTargets {
  RowMatrix distances;
  ProximityGraph graph;
  LocalScales scales;
};
FinslerTargets finsler_mds_targets(const DataMatrix& data, const PipelineConfig& config);

/// kNN graph per config.knn / config.k, optionally connected.
ProximityGraph build_knn_graph(const DataMatrix& data, const PipelineConfig& config);

struct SweepRow {
  double omega;
  std::vector<ScoreReport> runs;
  std::map<std::string, double> mean_scores;
};

struct SweepReport {
  std::vector<SweepRow> rows;
  double best_omega = 0.0;
  std::string criterion = "ami";
};

using SweepRunner = std::function<ScoreReport(const PipelineConfig&)>;

/// Runs every magnitude x seed through `runner`, averages the scores per
/// magnitude and picks the magnitude with the highest mean criterion score
/// (first on ties).
SweepReport omega_sweep(const PipelineConfig& base, std::span<const double> magnitudes,
                        std::span<const std::uint64_t> seeds, const SweepRunner& runner);

/// Default runner: run the pipeline on `data` and evaluate against `labels`.
SweepReport omega_sweep(const PipelineConfig& base, const DataMatrix& data, const Labels& labels,
                        std::span<const double> magnitudes, std::span<const std::uint64_t> seeds);

inline constexpr double kSweepMagnitudes[] = {0.001, 0.01, 0.1, 0.5};

}  // namespace finsler
