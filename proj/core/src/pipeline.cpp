#include "finsler/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "finsler/error.hpp"
#include "finsler/init.hpp"
#include "finsler/mds.hpp"
#include "finsler/parallel.hpp"
#include "finsler/tsne.hpp"
#include "finsler/umap.hpp"

namespace finsler {

namespace {

constexpr double kMdsLearningRate = 0.1;

struct MethodName {
  Method method;
  std::string_view name;
};

constexpr MethodName kNames[] = {
    {Method::Tsne, "tsne"},
    {Method::FinslerTsne, "finsler-tsne"},
    {Method::Umap, "umap"},
    {Method::FinslerUmap, "finsler-umap"},
    {Method::Isomap, "isomap"},
    {Method::FinslerMdsGd, "finsler-mds-gd"},
    {Method::FinslerSmacof, "finsler-smacof"},
};

}  // namespace

std::string_view method_name(Method method) {
  for (const auto& entry : kNames) {
    if (entry.method == method) return entry.name;
  }
  return "unknown";
}

Method parse_method(std::string_view name, bool* extended) {
  if (extended != nullptr) *extended = false;
  if (name == "extended-umap" || name == "extended-finsler-umap") {
    if (extended != nullptr) *extended = true;
    return name == "extended-umap" ? Method::Umap : Method::FinslerUmap;
  }
  for (const auto& entry : kNames) {
    if (entry.name == name) return entry.method;
  }
  fail(ErrorCode::InvalidArgument, "unknown method '" + std::string(name) + "'");
}

bool is_finsler(Method method) {
  return method == Method::FinslerTsne || method == Method::FinslerUmap ||
         method == Method::FinslerMdsGd || method == Method::FinslerSmacof;
}

int resolved_epochs(const PipelineConfig& config) {
  if (config.epochs) return *config.epochs;
  switch (config.method) {
    case Method::Tsne:
    case Method::FinslerTsne: return 1000;
    case Method::Umap:
    case Method::FinslerUmap: return 200;
    case Method::FinslerMdsGd: return 100;
    case Method::FinslerSmacof: return config.smacof_iterations;
    case Method::Isomap: return 0;
  }
  return 0;
}

double resolved_learning_rate(const PipelineConfig& config) {
  if (config.learning_rate) return *config.learning_rate;
  switch (config.method) {
    case Method::Tsne:
    case Method::FinslerTsne: return 200.0;
    case Method::Umap:
    case Method::FinslerUmap: return 1.0;
    case Method::FinslerMdsGd: return kMdsLearningRate;
    default: return 0.0;
  }
}

Pipeline::Pipeline(PipelineConfig config, RandersSpace space)
    : method_(config.method), config_(std::move(config)), space_(std::move(space)) {}

Pipeline build_method(const PipelineConfig& config) {
  require(config.dim >= 1, ErrorCode::InvalidArgument, "dim must be positive");
  require(config.k >= 1, ErrorCode::InvalidArgument, "k must be positive");
  require(config.perplexity > 0.0, ErrorCode::InvalidArgument, "perplexity must be positive");
  require(!config.epochs || *config.epochs > 0, ErrorCode::InvalidArgument, "epochs must be positive");
  require(!config.learning_rate || *config.learning_rate > 0.0, ErrorCode::InvalidArgument,
          "learning rate must be positive");
  require(!config.k_plus || *config.k_plus >= 1, ErrorCode::InvalidArgument, "k_plus must be positive");
  require(config.smacof_iterations >= 1, ErrorCode::InvalidArgument, "SMACOF iterations must be positive");
  const double omega = config.omega.value_or(is_finsler(config.method) ? kDefaultOmega : 0.0);
  require(std::isfinite(omega) && omega >= 0.0 && omega < 1.0, ErrorCode::InvalidArgument,
          "omega magnitude must lie in [0, 1)");
  if (!is_finsler(config.method)) {
    require(omega == 0.0, ErrorCode::InvalidArgument,
            std::string(method_name(config.method)) + " is Euclidean and takes no drift");
    require(!config.same_dimension, ErrorCode::InvalidArgument,
            "same_dimension only applies to Finsler methods");
    return Pipeline(config, RandersSpace::euclidean(config.dim));
  }
  const Index dim = config.same_dimension ? config.dim : config.dim + 1;
  if (omega > 0.0) {
    require(dim >= 2, ErrorCode::InvalidArgument, "a Finsler embedding needs at least two dimensions");
  }
  PipelineConfig resolved = config;
  resolved.omega = omega;
  return Pipeline(std::move(resolved), RandersSpace::along_last_axis(dim, omega));
}

std::vector<std::string> Pipeline::stages() const {
  const bool geodesic = config_.geodesic;
  const bool twin = is_finsler(method_) && space_.is_euclidean();
  switch (method_) {
    case Method::Tsne:
    case Method::FinslerTsne: {
      std::vector<std::string> s{"knn"};
      if (geodesic) s.push_back("geodesic-truncate");
      s.insert(s.end(), {"perplexity-scales", "tsne-p"});
      if (method_ == Method::Tsne || twin) s.insert(s.end(), {"symmetrise-tsne-mean", "pca-init", "tsne"});
      else s.insert(s.end(), {"normalize-global", "pca-init", "finsler-lift", "finsler-tsne"});
      return s;
    }
    case Method::Umap:
    case Method::FinslerUmap: {
      std::vector<std::string> s{"knn", "connect-components"};
      if (geodesic) s.push_back("geodesic-truncate");
      s.insert(s.end(), {"umap-scales", "umap-p"});
      if (method_ == Method::Umap || twin) s.insert(s.end(), {"symmetrise-fuzzy-union", "spectral-init", "umap"});
      else s.insert(s.end(), {"spectral-init", "finsler-lift", "finsler-umap"});
      return s;
    }
    case Method::Isomap:
      return {"knn", "connect-components", "reverse-edges", "geodesic-full", "symmetrise-mean", "isomap"};
    case Method::FinslerMdsGd:
    case Method::FinslerSmacof: {
      std::vector<std::string> s{"knn", "connect-components", "umap-scales", "reverse-edges", "scale-by-source",
                                 "geodesic-full",
                                 "isomap-init"};
      if (!twin) s.push_back("finsler-lift");
      s.push_back(method_ == Method::FinslerMdsGd ? "adam-stress" : "finsler-smacof");
      return s;
    }
  }
  return {};
}

ProximityGraph build_knn_graph(const DataMatrix& data, const PipelineConfig& config) {
  Index k = config.k;
  if (config.method == Method::Tsne || config.method == Method::FinslerTsne) {
    k = std::max(k, static_cast<Index>(std::floor(3.0 * config.perplexity)) + 1);
  }
  k = std::min(k, data.n_points() - 1);
  require(k >= 1, ErrorCode::InvalidArgument, "need at least two points");
  bool exact = config.knn == KnnAlgorithm::Exact;
  if (config.knn == KnnAlgorithm::Auto) exact = data.n_points() < kExactKnnLimit;
  if (exact) return knn_exact(data, k);
  NnDescentOptions options;
  options.seed = config.seed;
  return knn_descent(data, k, options);
}

namespace {

RowMatrix mean_symmetric(const RowMatrix& d) { return 0.5 * (d + d.transpose()); }

Index base_dim(const RandersSpace& space, bool lift) { return lift ? space.dim() - 1 : space.dim(); }

Embedding scaled_pca(const DataMatrix& data, Index dim) {
  Embedding pca = pca_init(data, std::min(dim, data.n_dims()));
  RowMatrix coords = RowMatrix::Zero(data.n_points(), dim);
  coords.leftCols(pca.dim()) = pca.coords();
  const double mean = coords.col(0).mean();
  const double sd = std::sqrt((coords.col(0).array() - mean).square().mean());
  if (sd > 0.0) coords *= 1e-4 / sd;
  return Embedding::euclidean(std::move(coords));
}

Embedding maybe_lift(const Embedding& base, const RandersSpace& space, bool lift) {
  return lift ? finsler_lift(base, space) : base;
}

}  // namespace

FinslerTargets finsler_mds_targets(const DataMatrix& data, const PipelineConfig& config) {
  ProximityGraph knn = connect_components(build_knn_graph(data, config), data);
  LocalScales scales = umap_scales(knn, config.k);
  RowMatrix d = geodesic_full(scale_by_source(with_reverse_edges(knn), scales));
  return {std::move(d), std::move(knn), std::move(scales)};
}

RunResult Pipeline::run(const DataMatrix& data) const {
  const PipelineConfig& c = config_;
  require(data.n_points() >= 3, ErrorCode::InvalidArgument, "need at least three points");
  // a zero drift turns every Finsler method into its Euclidean twin
  const bool lift = is_finsler(method_) && !space_.is_euclidean();
  const int threads = resolve_threads(c.threads);
  const int epochs = resolved_epochs(c);
  const double lr = resolved_learning_rate(c);
  const Index k_plus = c.k_plus.value_or(kExtendedKPlus);

  switch (method_) {
    case Method::Tsne:
    case Method::FinslerTsne: {
      ProximityGraph graph = build_knn_graph(data, c);
      if (c.geodesic) graph = geodesic_truncated(graph, std::min(k_plus, data.n_points() - 1));
      LocalScales scales = perplexity_scales(graph, c.perplexity);
      const Dissimilarities rows = tsne_p(graph, scales);
      const Dissimilarities p = lift ? normalize_global(rows) : symmetrise(rows, SymmetrisationRule::TsneMean);
      const Embedding init = maybe_lift(scaled_pca(data, base_dim(space_, lift)), space_, lift);
      TsneConfig tc;
      tc.perplexity = c.perplexity;
      tc.epochs = epochs;
      tc.learning_rate = lr;
      tc.plain_gd = c.plain_gd;
      tc.threads = threads;
      TsneResult result = run_tsne(p, tc, init, space_);
      return {std::move(result.embedding), std::move(result.loss_trace), "kl", std::move(graph),
              std::move(scales), RowMatrix()};
    }
    case Method::Umap:
    case Method::FinslerUmap: {
      ProximityGraph graph = connect_components(build_knn_graph(data, c), data);
      Index k = c.k;
      if (c.geodesic) {
        k = std::min(k_plus, data.n_points() - 1);
        graph = geodesic_truncated(graph, k);
      }
      LocalScales scales = umap_scales(graph, k);
      const Dissimilarities asym = umap_p(graph, scales);
      const Dissimilarities sym = symmetrise(asym, SymmetrisationRule::UmapFuzzyUnion);
      const Embedding init = maybe_lift(spectral_init(sym, base_dim(space_, lift)), space_, lift);
      UmapConfig uc;
      uc.k = k;
      uc.min_dist = c.min_dist;
      uc.spread = c.spread;
      uc.epochs = epochs;
      uc.learning_rate = lr;
      uc.seed = c.seed;
      uc.symmetric_updates = c.symmetric_updates;
      uc.threads = threads;
      UmapResult result = run_umap(lift ? asym : sym, uc, init, space_);
      return {std::move(result.embedding), {}, "", std::move(graph), std::move(scales), RowMatrix()};
    }
    case Method::Isomap: {
      ProximityGraph graph = with_reverse_edges(connect_components(build_knn_graph(data, c), data));
      RowMatrix d = mean_symmetric(geodesic_full(graph));
      Embedding embedding = isomap_embed(d, space_.dim());
      return {std::move(embedding), {}, "", std::move(graph), LocalScales{}, std::move(d)};
    }
    case Method::FinslerMdsGd:
    case Method::FinslerSmacof: {
      FinslerTargets targets = finsler_mds_targets(data, c);
      const Embedding init =
          maybe_lift(isomap_embed(mean_symmetric(targets.distances), base_dim(space_, lift)), space_, lift);
      const StressProblem problem(targets.distances, space_);
      StressResult result = [&] {
        if (method_ == Method::FinslerSmacof) return run_finsler_smacof(problem, init, epochs);
        AdamOptions options;
        options.learning_rate = lr;
        options.epochs = epochs;
        return run_finsler_mds_gd(problem, init, options);
      }();
      return {std::move(result.embedding), std::move(result.stress_trace), "stress", std::move(targets.graph),
              std::move(targets.scales), std::move(targets.distances)};
    }
  }
  fail(ErrorCode::InvalidArgument, "unknown method");
}

SweepReport omega_sweep(const PipelineConfig& base, std::span<const double> magnitudes,
                        std::span<const std::uint64_t> seeds, const SweepRunner& runner) {
  require(!magnitudes.empty() && !seeds.empty(), ErrorCode::InvalidArgument,
          "sweep needs at least one magnitude and one seed");
  SweepReport report;
  report.rows.resize(magnitudes.size());
  for (std::size_t m = 0; m < magnitudes.size(); ++m) {
    report.rows[m].omega = magnitudes[m];
    report.rows[m].runs.resize(seeds.size());
  }
  const auto total = static_cast<Index>(magnitudes.size() * seeds.size());
  const int threads = resolve_threads(base.threads);
  parallel_for(total, threads, [&](Index begin, Index end) {
    for (Index r = begin; r < end; ++r) {
      const auto m = static_cast<std::size_t>(r) / seeds.size();
      const auto s = static_cast<std::size_t>(r) % seeds.size();
      PipelineConfig config = base;
      config.omega = magnitudes[m];
      config.seed = seeds[s];
      if (threads > 1) config.threads = 1;
      report.rows[m].runs[s] = runner(config);
    }
  });
  double best = -std::numeric_limits<double>::infinity();
  for (auto& row : report.rows) {
    for (const auto& run : row.runs) {
      for (const auto& [name, value] : run.scores) row.mean_scores[name] += value;
    }
    for (auto& [name, value] : row.mean_scores) value /= static_cast<double>(row.runs.size());
    const auto it = row.mean_scores.find(report.criterion);
    const double score = it == row.mean_scores.end() ? -std::numeric_limits<double>::infinity() : it->second;
    if (score > best) {
      best = score;
      report.best_omega = row.omega;
    }
  }
  if (best == -std::numeric_limits<double>::infinity()) report.best_omega = report.rows.front().omega;
  return report;
}

SweepReport omega_sweep(const PipelineConfig& base, const DataMatrix& data, const Labels& labels,
                        std::span<const double> magnitudes, std::span<const std::uint64_t> seeds) {
  require(static_cast<Index>(labels.size()) == data.n_points(), ErrorCode::InvalidArgument,
          "labels and data differ in length");
  auto runner = [&data, &labels](const PipelineConfig& config) {
    const Pipeline pipeline = build_method(config);
    const RunResult result = pipeline.run(data);
    EvaluationOptions options;
    options.kmeans_seeds = {config.seed};
    ScoreReport report = evaluate_embedding(result.embedding.coords(), labels, options);
    report.metadata["method"] = std::string(method_name(config.method));
    report.metadata["omega"] = std::to_string(pipeline.space().drift_norm());
    report.metadata["seed"] = std::to_string(config.seed);
    return report;
  };
  return omega_sweep(base, magnitudes, seeds, runner);
}

}  // namespace finsler
