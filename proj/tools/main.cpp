#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "finsler/datasets.hpp"
#include "finsler/error.hpp"
#include "finsler/eval.hpp"
#include "finsler/io.hpp"
#include "finsler/pipeline.hpp"
#include "json.hpp"
#include "manifest.hpp"
#include "svg.hpp"

namespace fs = std::filesystem;
using namespace finsler;
using nlohmann::json;

namespace {

constexpr int kUsage = 2;
constexpr int kData = 3;
constexpr int kNumerical = 4;

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::InvalidDrift:
    case ErrorCode::TooLarge:
      return kUsage;
    case ErrorCode::DimensionMismatch:
    case ErrorCode::ParseError:
      return kData;
    case ErrorCode::DegeneratePair:
    case ErrorCode::InfeasibleTarget:
    case ErrorCode::NonConvergence:
    case ErrorCode::DisconnectedGraph:
    case ErrorCode::NumericalFailure:
      return kNumerical;
  }
  return kNumerical;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCode::ParseError, "cannot write " + path.string());
  return out;
}

void write_csv(const fs::path& path, const RowMatrix& x, const std::string& prefix) {
  auto out = open_out(path);
  for (Index j = 0; j < x.cols(); ++j) out << prefix << (j + 1) << (j + 1 < x.cols() ? ',' : '\n');
  for (Index i = 0; i < x.rows(); ++i)
    for (Index j = 0; j < x.cols(); ++j) out << format_double(x(i, j)) << (j + 1 < x.cols() ? ',' : '\n');
}

void write_labels(const fs::path& path, const Labels& labels) {
  auto out = open_out(path);
  for (int l : labels) out << l << '\n';
}

fs::path with_suffix(const fs::path& base, const std::string& suffix) {
  fs::path p = base;
  p.replace_extension();
  return p.string() + suffix;
}

// ---- generate

struct GenerateArgs {
  std::string kind;
  Index n = 0;
  int classes = 5;
  Index dims = 10;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_generate(const GenerateArgs& a) {
  const fs::path out = a.out.empty() ? fs::path(a.kind + ".csv") : fs::path(a.out);
  if (a.kind == "disk") {
    const auto d = gen_disk(a.n ? a.n : 300);
    write_csv(out, d.values(), "x");
  } else if (a.kind == "swissroll") {
    const auto s = gen_swiss_roll(a.n ? a.n : 2000);
    write_csv(out, s.points.values(), "x");
    write_csv(with_suffix(out, "_uv.csv"), s.uv, "uv");
  } else {
    PersistenceOptions o;
    if (a.n) o.n = a.n;
    o.classes = a.classes;
    o.dims = a.dims;
    o.seed = a.seed;
    const auto p = gen_persistence(o);
    write_csv(out, p.points.values(), "x");
    write_labels(with_suffix(out, "_labels.csv"), p.labels);
  }
  std::cout << out.string() << '\n';
  return 0;
}

// ---- embed

struct EmbedArgs {
  std::string points;
  std::string method = "finsler-umap";
  PipelineConfig config;
  std::optional<double> omega;
  std::optional<int> epochs;
  std::optional<double> lr;
  std::optional<Index> k_plus;
  std::string knn = "auto";
  std::string out;
  std::string from_manifest;
};

void run_embed(cli::Manifest m) {
  const Pipeline pipeline = build_method(m.config);
  const DataMatrix data = load_points_csv(m.input);
  m.input_sha1 = cli::git_blob_sha1(m.input);
  const auto t0 = std::chrono::steady_clock::now();
  const RunResult r = pipeline.run(data);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  require(r.embedding.coords().allFinite(), ErrorCode::NumericalFailure, "embedding has non-finite coordinates");
  {
    auto out = open_out(m.embedding);
    write_coords_tsv(out, r.embedding.coords());
  }
  {
    auto out = open_out(m.trace);
    write_trace_tsv(out, r.trace, r.trace_name.empty() ? "loss" : r.trace_name);
  }
  auto out = open_out(with_suffix(m.embedding, ".json"));
  out << cli::manifest_to_json(m, pipeline, secs).dump(2) << '\n';
  std::cout << m.embedding.string() << '\n';
}

int cmd_embed(EmbedArgs a) {
  cli::Manifest m;
  if (!a.from_manifest.empty()) {
    m = cli::load_manifest(a.from_manifest);
    const std::string recorded = m.input_sha1;
    require(cli::git_blob_sha1(m.input) == recorded, ErrorCode::ParseError,
            "input " + m.input.string() + " changed since the manifest was written");
    if (!a.out.empty()) {
      m.embedding = a.out;
      m.trace = with_suffix(a.out, ".trace.tsv");
    }
    run_embed(m);
    return 0;
  }
  PipelineConfig& c = a.config;
  c.method = parse_method(a.method, &m.extended);
  if (m.extended) c.geodesic = true;
  c.omega = a.omega;
  c.epochs = a.epochs;
  c.learning_rate = a.lr;
  c.k_plus = a.k_plus;
  c.knn = a.knn == "exact" ? KnnAlgorithm::Exact : a.knn == "descent" ? KnnAlgorithm::Descent : KnnAlgorithm::Auto;
  require(!c.k_plus || c.geodesic, ErrorCode::InvalidArgument, "--kplus needs --geodesic");
  m.config = c;
  m.input = fs::absolute(a.points);
  const fs::path out = a.out.empty() ? fs::path(std::string(method_name(c.method)) + ".tsv") : fs::path(a.out);
  m.embedding = fs::absolute(out);
  m.trace = with_suffix(m.embedding, ".trace.tsv");
  run_embed(m);
  return 0;
}

// ---- eval

struct EvalArgs {
  std::string labels;
  std::string embedding;
  std::string pred;
  std::vector<std::string> scores;
  std::vector<std::uint64_t> kmeans_seeds{0};
  bool no_shape = false;
  std::string out;
};

int cmd_eval(const EvalArgs& a) {
  const Labels truth = load_labels_csv(a.labels).labels;
  ScoreReport report;
  if (!a.pred.empty()) {
    report.scores = label_scores(truth, load_labels_csv(a.pred).labels);
    report.metadata["prediction"] = a.pred;
  } else {
    const RowMatrix coords = load_coords_tsv(a.embedding);
    require(coords.rows() == static_cast<Index>(truth.size()), ErrorCode::DimensionMismatch,
            "embedding has " + std::to_string(coords.rows()) + " rows, labels " + std::to_string(truth.size()));
    EvaluationOptions o;
    o.kmeans_seeds = a.kmeans_seeds;
    o.shape_scores = !a.no_shape;
    report = evaluate_embedding(coords, truth, o);
    report.metadata["embedding"] = a.embedding;
  }
  report.metadata["labels"] = a.labels;
  if (!a.scores.empty()) {
    std::map<std::string, double> kept;
    for (const auto& s : a.scores) {
      const auto it = report.scores.find(s);
      require(it != report.scores.end(), ErrorCode::InvalidArgument, "unknown score '" + s + "'");
      kept.insert(*it);
    }
    report.scores = std::move(kept);
  }
  json j;
  j["scores"] = report.scores;
  j["metadata"] = report.metadata;
  j["out_of_range"] = report.out_of_range();
  const std::string text = j.dump(2) + "\n";
  if (a.out.empty()) {
    std::cout << text;
  } else {
    open_out(a.out) << text;
  }
  return report.out_of_range().empty() ? 0 : kNumerical;
}

// ---- plot

struct PlotArgs {
  std::string embedding;
  std::string labels;
  std::string color_by;
  std::string title;
  std::string out = "embedding.svg";
};

int cmd_plot(const PlotArgs& a) {
  const RowMatrix coords = load_coords_tsv(a.embedding);
  std::optional<Labels> labels;
  if (!a.labels.empty()) labels = load_labels_csv(a.labels).labels;
  cli::PlotOptions o;
  o.title = a.title;
  const std::string mode = a.color_by.empty() ? (labels ? "label" : "none") : a.color_by;
  o.color_by = mode == "label" ? cli::ColorBy::Label : mode == "axis" ? cli::ColorBy::Axis : cli::ColorBy::None;
  std::ostringstream svg;
  cli::write_svg(svg, coords, labels, o);
  open_out(a.out) << svg.str();
  std::cout << a.out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finsler (Randers) embeddings: t-SNE, UMAP and MDS with an asymmetric drift"};
  app.require_subcommand(1);
  int threads = 1;
  app.add_option("--threads", threads, "worker threads (FINSLER_THREADS overrides)")->check(CLI::PositiveNumber);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "write a synthetic data set as CSV");
  g->add_option("kind", gen.kind, "disk | swissroll | persistence")
      ->required()
      ->check(CLI::IsMember({"disk", "swissroll", "persistence"}));
  g->add_option("--n", gen.n, "number of points (swissroll: target)");
  g->add_option("--classes", gen.classes, "persistence classes")->check(CLI::Range(2, 1000));
  g->add_option("--dims", gen.dims, "persistence ambient dimension")->check(CLI::PositiveNumber);
  g->add_option("--seed", gen.seed);
  g->add_option("--out,-o", gen.out, "points CSV (labels / uv go next to it)");

  EmbedArgs emb;
  auto* e = app.add_subcommand("embed", "embed a points CSV; writes TSV, trace TSV and manifest JSON");
  auto* points = e->add_option("points", emb.points, "points CSV")->check(CLI::ExistingFile);
  auto* method = e->add_option("--method,-m", emb.method,
                               "tsne | finsler-tsne | umap | finsler-umap | extended-umap | extended-finsler-umap | "
                               "isomap | finsler-mds-gd | finsler-smacof");
  auto* dim = e->add_option("--dim", emb.config.dim, "target dimension m (Finsler methods use m + 1)");
  auto* omega = e->add_option("--omega", emb.omega, "drift magnitude in [0, 1)");
  auto* same = e->add_flag("--same-dim", emb.config.same_dimension, "Finsler methods embed in m, not m + 1");
  auto* k = e->add_option("--k", emb.config.k, "neighbours")->check(CLI::PositiveNumber);
  auto* perp = e->add_option("--perplexity", emb.config.perplexity)->check(CLI::PositiveNumber);
  auto* md = e->add_option("--min-dist", emb.config.min_dist);
  auto* spread = e->add_option("--spread", emb.config.spread)->check(CLI::PositiveNumber);
  auto* epochs = e->add_option("--epochs", emb.epochs)->check(CLI::PositiveNumber);
  auto* lr = e->add_option("--lr", emb.lr, "learning rate")->check(CLI::PositiveNumber);
  auto* seed = e->add_option("--seed", emb.config.seed);
  auto* kplus = e->add_option("--kplus", emb.k_plus, "edges kept per node after geodesic extension");
  auto* geo = e->add_flag("--geodesic", emb.config.geodesic, "geodesically extend the kNN graph first");
  auto* knn = e->add_option("--knn", emb.knn)->check(CLI::IsMember({"auto", "exact", "descent"}));
  auto* sym = e->add_flag("--symmetric-updates", emb.config.symmetric_updates, "UMAP: move both ends of every edge");
  auto* gd = e->add_flag("--plain-gd", emb.config.plain_gd, "t-SNE: no momentum or exaggeration");
  auto* iters = e->add_option("--smacof-iterations", emb.config.smacof_iterations)->check(CLI::PositiveNumber);
  e->add_option("--out,-o", emb.out, "embedding TSV");
  auto* from = e->add_option("--from-manifest", emb.from_manifest, "rerun a recorded manifest")
                   ->check(CLI::ExistingFile);
  for (auto* o : {points, method, dim, omega, same, k, perp, md, spread, epochs, lr, seed, kplus, geo, knn, sym, gd,
                  iters})
    from->excludes(o);

  EvalArgs ev;
  auto* v = app.add_subcommand("eval", "score an embedding (kMeans + shape scores) or a label file");
  v->add_option("--labels,-l", ev.labels, "ground-truth labels")->required()->check(CLI::ExistingFile);
  auto* ve = v->add_option("--embedding,-e", ev.embedding, "embedding TSV")->check(CLI::ExistingFile);
  auto* vp = v->add_option("--pred,-p", ev.pred, "predicted labels")->check(CLI::ExistingFile);
  ve->excludes(vp);
  v->add_option("--scores", ev.scores, "subset of ami ari nmi hom com vm fmi sil dbi chi knn_acc")->delimiter(',');
  v->add_option("--kmeans-seeds", ev.kmeans_seeds, "kMeans seeds to average over")->delimiter(',');
  v->add_flag("--no-shape", ev.no_shape, "skip silhouette / DBI / CHI / kNN accuracy");
  v->add_option("--out,-o", ev.out, "report JSON (stdout when omitted)");

  PlotArgs pl;
  auto* p = app.add_subcommand("plot", "SVG scatter of an embedding TSV");
  p->add_option("embedding", pl.embedding, "embedding TSV")->required()->check(CLI::ExistingFile);
  p->add_option("--labels,-l", pl.labels, "labels for colouring")->check(CLI::ExistingFile);
  p->add_option("--color-by", pl.color_by, "label | axis | none")->check(CLI::IsMember({"label", "axis", "none"}));
  p->add_option("--title", pl.title);
  p->add_option("--out,-o", pl.out, "SVG path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::CallForAllHelp& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return kUsage;
  }

  try {
    if (*e) {
      if (emb.from_manifest.empty() && emb.points.empty()) {
        std::cerr << "embed: a points CSV or --from-manifest is required\n";
        return kUsage;
      }
      emb.config.threads = threads;
      return cmd_embed(emb);
    }
    if (*g) return cmd_generate(gen);
    if (*v) {
      if (ev.embedding.empty() && ev.pred.empty()) {
        std::cerr << "eval: one of --embedding or --pred is required\n";
        return kUsage;
      }
      return cmd_eval(ev);
    }
    if (*p) return cmd_plot(pl);
  } catch (const Error& err) {
    std::cerr << "error (" << to_string(err.code()) << "): " << err.what() << '\n';
    return exit_code(err.code());
  } catch (const fs::filesystem_error& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kData;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kNumerical;
  }
  return kUsage;
}
