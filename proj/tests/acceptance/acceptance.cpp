#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "finsler/datasets.hpp"
#include "finsler/eval.hpp"
#include "finsler/geometry.hpp"
#include "finsler/init.hpp"
#include "finsler/io.hpp"
#include "finsler/mds.hpp"
#include "finsler/pipeline.hpp"
#include "finsler/tsne.hpp"
#include "finsler/umap.hpp"
#include "support.hpp"

using namespace finsler;
namespace ft = finsler::testing;

#ifndef FINSLER_TEST_DATA
#define FINSLER_TEST_DATA "tests/data"
#endif

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double max_abs(const RowMatrix& a, const RowMatrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

Dissimilarities dense_p(const RowMatrix& m, Symmetry s) {
  std::vector<std::vector<Entry>> rows(static_cast<std::size_t>(m.rows()));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j)
      if (i != j && m(i, j) > 0) rows[static_cast<std::size_t>(i)].push_back({j, m(i, j)});
  return Dissimilarities(std::move(rows), Normalization::None, s);
}

RowMatrix random_targets(Index n, std::mt19937_64& rng, bool symmetric) {
  std::uniform_real_distribution<double> unif(0.5, 3.0);
  RowMatrix d = RowMatrix::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if (i != j) d(i, j) = unif(rng);
  if (symmetric) d = RowMatrix(0.5 * (d + d.transpose()));
  return d;
}

double umap_cost(const RandersSpace& s, const RowMatrix& y, double a, double b, bool attractive) {
  const double t = a * std::pow(randers_distance(s, row_span(y, 0), row_span(y, 1)), 2 * b);
  return attractive ? std::log1p(t) : std::log1p(t) - std::log(t);
}

RowMatrix two_rows(const RowMatrix& y, Index i, Index j) {
  RowMatrix out(2, y.cols());
  out.row(0) = y.row(i);
  out.row(1) = y.row(j);
  return out;
}

Outcome gradient_oracles() {
  std::mt19937_64 rng(1);
  const double norms[] = {0.0, 0.3, 0.9};
  const auto curve = fit_ab(0.1, 1.0);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Index m = 2 + t % 2;
    const RandersSpace s(ft::random_direction(m, norms[t % 3], rng));
    const RowMatrix y = ft::random_matrix(10, m, rng);
    const double nu = default_nu(m);

    const auto p = ft::random_joint_p(10, rng, false);
    const auto tsne_num =
        ft::numeric_gradient([&](const RowMatrix& x) { return finsler_tsne_loss(p, Embedding(x, s), nu); }, y);
    worst = std::max(worst, ft::relative_error(finsler_tsne_grad(p, Embedding(y, s), nu), tsne_num));

    const RowMatrix pair = two_rows(y, 0, 1 + t % 9);
    const auto head = finsler_umap_grads(row_span(pair, 0), row_span(pair, 1), s, curve.a, curve.b);
    const auto tail = finsler_umap_grads_tail(row_span(pair, 0), row_span(pair, 1), s, curve.a, curve.b);
    for (bool attractive : {true, false}) {
      const auto num = ft::numeric_gradient(
          [&](const RowMatrix& x) { return umap_cost(s, x, curve.a, curve.b, attractive); }, pair);
      RowMatrix analytic(2, m);
      analytic.row(0) = (attractive ? head.attractive : head.repulsive).transpose();
      analytic.row(1) = (attractive ? tail.attractive : tail.repulsive).transpose();
      worst = std::max(worst, ft::relative_error(analytic, num));
    }

    const auto dg = randers_distance_grad(s, row_span(pair, 0), row_span(pair, 1));
    const auto dnum = ft::numeric_gradient(
        [&](const RowMatrix& x) { return randers_distance(s, row_span(x, 0), row_span(x, 1)); }, pair);
    RowMatrix danalytic(2, m);
    danalytic.row(0) = dg.wrt_x.transpose();
    danalytic.row(1) = dg.wrt_y.transpose();
    worst = std::max(worst, ft::relative_error(danalytic, dnum));

    const StressProblem problem(random_targets(10, rng, false), s);
    const auto snum = ft::numeric_gradient([&](const RowMatrix& x) { return finsler_stress(x, problem); }, y);
    worst = std::max(worst, ft::relative_error(finsler_stress_grad(y, problem), snum));
  }
  return {worst <= 1e-5, "max relative error " + fmt("%.2e", worst) + " over 100 instances x 4 gradients"};
}

Outcome reductions() {
  std::mt19937_64 rng(2);
  double worst = 0.0;
  const auto curve = fit_ab(0.1, 1.0);
  for (int t = 0; t < 20; ++t) {
    const Index m = 2 + t % 2;
    const RandersSpace zero(Vector::Zero(m));
    const RowMatrix y = ft::random_matrix(12, m, rng);
    const double nu = default_nu(m);
    const auto p = ft::random_joint_p(12, rng, true);
    worst = std::max(worst, max_abs(finsler_tsne_q(Embedding(y, zero), nu).q, tsne_q(y, nu).q));
    worst = std::max(worst, max_abs(finsler_tsne_grad(p, Embedding(y, zero), nu), tsne_grad_fixed(p, y, nu)));
    worst = std::max(worst, std::abs(finsler_tsne_loss(p, Embedding(y, zero), nu) - tsne_loss(p, y, nu)));
    const auto f = finsler_umap_grads(row_span(y, 0), row_span(y, 1), zero, curve.a, curve.b);
    worst = std::max(worst, (f.attractive - umap_attractive_grad(row_span(y, 0), row_span(y, 1), curve.a, curve.b))
                                .cwiseAbs().maxCoeff());
    worst = std::max(worst, (f.repulsive - umap_repulsive_grad(row_span(y, 0), row_span(y, 1), curve.a, curve.b))
                                .cwiseAbs().maxCoeff());
    worst = std::max(worst, std::abs(randers_distance(zero, row_span(y, 0), row_span(y, 1)) -
                                     (y.row(0) - y.row(1)).norm()));
    const StressProblem problem(random_targets(12, rng, true), zero);
    worst = std::max(worst, std::abs(finsler_stress(y, problem) - stress(y, problem)));
    worst = std::max(worst, max_abs(finsler_smacof_step(y, problem), smacof_step(y, problem)));
  }
  const auto data = load_points_csv(FINSLER_TEST_DATA "/iris.csv");
  const std::pair<Method, Method> twins[] = {{Method::Tsne, Method::FinslerTsne}, {Method::Umap, Method::FinslerUmap}};
  for (const auto& [eu, fi] : twins) {
    PipelineConfig a;
    a.method = eu;
    a.seed = 3;
    a.epochs = 300;
    PipelineConfig b = a;
    b.method = fi;
    b.omega = 0.0;
    b.same_dimension = true;
    worst = std::max(worst, max_abs(build_method(a).run(data).embedding.coords(),
                                    build_method(b).run(data).embedding.coords()));
  }
  return {worst <= 1e-12, "max |finsler - euclidean| " + fmt("%.2e", worst) + " (q, grads, loss, stress, smacof, pipelines)"};
}

Outcome tsne_regression() {
  std::mt19937_64 rng(3);
  double one = 0.0, legacy_min = 1e300, fixed_max = 0.0;
  for (int t = 0; t < 20; ++t) {
    const auto p = ft::random_joint_p(10, rng, true);
    const RowMatrix y = ft::random_matrix(10, 2, rng);
    one = std::max(one, max_abs(tsne_grad_fixed(p, y, 1.0), tsne_grad_legacy(p, y, 1.0)));
    const auto num = ft::numeric_gradient([&](const RowMatrix& x) { return tsne_loss(p, x, 2.0); }, y);
    legacy_min = std::min(legacy_min, ft::relative_error(tsne_grad_legacy(p, y, 2.0), num));
    fixed_max = std::max(fixed_max, ft::relative_error(tsne_grad_fixed(p, y, 2.0), num));
  }
  return {one <= 1e-12 && legacy_min > 1e-2 && fixed_max <= 1e-5,
          "nu=1 gap " + fmt("%.1e", one) + ", nu=2 legacy rel err >= " + fmt("%.3f", legacy_min) +
              ", fixed <= " + fmt("%.1e", fixed_max)};
}

Outcome antisymmetry() {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> mag(0.0, 0.95);
  std::uniform_real_distribution<double> ab(0.5, 2.0);
  int bad = 0;
  for (int t = 0; t < 10000; ++t) {
    const Index m = 2 + t % 3;
    const RandersSpace s(ft::random_direction(m, mag(rng), rng));
    const RowMatrix y = ft::random_matrix(2, m, rng);
    const double a = ab(rng), b = ab(rng) / 2.0;
    const auto head = finsler_umap_grads(row_span(y, 0), row_span(y, 1), s, a, b);
    const auto tail = finsler_umap_grads_tail(row_span(y, 0), row_span(y, 1), s, a, b);
    for (Index d = 0; d < m; ++d)
      if (head.attractive[d] + tail.attractive[d] != 0.0 || head.repulsive[d] + tail.repulsive[d] != 0.0) ++bad;
  }
  return {bad == 0, std::to_string(bad) + " non-zero sums over 10000 pairs"};
}

Outcome smacof_monotone() {
  std::mt19937_64 rng(5);
  double worst_rise = -1e300;
  for (int t = 0; t < 20; ++t) {
    const StressProblem problem(random_targets(30, rng, true), RandersSpace::euclidean(2));
    const auto r = run_smacof(problem, Embedding::euclidean(ft::random_matrix(30, 2, rng)), 100);
    for (std::size_t e = 1; e < r.stress_trace.size(); ++e)
      worst_rise = std::max(worst_rise, r.stress_trace[e] - r.stress_trace[e - 1]);
  }
  return {worst_rise <= 1e-10, "largest step-to-step change " + fmt("%.2e", worst_rise)};
}

Outcome iris() {
  const auto data = load_points_csv(FINSLER_TEST_DATA "/iris.csv");
  const auto labels = load_labels_csv(FINSLER_TEST_DATA "/iris_labels.csv").labels;
  double umap_mean = 0.0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    PipelineConfig c;
    c.method = Method::FinslerUmap;
    c.seed = s;
    const auto r = build_method(c).run(data);
    umap_mean += score_ami(labels, kmeans(r.embedding.coords(), 3, s).labels) / 10.0;
  }
  EvaluationOptions eo;
  eo.shape_scores = false;
  eo.knn_accuracy = false;
  PipelineConfig t;
  t.method = Method::Tsne;
  const double tsne = evaluate_embedding(build_method(t).run(data).embedding.coords(), labels, eo).scores.at("ami");
  PipelineConfig f;
  f.method = Method::FinslerTsne;
  const std::uint64_t seeds[] = {0};
  const auto sweep = omega_sweep(f, kSweepMagnitudes, seeds, [&](const PipelineConfig& c) {
    return evaluate_embedding(build_method(c).run(data).embedding.coords(), labels, eo);
  });
  double finsler = 0.0;
  for (const auto& row : sweep.rows)
    if (row.omega == sweep.best_omega) finsler = row.mean_scores.at("ami");
  const bool pass = umap_mean >= 0.70 && umap_mean <= 0.88 && tsne >= 0.74 && tsne <= 0.90 && finsler >= tsne - 0.02;
  return {pass, "finsler-umap mean AMI " + fmt("%.3f", umap_mean) + ", tsne " + fmt("%.3f", tsne) +
                    ", finsler-tsne " + fmt("%.3f", finsler) + " at omega " + fmt("%g", sweep.best_omega)};
}

Outcome disk() {
  const auto data = gen_disk(300);
  PipelineConfig c;
  c.method = Method::FinslerMdsGd;
  c.omega = 0.5;
  const auto p = build_method(c);
  const auto r = p.run(data);
  const RowMatrix& y = r.embedding.coords();
  const RowMatrix& d = r.targets;
  const Vector w = p.space().omega();
  std::vector<double> fit, target;
  for (Index i = 0; i < 300; ++i)
    for (Index j = 0; j < 300; ++j)
      if (i != j) {
        fit.push_back(w.dot((y.row(j) - y.row(i)).transpose()));
        target.push_back(0.5 * (d(i, j) - d(j, i)));
      }
  std::vector<double> axis, sigma;
  for (Index i = 0; i < 300; ++i) {
    axis.push_back(w.normalized().dot(y.row(i).transpose()));
    sigma.push_back(r.scales.sigma[static_cast<std::size_t>(i)]);
  }
  const double pr = ft::pearson(fit, target);
  const double rho = ft::spearman(axis, sigma);
  return {pr >= 0.5 && rho >= 0.3, "pearson " + fmt("%.3f", pr) + ", spearman(axis, sigma) " + fmt("%+.3f", rho)};
}

// arc length of the spiral (u cos u, u sin u) from 0
double spiral_arc(double u) { return 0.5 * (u * std::sqrt(1.0 + u * u) + std::asinh(u)); }

Outcome swiss_roll() {
  const auto roll = gen_swiss_roll(2000);
  PipelineConfig c;
  c.method = Method::Isomap;
  c.k = 15;
  const RowMatrix y = build_method(c).run(roll.points).embedding.coords();
  const Index n = y.rows();
  std::vector<double> embedded, intrinsic, grid;
  embedded.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  intrinsic.reserve(embedded.capacity());
  grid.reserve(embedded.capacity());
  for (Index i = 0; i < n; ++i) {
    const double ui = 3.0 * std::numbers::pi * (roll.uv(i, 0) + 0.5);
    for (Index j = i + 1; j < n; ++j) {
      const double uj = 3.0 * std::numbers::pi * (roll.uv(j, 0) + 0.5);
      const double dv = 20.0 * (roll.uv(i, 1) - roll.uv(j, 1));
      embedded.push_back((y.row(i) - y.row(j)).norm());
      intrinsic.push_back(std::hypot(spiral_arc(ui) - spiral_arc(uj), dv));
      grid.push_back(std::hypot(ui - uj, dv));
    }
  }
  const double r = ft::pearson(embedded, intrinsic);
  return {r >= 0.99, "correlation with intrinsic surface distances " + fmt("%.4f", r) + " (raw parameter grid " +
                         fmt("%.3f", ft::pearson(embedded, grid)) + ")"};
}

Outcome persistence() {
  int positive = 0;
  std::string rhos;
  for (std::uint64_t s = 0; s < 10; ++s) {
    PersistenceOptions po;
    po.seed = s;
    const auto d = gen_persistence(po);
    PipelineConfig c;
    c.method = Method::FinslerUmap;
    c.geodesic = true;
    c.k_plus = 300;
    c.omega = 0.5;
    c.seed = s;
    const auto p = build_method(c);
    const auto r = p.run(d.points);
    const Vector w = p.space().omega().normalized();
    std::vector<double> sum(5, 0.0), count(5, 0.0);
    for (Index i = 0; i < d.points.n_points(); ++i) {
      const auto l = static_cast<std::size_t>(d.labels[static_cast<std::size_t>(i)]);
      sum[l] += w.dot(r.embedding.coords().row(i).transpose());
      count[l] += 1.0;
    }
    std::vector<double> mean, sparsity;
    for (std::size_t l = 0; l < 5; ++l)
      if (count[l] > 0) {
        mean.push_back(sum[l] / count[l]);
        sparsity.push_back(1.0 / count[l]);
      }
    const double rho = ft::spearman(mean, sparsity);
    positive += rho > 0.0;
    rhos += fmt(" %+.2f", rho);
  }
  return {positive >= 8, std::to_string(positive) + "/10 seeds positive, rho:" + rhos};
}

Outcome smoke_5000() {
  PersistenceOptions po;
  po.n = 5000;
  po.seed = 11;
  const auto gen = gen_persistence(po);
  const auto path = std::filesystem::temp_directory_path() / "finsler_acceptance_5000.csv";
  {
    std::ofstream out(path);
    const RowMatrix& x = gen.points.values();
    for (Index i = 0; i < x.rows(); ++i)
      for (Index j = 0; j < x.cols(); ++j) out << format_double(x(i, j)) << (j + 1 < x.cols() ? ',' : '\n');
  }
  const auto data = load_points_csv(path);
  std::filesystem::remove(path);
  PipelineConfig c;
  c.method = Method::FinslerUmap;
  const auto r = build_method(c).run(data);
  const auto report = evaluate_embedding(r.embedding.coords(), gen.labels);
  const bool finite = r.embedding.coords().allFinite();
  return {finite && report.out_of_range().empty() && data.n_points() == 5000,
          std::string(finite ? "finite" : "NON-FINITE") + " 5000x" + std::to_string(r.embedding.dim()) +
              " embedding, AMI " + fmt("%.3f", report.scores.at("ami")) + ", " +
              std::to_string(report.out_of_range().size()) + " scores out of range"};
}

Outcome metric_oracles() {
  const Labels t{0, 0, 0, 1, 1, 1}, p{0, 0, 1, 1, 2, 2};
  double worst = 0.0;
  auto check = [&](double got, double want) { worst = std::max(worst, std::abs(got - want)); };
  check(score_ari(t, p), (2.0 - 6.0 * 3.0 / 15.0) / (4.5 - 6.0 * 3.0 / 15.0));
  check(score_homogeneity(t, p), 2.0 / 3.0);
  check(score_fmi(t, p), 2.0 / std::sqrt(18.0));
  check(score_completeness(t, p), 0.420619835714305);
  check(score_vmeasure(t, p), 0.5158037429793889);
  check(score_nmi(t, p), 0.5158037429793889);
  check(score_ami(t, p), 0.22504228319830885);
  const auto truth = load_labels_csv(FINSLER_TEST_DATA "/iris_labels.csv").labels;
  std::mt19937_64 rng(6);
  double ami = 0.0, ari = 0.0;
  Labels shuffled = truth;
  for (int s = 0; s < 200; ++s) {
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    ami += score_ami(truth, shuffled) / 200.0;
    ari += score_ari(truth, shuffled) / 200.0;
  }
  return {worst <= 1e-12 && std::abs(ami) <= 0.05 && std::abs(ari) <= 0.05,
          "hand table max error " + fmt("%.1e", worst) + ", null mean AMI " + fmt("%+.4f", ami) + ", ARI " +
              fmt("%+.4f", ari)};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const Criterion criteria[] = {
      {1, "gradient oracles", 10, gradient_oracles},
      {2, "zero-drift reduction", 30, reductions},
      {3, "t-SNE gradient regression", 5, tsne_regression},
      {4, "UMAP force antisymmetry", 5, antisymmetry},
      {5, "SMACOF monotone stress", 10, smacof_monotone},
      {6, "Iris AMI", 120, iris},
      {7, "disk asymmetry", 300, disk},
      {8, "swiss roll Isomap", 300, swiss_roll},
      {9, "persistence hierarchy", 300, persistence},
      {10, "5000-point smoke run", 300, smoke_5000},
      {11, "metric oracles", 30, metric_oracles},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o{false, ""};
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = o.pass && secs < c.budget_s;
    failures += !pass;
    std::printf("%s %d %s: %s [%.1fs / %.0fs]\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs,
                c.budget_s);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
