#include "finsler/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "finsler/error.hpp"

namespace finsler {

namespace {

/// Maps arbitrary ids to 0..K-1 in order of first appearance.
std::vector<int> compact(const Labels& labels, int* count) {
  std::map<int, int> ids;
  std::vector<int> out;
  out.reserve(labels.size());
  for (int l : labels) {
    auto [it, inserted] = ids.emplace(l, static_cast<int>(ids.size()));
    out.push_back(it->second);
  }
  *count = static_cast<int>(ids.size());
  return out;
}

struct Contingency {
  std::vector<std::vector<double>> table;  // truth x pred
  std::vector<double> a;                   // truth marginals
  std::vector<double> b;                   // pred marginals
  double n = 0.0;
};

Contingency contingency(const Labels& truth, const Labels& pred) {
  require(truth.size() == pred.size(), ErrorCode::InvalidArgument,
          "label vectors differ in length: " + std::to_string(truth.size()) + " vs " +
              std::to_string(pred.size()));
  require(!truth.empty(), ErrorCode::InvalidArgument, "empty labels");
  int kt = 0, kp = 0;
  const auto t = compact(truth, &kt);
  const auto p = compact(pred, &kp);
  Contingency c;
  c.table.assign(static_cast<std::size_t>(kt), std::vector<double>(static_cast<std::size_t>(kp), 0.0));
  c.a.assign(static_cast<std::size_t>(kt), 0.0);
  c.b.assign(static_cast<std::size_t>(kp), 0.0);
  for (std::size_t i = 0; i < t.size(); ++i) {
    c.table[static_cast<std::size_t>(t[i])][static_cast<std::size_t>(p[i])] += 1.0;
    c.a[static_cast<std::size_t>(t[i])] += 1.0;
    c.b[static_cast<std::size_t>(p[i])] += 1.0;
  }
  c.n = static_cast<double>(t.size());
  return c;
}

double entropy(const std::vector<double>& counts, double n) {
  double h = 0.0;
  for (double c : counts) {
    if (c > 0.0) h -= (c / n) * std::log(c / n);
  }
  return h;
}

double mutual_info(const Contingency& c) {
  double mi = 0.0;
  for (std::size_t i = 0; i < c.a.size(); ++i) {
    for (std::size_t j = 0; j < c.b.size(); ++j) {
      const double nij = c.table[i][j];
      if (nij > 0.0) mi += (nij / c.n) * std::log(c.n * nij / (c.a[i] * c.b[j]));
    }
  }
  return std::max(mi, 0.0);
}

double expected_mutual_info(const Contingency& c) {
  const double n = c.n;
  const double lg_n = std::lgamma(n + 1.0);
  double emi = 0.0;
  for (double ai : c.a) {
    for (double bj : c.b) {
      const double lo = std::max(1.0, ai + bj - n);
      const double hi = std::min(ai, bj);
      const double fixed = std::lgamma(ai + 1.0) + std::lgamma(bj + 1.0) + std::lgamma(n - ai + 1.0) +
                           std::lgamma(n - bj + 1.0) - lg_n;
      for (double nij = lo; nij <= hi; nij += 1.0) {
        const double log_p = fixed - std::lgamma(nij + 1.0) - std::lgamma(ai - nij + 1.0) -
                             std::lgamma(bj - nij + 1.0) - std::lgamma(n - ai - bj + nij + 1.0);
        emi += (nij / n) * std::log(n * nij / (ai * bj)) * std::exp(log_p);
      }
    }
  }
  return emi;
}

double pairs(double x) { return x * (x - 1.0) / 2.0; }

}  // namespace

double score_ami(const Labels& truth, const Labels& pred) {
  const auto c = contingency(truth, pred);
  if ((c.a.size() == 1 && c.b.size() == 1) || (static_cast<double>(c.a.size()) == c.n && static_cast<double>(c.b.size()) == c.n)) return 1.0;
  const double mi = mutual_info(c);
  const double emi = expected_mutual_info(c);
  const double norm = std::max(entropy(c.a, c.n), entropy(c.b, c.n));
  double denom = norm - emi;
  const double tiny = std::numeric_limits<double>::epsilon();
  if (std::abs(denom) < tiny) denom = denom < 0.0 ? -tiny : tiny;
  return (mi - emi) / denom;
}

double score_ari(const Labels& truth, const Labels& pred) {
  const auto c = contingency(truth, pred);
  double index = 0.0;
  for (const auto& row : c.table) {
    for (double nij : row) index += pairs(nij);
  }
  double sa = 0.0, sb = 0.0;
  for (double x : c.a) sa += pairs(x);
  for (double x : c.b) sb += pairs(x);
  const double expected = sa * sb / pairs(c.n);
  const double max_index = 0.5 * (sa + sb);
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

double score_nmi(const Labels& truth, const Labels& pred) {
  const auto c = contingency(truth, pred);
  if ((c.a.size() == 1 && c.b.size() == 1) || (static_cast<double>(c.a.size()) == c.n && static_cast<double>(c.b.size()) == c.n)) return 1.0;
  const double norm = 0.5 * (entropy(c.a, c.n) + entropy(c.b, c.n));
  if (norm <= 0.0) return 0.0;
  return std::clamp(mutual_info(c) / norm, 0.0, 1.0);
}

double score_homogeneity(const Labels& truth, const Labels& pred) {
  const auto c = contingency(truth, pred);
  const double hc = entropy(c.a, c.n);
  if (hc <= 0.0) return 1.0;
  return std::clamp(mutual_info(c) / hc, 0.0, 1.0);
}

double score_completeness(const Labels& truth, const Labels& pred) {
  const auto c = contingency(truth, pred);
  const double hk = entropy(c.b, c.n);
  if (hk <= 0.0) return 1.0;
  return std::clamp(mutual_info(c) / hk, 0.0, 1.0);
}

double score_vmeasure(const Labels& truth, const Labels& pred) {
  const double h = score_homogeneity(truth, pred);
  const double c = score_completeness(truth, pred);
  return h + c == 0.0 ? 0.0 : 2.0 * h * c / (h + c);
}

double score_fmi(const Labels& truth, const Labels& pred) {
  const auto c = contingency(truth, pred);
  double tk = 0.0;
  for (const auto& row : c.table) {
    for (double nij : row) tk += nij * nij;
  }
  tk -= c.n;
  double pk = -c.n, qk = -c.n;
  for (double x : c.a) qk += x * x;
  for (double x : c.b) pk += x * x;
  if (tk == 0.0 || pk == 0.0 || qk == 0.0) return 0.0;
  return std::sqrt(tk / pk) * std::sqrt(tk / qk);
}

namespace {

struct Clusters {
  std::vector<int> ids;
  int k = 0;
};

Clusters shape_clusters(const RowMatrix& coords, const Labels& pred) {
  require(static_cast<Index>(pred.size()) == coords.rows(), ErrorCode::InvalidArgument,
          "labels and coordinates differ in length");
  Clusters c;
  c.ids = compact(pred, &c.k);
  require(c.k >= 2, ErrorCode::InvalidArgument, "shape scores need at least two clusters");
  return c;
}

RowMatrix centroids_of(const RowMatrix& coords, const std::vector<int>& ids, int k, std::vector<double>& sizes) {
  RowMatrix centroids = RowMatrix::Zero(k, coords.cols());
  sizes.assign(static_cast<std::size_t>(k), 0.0);
  for (Index i = 0; i < coords.rows(); ++i) {
    centroids.row(ids[static_cast<std::size_t>(i)]) += coords.row(i);
    sizes[static_cast<std::size_t>(ids[static_cast<std::size_t>(i)])] += 1.0;
  }
  for (int j = 0; j < k; ++j) centroids.row(j) /= sizes[static_cast<std::size_t>(j)];
  return centroids;
}

}  // namespace

double score_silhouette(const RowMatrix& coords, const Labels& pred) {
  const auto c = shape_clusters(coords, pred);
  const Index n = coords.rows();
  std::vector<double> sizes(static_cast<std::size_t>(c.k), 0.0);
  for (int id : c.ids) sizes[static_cast<std::size_t>(id)] += 1.0;
  double total = 0.0;
  std::vector<double> sums(static_cast<std::size_t>(c.k));
  for (Index i = 0; i < n; ++i) {
    std::fill(sums.begin(), sums.end(), 0.0);
    for (Index j = 0; j < n; ++j) {
      if (j != i) sums[static_cast<std::size_t>(c.ids[static_cast<std::size_t>(j)])] += (coords.row(i) - coords.row(j)).norm();
    }
    const auto own = static_cast<std::size_t>(c.ids[static_cast<std::size_t>(i)]);
    if (sizes[own] <= 1.0) continue;  // singleton clusters score 0
    const double a = sums[own] / (sizes[own] - 1.0);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < sums.size(); ++j) {
      if (j != own) b = std::min(b, sums[j] / sizes[j]);
    }
    const double denom = std::max(a, b);
    if (denom > 0.0) total += (b - a) / denom;
  }
  return total / static_cast<double>(n);
}

double score_dbi(const RowMatrix& coords, const Labels& pred) {
  const auto c = shape_clusters(coords, pred);
  std::vector<double> sizes;
  const RowMatrix centroids = centroids_of(coords, c.ids, c.k, sizes);
  std::vector<double> scatter(static_cast<std::size_t>(c.k), 0.0);
  for (Index i = 0; i < coords.rows(); ++i) {
    const int id = c.ids[static_cast<std::size_t>(i)];
    scatter[static_cast<std::size_t>(id)] += (coords.row(i) - centroids.row(id)).norm();
  }
  for (int j = 0; j < c.k; ++j) scatter[static_cast<std::size_t>(j)] /= sizes[static_cast<std::size_t>(j)];
  double total = 0.0;
  for (int i = 0; i < c.k; ++i) {
    double worst = 0.0;
    for (int j = 0; j < c.k; ++j) {
      if (i == j) continue;
      const double sep = (centroids.row(i) - centroids.row(j)).norm();
      const double s = scatter[static_cast<std::size_t>(i)] + scatter[static_cast<std::size_t>(j)];
      const double r = sep > 0.0 ? s / sep : (s > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
      worst = std::max(worst, r);
    }
    total += worst;
  }
  return total / c.k;
}

double score_chi(const RowMatrix& coords, const Labels& pred) {
  const auto c = shape_clusters(coords, pred);
  const Index n = coords.rows();
  std::vector<double> sizes;
  const RowMatrix centroids = centroids_of(coords, c.ids, c.k, sizes);
  const Eigen::RowVectorXd mean = coords.colwise().mean();
  double between = 0.0, within = 0.0;
  for (int j = 0; j < c.k; ++j) between += sizes[static_cast<std::size_t>(j)] * (centroids.row(j) - mean).squaredNorm();
  for (Index i = 0; i < n; ++i) within += (coords.row(i) - centroids.row(c.ids[static_cast<std::size_t>(i)])).squaredNorm();
  if (within == 0.0) return 1.0;
  return between * static_cast<double>(n - c.k) / (within * static_cast<double>(c.k - 1));
}

KMeansResult kmeans(const RowMatrix& coords, int k, std::uint64_t seed, int n_init, int max_iter) {
  const Index n = coords.rows();
  const Index dim = coords.cols();
  require(k >= 1 && k <= n, ErrorCode::InvalidArgument, "kmeans needs 1 <= k <= N");
  require(n_init >= 1 && max_iter >= 1, ErrorCode::InvalidArgument, "invalid kmeans iteration counts");
  std::mt19937_64 rng(seed);
  KMeansResult best{Labels(static_cast<std::size_t>(n), 0), RowMatrix::Zero(k, dim),
                    std::numeric_limits<double>::infinity()};
  std::vector<double> d2(static_cast<std::size_t>(n));
  for (int run = 0; run < n_init; ++run) {
    // k-means++ seeding
    RowMatrix centroids(k, dim);
    std::uniform_int_distribution<Index> first(0, n - 1);
    centroids.row(0) = coords.row(first(rng));
    for (Index i = 0; i < n; ++i) d2[static_cast<std::size_t>(i)] = (coords.row(i) - centroids.row(0)).squaredNorm();
    for (int c = 1; c < k; ++c) {
      const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
      Index pick = 0;
      if (total > 0.0) {
        std::uniform_real_distribution<double> u(0.0, total);
        double target = u(rng);
        for (pick = 0; pick < n - 1; ++pick) {
          target -= d2[static_cast<std::size_t>(pick)];
          if (target < 0.0) break;
        }
      } else {
        pick = first(rng);
      }
      centroids.row(c) = coords.row(pick);
      for (Index i = 0; i < n; ++i) {
        d2[static_cast<std::size_t>(i)] = std::min(d2[static_cast<std::size_t>(i)], (coords.row(i) - centroids.row(c)).squaredNorm());
      }
    }
    Labels labels(static_cast<std::size_t>(n), -1);
    double inertia = 0.0;
    for (int iter = 0; iter < max_iter; ++iter) {
      bool changed = false;
      inertia = 0.0;
      for (Index i = 0; i < n; ++i) {
        int arg = 0;
        double bd = std::numeric_limits<double>::infinity();
        for (int c = 0; c < k; ++c) {
          const double d = (coords.row(i) - centroids.row(c)).squaredNorm();
          if (d < bd) {
            bd = d;
            arg = c;
          }
        }
        d2[static_cast<std::size_t>(i)] = bd;
        inertia += bd;
        if (labels[static_cast<std::size_t>(i)] != arg) {
          labels[static_cast<std::size_t>(i)] = arg;
          changed = true;
        }
      }
      if (!changed && iter > 0) break;
      RowMatrix sums = RowMatrix::Zero(k, dim);
      std::vector<Index> counts(static_cast<std::size_t>(k), 0);
      for (Index i = 0; i < n; ++i) {
        sums.row(labels[static_cast<std::size_t>(i)]) += coords.row(i);
        ++counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
      }
      for (int c = 0; c < k; ++c) {
        if (counts[static_cast<std::size_t>(c)] > 0) {
          centroids.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
        } else {
          // re-seed from the point farthest from its centroid
          const auto far = std::max_element(d2.begin(), d2.end()) - d2.begin();
          centroids.row(c) = coords.row(far);
          d2[static_cast<std::size_t>(far)] = 0.0;
        }
      }
    }
    if (inertia < best.inertia) best = {labels, centroids, inertia};
  }
  return best;
}

double knn_cv_accuracy(const RowMatrix& coords, const Labels& labels, const KnnCvOptions& options) {
  const Index n = coords.rows();
  require(static_cast<Index>(labels.size()) == n, ErrorCode::InvalidArgument,
          "labels and coordinates differ in length");
  require(options.folds >= 2 && options.repeats >= 1 && options.k_nn >= 1, ErrorCode::InvalidArgument,
          "invalid cross-validation options");
  int k_classes = 0;
  const auto ids = compact(labels, &k_classes);
  std::vector<std::vector<Index>> members(static_cast<std::size_t>(k_classes));
  for (Index i = 0; i < n; ++i) members[static_cast<std::size_t>(ids[static_cast<std::size_t>(i)])].push_back(i);
  for (const auto& m : members) {
    require(static_cast<int>(m.size()) >= options.folds, ErrorCode::InvalidArgument,
            "every class needs at least as many members as folds");
  }
  double total = 0.0;
  int evaluations = 0;
  for (int rep = 0; rep < options.repeats; ++rep) {
    std::mt19937_64 rng(options.seed + static_cast<std::uint64_t>(rep));
    std::vector<int> fold(static_cast<std::size_t>(n), 0);
    for (auto m : members) {
      std::shuffle(m.begin(), m.end(), rng);
      for (std::size_t r = 0; r < m.size(); ++r) fold[static_cast<std::size_t>(m[r])] = static_cast<int>(r % static_cast<std::size_t>(options.folds));
    }
    for (int f = 0; f < options.folds; ++f) {
      int correct = 0, tested = 0;
      std::vector<std::pair<double, Index>> cand;
      for (Index i = 0; i < n; ++i) {
        if (fold[static_cast<std::size_t>(i)] != f) continue;
        cand.clear();
        for (Index j = 0; j < n; ++j) {
          if (fold[static_cast<std::size_t>(j)] != f) cand.emplace_back((coords.row(i) - coords.row(j)).squaredNorm(), j);
        }
        const auto take = std::min<std::size_t>(static_cast<std::size_t>(options.k_nn), cand.size());
        std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(take), cand.end());
        std::vector<int> votes(static_cast<std::size_t>(k_classes), 0);
        for (std::size_t t = 0; t < take; ++t) ++votes[static_cast<std::size_t>(ids[static_cast<std::size_t>(cand[t].second)])];
        const auto winner = static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
        correct += winner == ids[static_cast<std::size_t>(i)];
        ++tested;
      }
      total += static_cast<double>(correct) / tested;
      ++evaluations;
    }
  }
  return total / evaluations;
}

std::vector<std::string> ScoreReport::out_of_range() const {
  std::vector<std::string> bad;
  constexpr double tol = 1e-12;
  for (const auto& [name, value] : scores) {
    bool ok = std::isfinite(value);
    if (name == "ami" || name == "ari" || name == "sil") ok = ok && value >= -1.0 - tol && value <= 1.0 + tol;
    else if (name == "nmi" || name == "hom" || name == "com" || name == "vm" || name == "fmi" || name == "knn_acc")
      ok = ok && value >= -tol && value <= 1.0 + tol;
    else if (name == "dbi" || name == "chi") ok = ok && value >= 0.0;
    if (!ok) bad.push_back(name);
  }
  return bad;
}

std::map<std::string, double> label_scores(const Labels& truth, const Labels& pred) {
  return {{"ami", score_ami(truth, pred)},          {"ari", score_ari(truth, pred)},
          {"nmi", score_nmi(truth, pred)},          {"hom", score_homogeneity(truth, pred)},
          {"com", score_completeness(truth, pred)}, {"vm", score_vmeasure(truth, pred)},
          {"fmi", score_fmi(truth, pred)}};
}

ScoreReport evaluate_embedding(const RowMatrix& coords, const Labels& truth, const EvaluationOptions& options) {
  require(static_cast<Index>(truth.size()) == coords.rows(), ErrorCode::InvalidArgument,
          "labels and coordinates differ in length");
  require(!options.kmeans_seeds.empty(), ErrorCode::InvalidArgument, "need at least one kmeans seed");
  int k = 0;
  compact(truth, &k);
  ScoreReport report;
  Labels first;
  for (std::size_t s = 0; s < options.kmeans_seeds.size(); ++s) {
    const auto clustering = kmeans(coords, k, options.kmeans_seeds[s]);
    if (s == 0) first = clustering.labels;
    for (const auto& [name, value] : label_scores(truth, clustering.labels)) report.scores[name] += value;
  }
  for (auto& [name, value] : report.scores) value /= static_cast<double>(options.kmeans_seeds.size());
  if (options.shape_scores) {
    int found = 0;
    compact(first, &found);
    if (found >= 2) {
      report.scores["sil"] = score_silhouette(coords, first);
      report.scores["dbi"] = score_dbi(coords, first);
      report.scores["chi"] = score_chi(coords, first);
    }
  }
  if (options.knn_accuracy) report.scores["knn_acc"] = knn_cv_accuracy(coords, truth);
  report.metadata["n_points"] = std::to_string(coords.rows());
  report.metadata["dim"] = std::to_string(coords.cols());
  return report;
}

}  // namespace finsler
