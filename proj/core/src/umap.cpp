#include "finsler/umap.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "finsler/error.hpp"
#include "finsler/geometry.hpp"
#include "finsler/parallel.hpp"

namespace finsler {

CurveParams fit_ab(double min_dist, double spread) {
  require(spread > 0.0 && min_dist > 0.0 && min_dist <= 10.0 * spread, ErrorCode::InvalidArgument,
          "need 0 < min_dist <= 10 spread");
  constexpr int kGrid = 300;
  Vector x(kGrid), target(kGrid);
  for (int g = 0; g < kGrid; ++g) {
    x(g) = 3.0 * spread * static_cast<double>(g) / static_cast<double>(kGrid - 1);
    target(g) = x(g) < min_dist ? 1.0 : std::exp(-(x(g) - min_dist) / spread);
  }
  auto residuals = [&](double a, double b, Vector& r, Eigen::MatrixXd* jac) {
    for (int g = 0; g < kGrid; ++g) {
      const double xg = x(g);
      const double pw = xg > 0.0 ? std::pow(xg, 2.0 * b) : 0.0;
      const double f = 1.0 / (1.0 + a * pw);
      r(g) = f - target(g);
      if (jac != nullptr) {
        (*jac)(g, 0) = -pw * f * f;
        (*jac)(g, 1) = xg > 0.0 ? -a * pw * 2.0 * std::log(xg) * f * f : 0.0;
      }
    }
  };
  double a = 1.0, b = 1.0, lambda = 1e-3;
  Vector r(kGrid), trial_r(kGrid);
  Eigen::MatrixXd jac(kGrid, 2);
  residuals(a, b, r, &jac);
  double cost = r.squaredNorm();
  bool converged = false;
  for (int iter = 0; iter < 500 && !converged; ++iter) {
    const Eigen::Matrix2d jtj = jac.transpose() * jac;
    const Eigen::Vector2d jtr = jac.transpose() * r;
    Eigen::Matrix2d damped = jtj;
    damped.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-12);
    const Eigen::Vector2d step = damped.ldlt().solve(-jtr);
    const double na = a + step(0), nb = b + step(1);
    if (na > 0.0 && nb > 0.0) {
      residuals(na, nb, trial_r, nullptr);
      const double trial = trial_r.squaredNorm();
      if (trial < cost) {
        const double rel = (cost - trial) / std::max(cost, 1e-300);
        a = na;
        b = nb;
        cost = trial;
        residuals(a, b, r, &jac);
        lambda = std::max(lambda * 0.3, 1e-12);
        if (rel < 1e-14 || step.norm() < 1e-12 * (std::abs(a) + std::abs(b))) converged = true;
        continue;
      }
    }
    lambda *= 10.0;
    if (lambda > 1e12) converged = true;  // no further descent possible: at a minimum
  }
  require(std::isfinite(a) && std::isfinite(b) && a > 0.0 && b > 0.0, ErrorCode::NonConvergence,
          "curve fit failed");
  return {a, b, std::sqrt(cost / kGrid)};
}

double umap_q(double distance, double a, double b) { return 1.0 / (1.0 + a * std::pow(distance, 2.0 * b)); }

namespace {

/// Attractive and repulsive d/dy_i written with one set of expressions for
/// both the Euclidean (omega == nullptr) and Randers cases.
void pair_forces(const double* yi, const double* yj, const double* omega, Index dim, double a,
                 double b, double* attractive, double* repulsive, double* diff, bool tail = false) {
  const auto g = detail::pair_geometry(yi, yj, omega, dim, diff);
  if (tail) {
    // d/dy_j: direction y_j - y_i, drift enters with the opposite sign
    for (Index k = 0; k < dim; ++k) diff[k] = yj[k] - yi[k];
  }
  const double sign = tail ? -1.0 : 1.0;
  const double e = g.norm;
  const double d = g.forward();
  const double q = 1.0 / (1.0 + a * std::pow(d, 2.0 * b));
  if (attractive != nullptr) {
    const double coef = 2.0 * a * b * std::pow(d, 2.0 * b - 1.0) * q;
    const double ray = coef / e;
    for (Index k = 0; k < dim; ++k) {
      attractive[k] = ray * diff[k];
      if (omega != nullptr) attractive[k] -= sign * coef * omega[k];
    }
  }
  if (repulsive != nullptr) {
    const double coef = -2.0 * b * q / d;
    const double ray = coef / e;
    for (Index k = 0; k < dim; ++k) {
      repulsive[k] = ray * diff[k];
      if (omega != nullptr) repulsive[k] -= sign * coef * omega[k];
    }
  }
}

void check_pair_dims(std::span<const double> yi, std::span<const double> yj) {
  require(yi.size() == yj.size() && !yi.empty(), ErrorCode::DimensionMismatch,
          "points must share a positive dimension");
}

}  // namespace

Vector umap_attractive_grad(std::span<const double> yi, std::span<const double> yj, double a,
                            double b) {
  check_pair_dims(yi, yj);
  const auto dim = static_cast<Index>(yi.size());
  Vector out(dim), diff(dim);
  pair_forces(yi.data(), yj.data(), nullptr, dim, a, b, out.data(), nullptr, diff.data());
  return out;
}

Vector umap_repulsive_grad(std::span<const double> yi, std::span<const double> yj, double a,
                           double b) {
  check_pair_dims(yi, yj);
  const auto dim = static_cast<Index>(yi.size());
  Vector out(dim), diff(dim);
  pair_forces(yi.data(), yj.data(), nullptr, dim, a, b, nullptr, out.data(), diff.data());
  return out;
}

ForcePair finsler_umap_grads(std::span<const double> yi, std::span<const double> yj,
                             const RandersSpace& space, double a, double b) {
  check_pair_dims(yi, yj);
  require(static_cast<Index>(yi.size()) == space.dim(), ErrorCode::DimensionMismatch,
          "point dimension does not match the space");
  const Index dim = space.dim();
  ForcePair out{Vector(dim), Vector(dim)};
  Vector diff(dim);
  pair_forces(yi.data(), yj.data(), space.omega().data(), dim, a, b, out.attractive.data(),
              out.repulsive.data(), diff.data());
  return out;
}

ForcePair finsler_umap_grads_tail(std::span<const double> yi, std::span<const double> yj,
                                  const RandersSpace& space, double a, double b) {
  check_pair_dims(yi, yj);
  require(static_cast<Index>(yi.size()) == space.dim(), ErrorCode::DimensionMismatch,
          "point dimension does not match the space");
  const Index dim = space.dim();
  ForcePair out{Vector(dim), Vector(dim)};
  Vector diff(dim);
  pair_forces(yi.data(), yj.data(), space.omega().data(), dim, a, b, out.attractive.data(),
              out.repulsive.data(), diff.data(), true);
  return out;
}

namespace {

int updates_for(double eps, int epochs) {
  int count = 0;
  while ((static_cast<double>(count) + 0.5) * eps <= static_cast<double>(epochs)) ++count;
  return count;
}

}  // namespace

std::vector<int> edge_update_counts(const Dissimilarities& p, int epochs) {
  const double max_p = p.max_value();
  std::vector<int> counts;
  for (Index i = 0; i < p.size(); ++i) {
    for (const Entry& e : p.row(i)) {
      counts.push_back(e.value > 0.0 ? updates_for(max_p / e.value, epochs) : 0);
    }
  }
  return counts;
}

namespace {

struct PositiveEdge {
  Index head;
  Index tail;
  double eps;   // epochs per sample
  int fired;
  double next;  // epoch of the next update
};

template <bool Atomic>
struct Coords {
  double* data;
  Index dim;
  double load(Index i, Index d) const {
    if constexpr (Atomic) return std::atomic_ref<double>(data[i * dim + d]).load(std::memory_order_relaxed);
    else return data[i * dim + d];
  }
  void add(Index i, Index d, double v) const {
    if constexpr (Atomic) {
      std::atomic_ref<double> ref(data[i * dim + d]);
      ref.store(ref.load(std::memory_order_relaxed) + v, std::memory_order_relaxed);
    } else {
      data[i * dim + d] += v;
    }
  }
};

template <bool Atomic>
void run_edges(std::vector<PositiveEdge>& edges, std::size_t begin, std::size_t end, int epoch,
               double alpha, const Coords<Atomic>& y, Index n, const double* omega,
               const UmapConfig& config, double a, double b, std::mt19937_64& rng) {
  const Index dim = y.dim;
  std::vector<double> yi(static_cast<std::size_t>(dim)), yk(static_cast<std::size_t>(dim));
  std::vector<double> grad(static_cast<std::size_t>(dim)), grad2(static_cast<std::size_t>(dim));
  std::vector<double> diff(static_cast<std::size_t>(dim));
  std::uniform_int_distribution<Index> pick(0, n - 2);
  const double clip = config.grad_clip;
  auto clipped = [clip](double g) { return std::clamp(g, -clip, clip); };
  for (std::size_t s = begin; s < end; ++s) {
    PositiveEdge& edge = edges[s];
    while (edge.next <= static_cast<double>(epoch)) {
      ++edge.fired;
      edge.next = (static_cast<double>(edge.fired) + 0.5) * edge.eps;
      const Index i = edge.head;
      const Index j = edge.tail;
      for (Index d = 0; d < dim; ++d) {
        yi[static_cast<std::size_t>(d)] = y.load(i, d);
        yk[static_cast<std::size_t>(d)] = y.load(j, d);
      }
      pair_forces(yi.data(), yk.data(), omega, dim, a, b, grad.data(), nullptr, diff.data());
      for (Index d = 0; d < dim; ++d) {
        const double g = clipped(grad[static_cast<std::size_t>(d)]);
        y.add(i, d, -alpha * g);
        y.add(j, d, alpha * g);
      }
      for (int neg = 0; neg < config.neg_samples; ++neg) {
        Index k = pick(rng);
        if (k >= i) ++k;
        for (Index d = 0; d < dim; ++d) {
          yi[static_cast<std::size_t>(d)] = y.load(i, d);
          yk[static_cast<std::size_t>(d)] = y.load(k, d);
        }
        pair_forces(yi.data(), yk.data(), omega, dim, a, b, nullptr, grad.data(), diff.data());
        if (config.symmetric_updates) {
          // c^r_ki contributes -d/dy_k c^r_ki to y_i
          pair_forces(yk.data(), yi.data(), omega, dim, a, b, nullptr, grad2.data(), diff.data());
          for (Index d = 0; d < dim; ++d) {
            const double g = clipped(grad[static_cast<std::size_t>(d)] - grad2[static_cast<std::size_t>(d)]);
            y.add(i, d, -alpha * g);
            y.add(k, d, alpha * g);
          }
        } else {
          for (Index d = 0; d < dim; ++d) y.add(i, d, -alpha * clipped(grad[static_cast<std::size_t>(d)]));
        }
      }
    }
  }
}

}  // namespace

UmapResult run_umap(const Dissimilarities& p, const UmapConfig& config, const Embedding& init,
                    const RandersSpace& space) {
  require(init.dim() == space.dim(), ErrorCode::DimensionMismatch,
          "init dimension does not match the space");
  require(p.size() == init.n_points(), ErrorCode::DimensionMismatch,
          "dissimilarities and init sizes differ");
  require(p.size() >= 2, ErrorCode::InvalidArgument, "need at least two points");
  require(config.epochs > 0 && config.neg_samples >= 0 && config.learning_rate > 0.0 &&
              config.grad_clip > 0.0,
          ErrorCode::InvalidArgument, "invalid UMAP configuration");
  CurveParams curve{config.a, config.b, 0.0};
  if (config.a <= 0.0 || config.b <= 0.0) curve = fit_ab(config.min_dist, config.spread);
  for (Index i = 0; i < p.size(); ++i) {
    for (const Entry& e : p.row(i)) {
      require(e.value > 0.0 && e.value <= 1.0, ErrorCode::InvalidArgument,
              "UMAP dissimilarities must lie in (0, 1]");
    }
  }
  const double max_p = p.max_value();
  std::vector<PositiveEdge> edges;
  for (Index i = 0; i < p.size(); ++i) {
    for (const Entry& e : p.row(i)) {
      const double eps = max_p / e.value;
      edges.push_back({i, e.col, eps, 0, 0.5 * eps});
    }
  }
  RowMatrix y = init.coords();
  const Index n = y.rows();
  const double* omega = space.is_euclidean() ? nullptr : space.omega().data();
  const int threads = resolve_threads(config.threads);

  if (threads <= 1) {
    std::mt19937_64 rng(config.seed);
    Coords<false> view{y.data(), y.cols()};
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
      const double alpha = config.learning_rate *
                           (1.0 - static_cast<double>(epoch - 1) / static_cast<double>(config.epochs));
      run_edges(edges, 0, edges.size(), epoch, alpha, view, n, omega, config, curve.a, curve.b, rng);
      if (!y.allFinite()) {
        fail(ErrorCode::NumericalFailure, "UMAP produced non-finite coordinates at epoch " +
                                              std::to_string(epoch), static_cast<double>(epoch));
      }
    }
  } else {
    std::vector<std::mt19937_64> rngs;
    for (int t = 0; t < threads; ++t) rngs.emplace_back(config.seed + static_cast<std::uint64_t>(t));
    Coords<true> view{y.data(), y.cols()};
    const auto total = static_cast<Index>(edges.size());
    const Index block = (total + threads - 1) / threads;
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
      const double alpha = config.learning_rate *
                           (1.0 - static_cast<double>(epoch - 1) / static_cast<double>(config.epochs));
      parallel_for(threads, threads, [&](Index begin, Index end) {
        for (Index t = begin; t < end; ++t) {
          const auto lo = static_cast<std::size_t>(std::min(total, t * block));
          const auto hi = static_cast<std::size_t>(std::min(total, (t + 1) * block));
          run_edges(edges, lo, hi, epoch, alpha, view, n, omega, config, curve.a, curve.b,
                    rngs[static_cast<std::size_t>(t)]);
        }
      });
      if (!y.allFinite()) {
        fail(ErrorCode::NumericalFailure, "UMAP produced non-finite coordinates at epoch " +
                                              std::to_string(epoch), static_cast<double>(epoch));
      }
    }
  }
  return {Embedding(std::move(y), space), curve};
}

}  // namespace finsler
