#include "finsler/tsne.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "finsler/error.hpp"
#include "finsler/geometry.hpp"
#include "finsler/parallel.hpp"

namespace finsler {

double default_nu(Index dim) { return std::max<double>(static_cast<double>(dim) - 1.0, 1.0); }

namespace {

void check_nu(double nu) {
  require(nu > 0.0 && std::isfinite(nu), ErrorCode::InvalidArgument, "nu must be positive");
}

/// Kernel table shared by the Euclidean and Randers variants. dist(i, j) is
/// the (possibly asymmetric) embedding distance, inv(i, j) = (1 + d^2/nu)^-1.
struct KernelTable {
  RowMatrix q;
  RowMatrix dist;
  RowMatrix norm;  // Euclidean part, clamped
  RowMatrix inv;
  double normalizer = 0.0;
};

KernelTable kernel_table(const RowMatrix& coords, const double* omega, double nu, int threads) {
  const Index n = coords.rows();
  const Index m = coords.cols();
  require(n >= 2, ErrorCode::InvalidArgument, "need at least two points");
  check_nu(nu);
  KernelTable k;
  k.q = RowMatrix::Zero(n, n);
  k.dist = RowMatrix::Zero(n, n);
  k.norm = RowMatrix::Zero(n, n);
  k.inv = RowMatrix::Zero(n, n);
  const double exponent = -(nu + 1.0) / 2.0;
  parallel_for(n, threads, [&](Index begin, Index end) {
    std::vector<double> diff(static_cast<std::size_t>(m));
    for (Index i = begin; i < end; ++i) {
      for (Index j = 0; j < n; ++j) {
        if (j == i) continue;
        const auto g = detail::pair_geometry(&coords(i, 0), &coords(j, 0), omega, m, diff.data());
        const double d = g.forward();
        const double inv = 1.0 / (1.0 + d * d / nu);
        k.dist(i, j) = d;
        k.norm(i, j) = g.norm;
        k.inv(i, j) = inv;
        k.q(i, j) = std::pow(inv, -exponent);
      }
    }
  });
  k.normalizer = k.q.sum();
  k.q /= k.normalizer;
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (i != j && k.q(i, j) < kQFloor) k.q(i, j) = kQFloor;
    }
  }
  return k;
}

const double* omega_ptr(const RandersSpace& space) {
  return space.is_euclidean() ? nullptr : space.omega().data();
}

void check_p(const Dissimilarities& p, Index n) {
  require(p.size() == n, ErrorCode::DimensionMismatch,
          "dissimilarities cover " + std::to_string(p.size()) + " points, embedding has " +
              std::to_string(n));
}

RowMatrix euclidean_grad(const Dissimilarities& p, const RowMatrix& coords, double nu,
                         const KernelTable& k, bool legacy, double p_scale, int threads) {
  const Index n = coords.rows();
  const Index m = coords.cols();
  RowMatrix grad = RowMatrix::Zero(n, m);
  const double factor = 2.0 * (nu + 1.0) / nu;
  const double exponent = (nu + 1.0) / 2.0;
  parallel_for(n, threads, [&](Index begin, Index end) {
    for (Index i = begin; i < end; ++i) {
      const auto& row = p.row(i);
      std::size_t cursor = 0;
      for (Index j = 0; j < n; ++j) {
        if (j == i) continue;
        double pij = 0.0;
        while (cursor < row.size() && row[cursor].col < j) ++cursor;
        if (cursor < row.size() && row[cursor].col == j) pij = p_scale * row[cursor].value;
        const double w = legacy ? std::pow(k.inv(i, j), exponent) : k.inv(i, j);
        const double c = factor * (pij - k.q(i, j)) * w;
        for (Index d = 0; d < m; ++d) grad(i, d) += c * (coords(i, d) - coords(j, d));
      }
    }
  });
  return grad;
}

RowMatrix randers_grad(const Dissimilarities& p, const RowMatrix& coords, const Vector& omega,
                       double nu, const KernelTable& k, double p_scale, int threads) {
  const Index n = coords.rows();
  const Index m = coords.cols();
  RowMatrix grad = RowMatrix::Zero(n, m);
  const double factor = (nu + 1.0) / nu;
  parallel_for(n, threads, [&](Index begin, Index end) {
    for (Index i = begin; i < end; ++i) {
      for (Index j = 0; j < n; ++j) {
        if (j == i) continue;
        const double delta_ij = p_scale * p.at(i, j) - k.q(i, j);
        const double delta_ji = p_scale * p.at(j, i) - k.q(j, i);
        const double c_ij = factor * delta_ij * k.inv(i, j) * k.dist(i, j);
        const double c_ji = factor * delta_ji * k.inv(j, i) * k.dist(j, i);
        const double e = k.norm(i, j);
        const double ray = (c_ij + c_ji) / e;
        const double drift = c_ji - c_ij;
        for (Index d = 0; d < m; ++d) {
          grad(i, d) += ray * (coords(i, d) - coords(j, d)) + drift * omega(d);
        }
      }
    }
  });
  return grad;
}

double kl(const Dissimilarities& p, const RowMatrix& q) {
  double loss = 0.0;
  for (Index i = 0; i < p.size(); ++i) {
    for (const Entry& e : p.row(i)) {
      if (e.value > 0.0) loss += e.value * std::log(e.value / q(i, e.col));
    }
  }
  return loss;
}

}  // namespace

StudentKernel tsne_q(const RowMatrix& coords, double nu) {
  auto k = kernel_table(coords, nullptr, nu, 1);
  return {std::move(k.q), k.normalizer};
}

StudentKernel finsler_tsne_q(const Embedding& embedding, double nu) {
  auto k = kernel_table(embedding.coords(), omega_ptr(embedding.space()), nu, 1);
  return {std::move(k.q), k.normalizer};
}

RowMatrix tsne_grad_fixed(const Dissimilarities& p, const RowMatrix& coords, double nu) {
  check_p(p, coords.rows());
  const auto k = kernel_table(coords, nullptr, nu, 1);
  return euclidean_grad(p, coords, nu, k, false, 1.0, 1);
}

RowMatrix tsne_grad_legacy(const Dissimilarities& p, const RowMatrix& coords, double nu) {
  check_p(p, coords.rows());
  const auto k = kernel_table(coords, nullptr, nu, 1);
  return euclidean_grad(p, coords, nu, k, true, 1.0, 1);
}

RowMatrix finsler_tsne_grad(const Dissimilarities& p, const Embedding& embedding, double nu) {
  check_p(p, embedding.n_points());
  const auto k = kernel_table(embedding.coords(), omega_ptr(embedding.space()), nu, 1);
  return randers_grad(p, embedding.coords(), embedding.space().omega(), nu, k, 1.0, 1);
}

double tsne_loss(const Dissimilarities& p, const RowMatrix& coords, double nu) {
  check_p(p, coords.rows());
  return kl(p, kernel_table(coords, nullptr, nu, 1).q);
}

double finsler_tsne_loss(const Dissimilarities& p, const Embedding& embedding, double nu) {
  check_p(p, embedding.n_points());
  return kl(p, kernel_table(embedding.coords(), omega_ptr(embedding.space()), nu, 1).q);
}

TsneResult run_tsne(const Dissimilarities& p, const TsneConfig& config, const Embedding& init,
                    const RandersSpace& space) {
  require(init.dim() == space.dim(), ErrorCode::DimensionMismatch,
          "init dimension does not match the space");
  check_p(p, init.n_points());
  require(config.epochs > 0, ErrorCode::InvalidArgument, "epochs must be positive");
  require(config.learning_rate > 0.0, ErrorCode::InvalidArgument, "learning rate must be positive");
  require(std::abs(p.total() - 1.0) <= 1e-9, ErrorCode::InvalidArgument,
          "t-SNE needs dissimilarities with total mass 1");
  const double nu = config.nu.value_or(default_nu(space.dim()));
  check_nu(nu);
  const int threads = resolve_threads(config.threads);
  const bool finsler = !space.is_euclidean();
  const double* omega = omega_ptr(space);

  RowMatrix y = init.coords();
  const Index n = y.rows();
  const Index m = y.cols();
  RowMatrix update = RowMatrix::Zero(n, m);
  RowMatrix gains = RowMatrix::Ones(n, m);
  std::vector<double> trace;
  trace.reserve(static_cast<std::size_t>(config.epochs));

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const bool exaggerate = !config.plain_gd && epoch < config.exaggeration_epochs;
    const double p_scale = exaggerate ? config.early_exaggeration : 1.0;
    const auto k = kernel_table(y, omega, nu, threads);
    const RowMatrix grad = finsler ? randers_grad(p, y, space.omega(), nu, k, p_scale, threads)
                                   : euclidean_grad(p, y, nu, k, false, p_scale, threads);
    if (config.plain_gd) {
      y -= config.learning_rate * grad;
    } else {
      const double momentum =
          epoch < config.momentum_switch_epoch ? config.momentum_initial : config.momentum_final;
      for (Index i = 0; i < n; ++i) {
        for (Index d = 0; d < m; ++d) {
          double& gain = gains(i, d);
          gain = (grad(i, d) > 0.0) != (update(i, d) > 0.0) ? gain + 0.2 : gain * 0.8;
          gain = std::max(gain, 0.01);
          update(i, d) = momentum * update(i, d) - config.learning_rate * gain * grad(i, d);
        }
      }
      y += update;
    }
    const double loss = kl(p, kernel_table(y, omega, nu, threads).q);
    if (!std::isfinite(loss) || !y.allFinite()) {
      fail(ErrorCode::NumericalFailure, "t-SNE diverged at epoch " + std::to_string(epoch + 1),
           static_cast<double>(epoch + 1));
    }
    trace.push_back(loss);
  }
  return {Embedding(std::move(y), space), std::move(trace)};
}

}  // namespace finsler
