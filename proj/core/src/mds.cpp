#include "finsler/mds.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "finsler/error.hpp"
#include "finsler/linalg.hpp"

namespace finsler {

namespace {

constexpr double kPinvCutoff = 1e-10;

void check_target(const RowMatrix& target) {
  require(target.rows() == target.cols() && target.rows() >= 2, ErrorCode::DimensionMismatch,
          "target dissimilarities must be square with at least two points");
  require(target.allFinite(), ErrorCode::InvalidArgument, "target dissimilarities must be finite");
}

bool is_symmetric(const RowMatrix& m) {
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = i + 1; j < m.cols(); ++j) {
      if (m(i, j) != m(j, i)) return false;
    }
  }
  return true;
}

Eigen::MatrixXd v_matrix(const RowMatrix& w) {
  Eigen::MatrixXd v = -Eigen::MatrixXd(w);
  for (Index i = 0; i < w.rows(); ++i) v(i, i) = w.row(i).sum() - w(i, i);
  return v;
}

}  // namespace

StressProblem::StressProblem(RowMatrix target, RandersSpace space)
    : target_(std::move(target)), space_(std::move(space)), uniform_(true) {
  check_target(target_);
  const Index n = target_.rows();
  weights_ = RowMatrix::Ones(n, n);
  weights_.diagonal().setZero();
}

StressProblem::StressProblem(RowMatrix target, RowMatrix weights, RandersSpace space)
    : target_(std::move(target)), weights_(std::move(weights)), space_(std::move(space)) {
  check_target(target_);
  require(weights_.rows() == target_.rows() && weights_.cols() == target_.cols(),
          ErrorCode::DimensionMismatch, "weights and targets differ in shape");
  require(weights_.allFinite() && (weights_.array() >= 0.0).all(), ErrorCode::InvalidArgument,
          "weights must be finite and non-negative");
  require((weights_.diagonal().array() == 0.0).all(), ErrorCode::InvalidArgument,
          "weights must have a zero diagonal");
  const Eigen::MatrixXd v = v_matrix(weights_);
  // V is symmetrised for the pseudo-inverse; only symmetric weights are majorised exactly
  v_pinv_ = linalg::symmetric_pinv(0.5 * (v + v.transpose()), kPinvCutoff, &v_null_dim_);
}

namespace {

void check_coords(const RowMatrix& coords, const StressProblem& problem) {
  require(coords.rows() == problem.size(), ErrorCode::DimensionMismatch,
          "coordinates and problem sizes differ");
  require(coords.cols() == problem.space().dim(), ErrorCode::DimensionMismatch,
          "coordinates do not match the problem space");
}

double stress_impl(const RowMatrix& coords, const StressProblem& problem, const double* omega) {
  const Index n = coords.rows();
  const Index m = coords.cols();
  const RowMatrix& d_target = problem.target();
  const RowMatrix& w = problem.weights();
  std::vector<double> diff(static_cast<std::size_t>(m));
  double total = 0.0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (i == j || w(i, j) == 0.0) continue;
      const auto g = detail::pair_geometry(&coords(j, 0), &coords(i, 0), nullptr, m, diff.data());
      double drift = 0.0;
      if (omega != nullptr) {
        for (Index k = 0; k < m; ++k) drift += omega[k] * (coords(j, k) - coords(i, k));
      }
      const double r = g.norm + drift - d_target(i, j);
      total += w(i, j) * r * r;
    }
  }
  return total;
}

/// V^+ X for the problem's weights.
RowMatrix apply_v_pinv(const StressProblem& problem, const RowMatrix& x) {
  if (problem.uniform_weights()) {
    // V = N J for unit weights, so V^+ = J / N
    const double n = static_cast<double>(problem.size());
    RowMatrix out = x.rowwise() - x.colwise().mean();
    return out / n;
  }
  if (problem.v_null_dim() > 1) {
    fail(ErrorCode::DisconnectedGraph, "weight graph is disconnected or empty",
         static_cast<double>(problem.v_null_dim()));
  }
  return problem.v_pinv() * x;
}

/// B(Y) Y with B_ij = -w_ij D_ij / d(y_i, y_j), d Euclidean (omega null) or Randers.
RowMatrix b_times_y(const RowMatrix& coords, const StressProblem& problem, const double* omega) {
  const Index n = coords.rows();
  const Index m = coords.cols();
  const RowMatrix& d_target = problem.target();
  const RowMatrix& w = problem.weights();
  RowMatrix b = RowMatrix::Zero(n, n);
  std::vector<double> diff(static_cast<std::size_t>(m));
  for (Index i = 0; i < n; ++i) {
    double diag = 0.0;
    for (Index j = 0; j < n; ++j) {
      if (i == j || w(i, j) == 0.0) continue;
      const auto g = detail::pair_geometry(&coords(i, 0), &coords(j, 0), omega, m, diff.data());
      double d = g.forward();
      if (d < kEpsDist) d = kEpsDist;
      b(i, j) = -w(i, j) * d_target(i, j) / d;
      diag -= b(i, j);
    }
    b(i, i) = diag;
  }
  return b * coords;
}

}  // namespace

double stress(const RowMatrix& coords, const StressProblem& problem) {
  check_coords(coords, problem);
  return stress_impl(coords, problem, nullptr);
}

double finsler_stress(const RowMatrix& coords, const StressProblem& problem) {
  check_coords(coords, problem);
  return stress_impl(coords, problem, problem.space().is_euclidean() ? nullptr : problem.space().omega().data());
}

RowMatrix finsler_stress_grad(const RowMatrix& coords, const StressProblem& problem) {
  check_coords(coords, problem);
  const Index n = coords.rows();
  const Index m = coords.cols();
  const Vector& omega = problem.space().omega();
  const RowMatrix& d_target = problem.target();
  const RowMatrix& w = problem.weights();
  RowMatrix grad = RowMatrix::Zero(n, m);
  std::vector<double> diff(static_cast<std::size_t>(m));
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (i == j || w(i, j) == 0.0) continue;
      // diff = y_i - y_j; d(y_i, y_j) = ||diff|| - omega^T diff
      const auto g = detail::pair_geometry(&coords(i, 0), &coords(j, 0), omega.data(), m, diff.data());
      const double r = 2.0 * w(i, j) * (g.forward() - d_target(i, j));
      for (Index k = 0; k < m; ++k) {
        const double gk = r * (diff[static_cast<std::size_t>(k)] / g.norm - omega(k));
        grad(i, k) += gk;
        grad(j, k) -= gk;
      }
    }
  }
  return grad;
}

RowMatrix smacof_step(const RowMatrix& coords, const StressProblem& problem) {
  check_coords(coords, problem);
  require(is_symmetric(problem.target()) && is_symmetric(problem.weights()), ErrorCode::InvalidArgument,
          "SMACOF needs symmetric targets and weights");
  require((problem.weights().array() > 0.0).any(), ErrorCode::DisconnectedGraph, "all weights are zero");
  return apply_v_pinv(problem, b_times_y(coords, problem, nullptr));
}

RowMatrix finsler_smacof_step(const RowMatrix& coords, const StressProblem& problem) {
  check_coords(coords, problem);
  const Index n = problem.size();
  const Index m = coords.cols();
  if (n * m > kFinslerSmacofLimit) {
    fail(ErrorCode::TooLarge,
         "Finsler SMACOF is limited to N*m <= " + std::to_string(kFinslerSmacofLimit) +
             "; use Finsler MDS gradient descent instead",
         static_cast<double>(n * m));
  }
  require((problem.weights().array() > 0.0).any(), ErrorCode::DisconnectedGraph, "all weights are zero");
  const Vector& omega = problem.space().omega();
  RowMatrix rhs = b_times_y(coords, problem, omega.data());
  if (!problem.space().is_euclidean()) {
    const RowMatrix& w = problem.weights();
    const RowMatrix& d = problem.target();
    const Vector r = (w.cwiseProduct(d) - w.transpose().cwiseProduct(d.transpose())).rowwise().sum();
    rhs -= r * omega.transpose();
    // vec(X M^-1) = (M^-1 (x) I) vec(X) with M = I + omega omega^T symmetric
    Eigen::MatrixXd mmat = Eigen::MatrixXd::Identity(m, m) + omega * omega.transpose();
    const Eigen::LLT<Eigen::MatrixXd> llt(mmat);
    if (llt.info() != Eigen::Success) fail(ErrorCode::NumericalFailure, "drift factor is singular", mmat.norm());
    const Eigen::MatrixXd minv = llt.solve(Eigen::MatrixXd::Identity(m, m));
    rhs = (rhs * minv).eval();
  }
  RowMatrix next = apply_v_pinv(problem, rhs);
  if (!next.allFinite()) fail(ErrorCode::NumericalFailure, "Finsler SMACOF produced non-finite values");
  return next;
}

StressResult run_smacof(const StressProblem& problem, const Embedding& init, int iterations) {
  require(iterations >= 0, ErrorCode::InvalidArgument, "iterations must be non-negative");
  RowMatrix y = init.coords();
  std::vector<double> trace;
  for (int it = 0; it < iterations; ++it) {
    y = smacof_step(y, problem);
    trace.push_back(stress(y, problem));
  }
  return {Embedding(std::move(y), problem.space()), std::move(trace)};
}

StressResult run_finsler_smacof(const StressProblem& problem, const Embedding& init, int iterations) {
  require(iterations >= 0, ErrorCode::InvalidArgument, "iterations must be non-negative");
  RowMatrix y = init.coords();
  std::vector<double> trace;
  for (int it = 0; it < iterations; ++it) {
    y = finsler_smacof_step(y, problem);
    trace.push_back(finsler_stress(y, problem));
  }
  return {Embedding(std::move(y), problem.space()), std::move(trace)};
}

StressResult run_finsler_mds_gd(const StressProblem& problem, const Embedding& init,
                                const AdamOptions& options) {
  require(init.dim() == problem.space().dim(), ErrorCode::DimensionMismatch,
          "init dimension does not match the problem space");
  require(options.epochs >= 0 && options.learning_rate > 0.0 && options.cosine_t_max > 0,
          ErrorCode::InvalidArgument, "invalid Adam options");
  RowMatrix y = init.coords();
  RowMatrix m1 = RowMatrix::Zero(y.rows(), y.cols());
  RowMatrix m2 = RowMatrix::Zero(y.rows(), y.cols());
  std::vector<double> trace;
  for (int t = 0; t < options.epochs; ++t) {
    const double lr = options.learning_rate *
                      (1.0 + std::cos(std::numbers::pi * static_cast<double>(t) / options.cosine_t_max)) / 2.0;
    RowMatrix g = finsler_stress_grad(y, problem);
    g += options.weight_decay * y;
    m1 = options.beta1 * m1 + (1.0 - options.beta1) * g;
    m2 = options.beta2 * m2 + (1.0 - options.beta2) * g.cwiseProduct(g);
    const double c1 = 1.0 - std::pow(options.beta1, t + 1);
    const double c2 = 1.0 - std::pow(options.beta2, t + 1);
    y.array() -= lr * (m1.array() / c1) / ((m2.array() / c2).sqrt() + options.epsilon);
    const double s = finsler_stress(y, problem);
    if (!std::isfinite(s) || !y.allFinite()) {
      fail(ErrorCode::NumericalFailure, "Finsler MDS diverged at epoch " + std::to_string(t + 1),
           static_cast<double>(t + 1));
    }
    trace.push_back(s);
  }
  return {Embedding(std::move(y), problem.space()), std::move(trace)};
}

}  // namespace finsler
