#include <gtest/gtest.h>

#include <Eigen/QR>
#include <random>

#include "finsler/error.hpp"
#include "finsler/init.hpp"
#include "finsler/mds.hpp"
#include "support.hpp"

using namespace finsler;
namespace ft = finsler::testing;

namespace {

RowMatrix pairwise(const RowMatrix& x) {
  RowMatrix d(x.rows(), x.rows());
  for (Index i = 0; i < x.rows(); ++i)
    for (Index j = 0; j < x.rows(); ++j) d(i, j) = (x.row(i) - x.row(j)).norm();
  return d;
}

RowMatrix random_targets(Index n, std::mt19937_64& rng, bool symmetric) {
  std::uniform_real_distribution<double> unif(0.5, 2.0);
  RowMatrix d(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) d(i, j) = i == j ? 0.0 : unif(rng);
  if (symmetric) d = RowMatrix(0.5 * (d + d.transpose()));
  return d;
}

double naive_stress(const RowMatrix& y, const RowMatrix& d, const RowMatrix& w, const Vector& omega) {
  double s = 0.0;
  for (Index i = 0; i < y.rows(); ++i)
    for (Index j = 0; j < y.rows(); ++j) {
      if (i == j) continue;
      const Vector diff = (y.row(j) - y.row(i)).transpose();
      const double r = diff.norm() + omega.dot(diff) - d(i, j);
      s += w(i, j) * r * r;
    }
  return s;
}

// vec(Y') = K^+ vec(B(Y) Y - C), every matrix built densely
RowMatrix literal_finsler_smacof(const RowMatrix& y, const RowMatrix& d, const RowMatrix& w, const Vector& omega) {
  const Index n = y.rows(), m = y.cols();
  Eigen::MatrixXd v = -Eigen::MatrixXd(w);
  for (Index i = 0; i < n; ++i) v(i, i) = w.row(i).sum() - w(i, i);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const Vector diff = (y.row(j) - y.row(i)).transpose();
      b(i, j) = -w(i, j) * d(i, j) / (diff.norm() + omega.dot(diff));
    }
  for (Index i = 0; i < n; ++i) b(i, i) = -b.row(i).sum();
  const Eigen::MatrixXd wd = w.cwiseProduct(d);
  const Eigen::MatrixXd c = (wd - wd.transpose()) * Eigen::VectorXd::Ones(n) * omega.transpose();
  const Eigen::MatrixXd m_factor = Eigen::MatrixXd::Identity(m, m) + omega * omega.transpose();
  Eigen::MatrixXd k(n * m, n * m);
  for (Index a = 0; a < m; ++a)
    for (Index bb = 0; bb < m; ++bb) k.block(a * n, bb * n, n, n) = m_factor(a, bb) * v;
  const Eigen::MatrixXd rhs = b * Eigen::MatrixXd(y) - c;
  const Eigen::VectorXd vec_rhs = Eigen::Map<const Eigen::VectorXd>(rhs.data(), n * m);
  const Eigen::VectorXd vec_y = k.completeOrthogonalDecomposition().pseudoInverse() * vec_rhs;
  Eigen::MatrixXd out = Eigen::Map<const Eigen::MatrixXd>(vec_y.data(), n, m);
  return out;
}

}  // namespace

TEST(Stress, PerfectFitAndReduction) {
  std::mt19937_64 rng(1);
  RowMatrix y = ft::random_matrix(8, 2, rng);
  StressProblem exact(pairwise(y), RandersSpace::euclidean(2));
  EXPECT_LE(stress(y, exact), 1e-24);
  StressProblem p(random_targets(8, rng, false), RandersSpace::euclidean(2));
  EXPECT_EQ(stress(y, p), finsler_stress(y, p));
}

TEST(Stress, MatchesDoubleLoop) {
  std::mt19937_64 rng(2);
  RowMatrix y = ft::random_matrix(9, 3, rng);
  RowMatrix d = random_targets(9, rng, false);
  RowMatrix w = random_targets(9, rng, false);
  RandersSpace s(ft::random_direction(3, 0.4, rng));
  StressProblem p(d, w, s);
  EXPECT_NEAR(finsler_stress(y, p), naive_stress(y, d, w, s.omega()), 1e-10);
  EXPECT_NEAR(stress(y, p), naive_stress(y, d, w, Vector::Zero(3)), 1e-10);
}

TEST(Stress, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(3);
  RowMatrix y = ft::random_matrix(10, 2, rng);
  RandersSpace s(ft::random_direction(2, 0.3, rng));
  StressProblem p(random_targets(10, rng, false), s);
  const auto g = finsler_stress_grad(y, p);
  const auto num = ft::numeric_gradient([&](const RowMatrix& x) { return finsler_stress(x, p); }, y);
  EXPECT_LE(ft::relative_error(g, num), 1e-5);
  EXPECT_LE(g.colwise().sum().cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Smacof, TwoPointGuttmanTransform) {
  RowMatrix d(2, 2);
  d << 0, 2, 2, 0;
  RowMatrix y(2, 1);
  y << 0, 1;
  const auto next = smacof_step(y, StressProblem(d, RandersSpace::euclidean(1)));
  EXPECT_DOUBLE_EQ(std::abs(next(1, 0) - next(0, 0)), 2.0);
}

TEST(Smacof, FixedPointAndMonotone) {
  std::mt19937_64 rng(4);
  RowMatrix y = ft::random_matrix(10, 2, rng);
  y = RowMatrix(y.rowwise() - y.colwise().mean());
  const StressProblem exact(pairwise(y), RandersSpace::euclidean(2));
  EXPECT_LE((smacof_step(y, exact) - y).cwiseAbs().maxCoeff(), 1e-10);

  const StressProblem p(random_targets(10, rng, true), RandersSpace::euclidean(2));
  RowMatrix x = ft::random_matrix(10, 2, rng);
  double prev = stress(x, p);
  for (int it = 0; it < 50; ++it) {
    x = smacof_step(x, p);
    const double s = stress(x, p);
    EXPECT_LE(s, prev + 1e-10);
    prev = s;
  }
}

TEST(Smacof, ExplicitUnitWeightsMatchUniform) {
  std::mt19937_64 rng(5);
  const RowMatrix d = random_targets(7, rng, true);
  const RowMatrix w = RowMatrix::Ones(7, 7) - RowMatrix::Identity(7, 7);
  RowMatrix y = ft::random_matrix(7, 2, rng);
  const auto a = smacof_step(y, StressProblem(d, RandersSpace::euclidean(2)));
  const auto b = smacof_step(y, StressProblem(d, w, RandersSpace::euclidean(2)));
  EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Smacof, RejectsAsymmetricTargets) {
  std::mt19937_64 rng(6);
  const StressProblem p(random_targets(5, rng, false), RandersSpace::euclidean(2));
  EXPECT_THROW(smacof_step(ft::random_matrix(5, 2, rng), p), Error);
}

TEST(Smacof, DisconnectedWeightsThrow) {
  RowMatrix w = RowMatrix::Zero(4, 4);
  w(0, 1) = w(1, 0) = w(2, 3) = w(3, 2) = 1;
  RowMatrix d = RowMatrix::Ones(4, 4) - RowMatrix::Identity(4, 4);
  std::mt19937_64 rng(7);
  try {
    smacof_step(ft::random_matrix(4, 2, rng), StressProblem(d, w, RandersSpace::euclidean(2)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DisconnectedGraph);
  }
}

TEST(FinslerSmacof, ReducesToSmacof) {
  std::mt19937_64 rng(8);
  const RowMatrix d = random_targets(9, rng, true);
  RowMatrix y = ft::random_matrix(9, 3, rng);
  const StressProblem p(d, RandersSpace::euclidean(3));
  EXPECT_LE((finsler_smacof_step(y, p) - smacof_step(y, p)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(FinslerSmacof, MatchesLiteralKroneckerOracle) {
  std::mt19937_64 rng(9);
  for (int rep = 0; rep < 5; ++rep) {
    const RowMatrix d = random_targets(3, rng, false);
    RowMatrix w = random_targets(3, rng, true);
    if (rep < 2) w = RowMatrix::Ones(3, 3) - RowMatrix::Identity(3, 3);
    RowMatrix y = ft::random_matrix(3, 2, rng);
    RandersSpace s(ft::random_direction(2, 0.4, rng));
    const auto next = finsler_smacof_step(y, StressProblem(d, w, s));
    EXPECT_LE((next - literal_finsler_smacof(y, d, w, s.omega())).cwiseAbs().maxCoeff(), 1e-10) << rep;
  }
}

TEST(FinslerSmacof, SymmetricTargetsHaveNoDriftTerm) {
  std::mt19937_64 rng(10);
  const RowMatrix d = random_targets(3, rng, true);
  RowMatrix y = ft::random_matrix(3, 2, rng);
  RandersSpace s(ft::random_direction(2, 0.4, rng));
  const RowMatrix w = RowMatrix::Ones(3, 3) - RowMatrix::Identity(3, 3);
  // with C = 0 the oracle and the solver agree without the drift correction
  const RowMatrix wd = w.cwiseProduct(d);
  EXPECT_EQ((wd - wd.transpose()).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_LE((finsler_smacof_step(y, StressProblem(d, s)) - literal_finsler_smacof(y, d, w, s.omega()))
                .cwiseAbs()
                .maxCoeff(),
            1e-10);
}

TEST(FinslerSmacof, RefusesLargeProblems) {
  const Index n = 2001;
  try {
    finsler_smacof_step(RowMatrix::Zero(n, 2), StressProblem(RowMatrix::Zero(n, n), RandersSpace::euclidean(2)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooLarge);
  }
}

TEST(FinslerMdsGd, ExactPlanarFromIsomap) {
  RowMatrix x(4, 2);
  x << 0, 0, 3, 0, 1, 2, -1, 5;
  const RowMatrix d = pairwise(x);
  const StressProblem p(d, RandersSpace::euclidean(2));
  const auto r = run_finsler_mds_gd(p, isomap_embed(d, 2), AdamOptions{});
  EXPECT_LT(r.stress_trace.back(), 1e-4);
  EXPECT_EQ(r.stress_trace.size(), 100u);
}

TEST(FinslerMdsGd, ReproducibleAndDecreasing) {
  std::mt19937_64 rng(11);
  RandersSpace s = RandersSpace::along_last_axis(3, 0.3);
  const StressProblem p(random_targets(20, rng, false), s);
  RowMatrix y = ft::random_matrix(20, 3, rng);
  AdamOptions o;
  o.learning_rate = 0.05;
  const auto a = run_finsler_mds_gd(p, Embedding(y, s), o);
  const auto b = run_finsler_mds_gd(p, Embedding(y, s), o);
  EXPECT_EQ(a.stress_trace, b.stress_trace);
  EXPECT_LT(a.stress_trace.back(), finsler_stress(y, p));
}
