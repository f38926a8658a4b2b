#include <gtest/gtest.h>

#include <random>

#include "finsler/tsne.hpp"
#include "support.hpp"

using namespace finsler;
namespace ft = finsler::testing;

namespace {

Dissimilarities from_dense(const RowMatrix& m, Symmetry sym) {
  std::vector<std::vector<Entry>> rows(static_cast<std::size_t>(m.rows()));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j)
      if (i != j) rows[static_cast<std::size_t>(i)].push_back({j, m(i, j)});
  return Dissimilarities(std::move(rows), Normalization::None, sym);
}

// naive KL(p || q) from a literal double loop over the kernel
double naive_kl(const Dissimilarities& p, const RowMatrix& y, const Vector& omega, double nu, double exponent) {
  const Index n = y.rows();
  RowMatrix t = RowMatrix::Zero(n, n);
  double z = 0.0;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const double d = (y.row(j) - y.row(i)).norm() + omega.dot((y.row(j) - y.row(i)).transpose());
      t(i, j) = std::pow(1.0 + d * d / nu, exponent);
      z += t(i, j);
    }
  double kl = 0.0;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      const double pij = p.at(i, j);
      if (i != j && pij > 0) kl += pij * std::log(pij / (t(i, j) / z));
    }
  return kl;
}

}  // namespace

TEST(TsneQ, TwoPointsAndEquilateral) {
  RowMatrix y(2, 2);
  y << 0, 0, 3, 1;
  const auto k = tsne_q(y, 1.0);
  EXPECT_DOUBLE_EQ(k.q(0, 1), 0.5);
  EXPECT_DOUBLE_EQ(k.q(1, 0), 0.5);
  RowMatrix tri(3, 2);
  tri << 0, 0, 1, 0, 0.5, std::sqrt(3.0) / 2;
  const auto q = tsne_q(tri, 1.0).q;
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 3; ++j)
      if (i != j) EXPECT_NEAR(q(i, j), 1.0 / 6.0, 1e-12);
}

TEST(TsneQ, NormalisedAndFinslerReduces) {
  std::mt19937_64 rng(1);
  RowMatrix y = ft::random_matrix(15, 3, rng);
  const auto q = tsne_q(y, 2.0);
  EXPECT_NEAR(q.q.sum(), 1.0, 1e-9);
  const auto qf = finsler_tsne_q(Embedding::euclidean(y), 2.0);
  EXPECT_EQ(q.q, qf.q);
  EXPECT_EQ(q.normalizer, qf.normalizer);
  const auto qa = finsler_tsne_q(Embedding(y, RandersSpace(ft::random_direction(3, 0.6, rng))), 2.0);
  EXPECT_NEAR(qa.q.sum(), 1.0, 1e-9);
}

TEST(TsneQ, FinslerPairIsAsymmetric) {
  RowMatrix y(2, 2);
  y << 0, 0, 0, 1;
  Vector w(2);
  w << 0, 0.5;
  const auto q = finsler_tsne_q(Embedding(y, RandersSpace(w)), 1.0).q;
  EXPECT_NE(q(0, 1), q(1, 0));
  EXPECT_NEAR(q(0, 1) + q(1, 0), 1.0, 1e-15);
  EXPECT_LT(q(0, 1), q(1, 0));
}

TEST(TsneGrad, ZeroAtStationaryPoint) {
  std::mt19937_64 rng(2);
  RowMatrix y = ft::random_matrix(8, 2, rng);
  const RowMatrix q = tsne_q(y, 1.0).q;
  const auto p = from_dense(q, Symmetry::Symmetric);
  EXPECT_LE(tsne_grad_fixed(p, y, 1.0).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LE(tsne_grad_legacy(p, y, 1.0).cwiseAbs().maxCoeff(), 1e-14);
  Embedding e(y, RandersSpace(ft::random_direction(2, 0.5, rng)));
  const auto pf = from_dense(finsler_tsne_q(e, 2.0).q, Symmetry::Asymmetric);
  EXPECT_LE(finsler_tsne_grad(pf, e, 2.0).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(TsneGrad, FixedMatchesFiniteDifferences) {
  std::mt19937_64 rng(3);
  const auto p = ft::random_joint_p(10, rng, true);
  RowMatrix y = ft::random_matrix(10, 2, rng);
  const auto num = ft::numeric_gradient([&](const RowMatrix& x) { return tsne_loss(p, x, 3.0); }, y);
  EXPECT_LE(ft::relative_error(tsne_grad_fixed(p, y, 3.0), num), 1e-5);
}

TEST(TsneGrad, LegacyOnlyCorrectForNuOne) {
  std::mt19937_64 rng(4);
  const auto p = ft::random_joint_p(10, rng, true);
  RowMatrix y = ft::random_matrix(10, 2, rng);
  EXPECT_LE((tsne_grad_fixed(p, y, 1.0) - tsne_grad_legacy(p, y, 1.0)).cwiseAbs().maxCoeff(), 1e-12);
  const auto num = ft::numeric_gradient([&](const RowMatrix& x) { return tsne_loss(p, x, 2.0); }, y);
  EXPECT_GT((tsne_grad_fixed(p, y, 2.0) - tsne_grad_legacy(p, y, 2.0)).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_GT(ft::relative_error(tsne_grad_legacy(p, y, 2.0), num), 1e-2);
  EXPECT_LE(ft::relative_error(tsne_grad_fixed(p, y, 2.0), num), 1e-5);
}

TEST(TsneLoss, MatchesNaiveOracle) {
  std::mt19937_64 rng(5);
  const auto p = ft::random_joint_p(9, rng, false);
  RowMatrix y = ft::random_matrix(9, 3, rng);
  RandersSpace s(ft::random_direction(3, 0.5, rng));
  EXPECT_NEAR(finsler_tsne_loss(p, Embedding(y, s), 2.0), naive_kl(p, y, s.omega(), 2.0, -1.5), 1e-12);
  const auto ps = ft::random_joint_p(9, rng, true);
  EXPECT_NEAR(tsne_loss(ps, y, 1.0), naive_kl(ps, y, Vector::Zero(3), 1.0, -1.0), 1e-12);
}

TEST(FinslerTsneGrad, MatchesFiniteDifferences) {
  std::mt19937_64 rng(6);
  const auto p = ft::random_joint_p(10, rng, false);
  RowMatrix y = ft::random_matrix(10, 3, rng);
  RandersSpace s(ft::random_direction(3, 0.5, rng));
  const auto g = finsler_tsne_grad(p, Embedding(y, s), 2.0);
  const auto num = ft::numeric_gradient(
      [&](const RowMatrix& x) { return finsler_tsne_loss(p, Embedding(x, s), 2.0); }, y);
  EXPECT_LE(ft::relative_error(g, num), 1e-5);
  EXPECT_LE(g.colwise().sum().cwiseAbs().maxCoeff(), 1e-12);
}

TEST(FinslerTsneGrad, ReducesToFixedGradient) {
  std::mt19937_64 rng(7);
  const auto p = ft::random_joint_p(12, rng, true);
  RowMatrix y = ft::random_matrix(12, 2, rng);
  const auto a = finsler_tsne_grad(p, Embedding::euclidean(y), 1.0);
  EXPECT_LE((a - tsne_grad_fixed(p, y, 1.0)).cwiseAbs().maxCoeff(), 1e-12);
}

// four points, two tight pairs: the pairs stay together and apart from each other
TEST(RunTsne, TwoPairsDecreaseMonotonically) {
  RowMatrix m = RowMatrix::Constant(4, 4, 0.01);
  m(0, 1) = m(1, 0) = m(2, 3) = m(3, 2) = 0.23;
  m.diagonal().setZero();
  const auto p = from_dense(m, Symmetry::Symmetric);
  RowMatrix y(4, 2);
  y << 0, 0, 2, 1, 1, 0, 3, 1;
  TsneConfig c;
  c.plain_gd = true;
  c.epochs = 300;
  c.learning_rate = 1.0;
  const auto r = run_tsne(p, c, Embedding::euclidean(y), RandersSpace::euclidean(2));
  for (std::size_t e = 1; e < r.loss_trace.size(); ++e) EXPECT_LE(r.loss_trace[e], r.loss_trace[e - 1]);
  const auto& out = r.embedding.coords();
  const double within = std::max((out.row(0) - out.row(1)).norm(), (out.row(2) - out.row(3)).norm());
  for (Index i : {0, 1})
    for (Index j : {2, 3}) EXPECT_LT(within, (out.row(i) - out.row(j)).norm());
}

TEST(RunTsne, StationaryAtOptimum) {
  RowMatrix tri(3, 2);
  tri << 0, 0, 1, 0, 0.5, std::sqrt(3.0) / 2;
  const auto p = from_dense(tsne_q(tri, 1.0).q, Symmetry::Symmetric);
  TsneConfig c;
  c.plain_gd = true;
  c.epochs = 20;
  const auto r = run_tsne(p, c, Embedding::euclidean(tri), RandersSpace::euclidean(2));
  for (std::size_t e = 1; e < r.loss_trace.size(); ++e)
    EXPECT_LT(std::abs(r.loss_trace[e] - r.loss_trace[e - 1]), 1e-10);
}

TEST(RunTsne, Reproducible) {
  std::mt19937_64 rng(8);
  const auto p = ft::random_joint_p(20, rng, false);
  RowMatrix y = ft::random_matrix(20, 3, rng, 1e-2);
  RandersSpace s = RandersSpace::along_last_axis(3, 0.3);
  TsneConfig c;
  c.epochs = 100;
  const auto a = run_tsne(p, c, Embedding(y, s), s);
  const auto b = run_tsne(p, c, Embedding(y, s), s);
  EXPECT_EQ(a.loss_trace, b.loss_trace);
  EXPECT_EQ(a.embedding.coords(), b.embedding.coords());
  c.threads = 3;
  EXPECT_EQ(run_tsne(p, c, Embedding(y, s), s).embedding.coords(), a.embedding.coords());
}
