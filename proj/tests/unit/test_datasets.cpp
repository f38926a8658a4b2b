#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <map>
#include <numbers>
#include <set>

#include "finsler/datasets.hpp"
#include "finsler/error.hpp"

using namespace finsler;

#ifndef FINSLER_TEST_DATA
#define FINSLER_TEST_DATA "tests/data"
#endif

namespace {

// quantise so that float noise does not split equal values
double key(double x) { return std::round(x * 1e9) / 1e9; }

}  // namespace

TEST(GenDisk, PolarGrid) {
  const auto d = gen_disk(300);
  ASSERT_EQ(d.n_points(), 300);
  ASSERT_EQ(d.n_dims(), 2);
  std::set<double> radii, angles;
  std::map<double, int> per_radius;
  for (Index i = 0; i < 300; ++i) {
    const double r = std::hypot(d.values()(i, 0), d.values()(i, 1));
    EXPECT_LE(r, 1.0 + 1e-15);
    radii.insert(key(r));
    angles.insert(key(std::atan2(d.values()(i, 1), d.values()(i, 0))));
    ++per_radius[key(r)];
  }
  EXPECT_EQ(radii.size(), 15u);
  EXPECT_EQ(angles.size(), 20u);
  for (const auto& [r, count] : per_radius) EXPECT_EQ(count, 20);
  EXPECT_THROW(gen_disk(301), Error);
}

TEST(GenSwissRoll, GridSizeAndShape) {
  const auto s = gen_swiss_roll(2000);
  ASSERT_EQ(s.points.n_points(), 1887);
  ASSERT_EQ(s.uv.rows(), 1887);
  const double lo = 1.5 * std::numbers::pi, hi = 4.5 * std::numbers::pi;
  bool found_origin = false;
  for (Index i = 0; i < 1887; ++i) {
    const double r = std::hypot(s.points.values()(i, 0), s.points.values()(i, 2));
    EXPECT_GE(r, lo - 1e-12);
    EXPECT_LE(r, hi + 1e-12);
    if (s.uv(i, 0) == 0.0 && s.uv(i, 1) == 0.0) {
      found_origin = true;
      EXPECT_NEAR(s.points.values()(i, 0), 0.0, 1e-12);
      EXPECT_EQ(s.points.values()(i, 1), 0.0);
      EXPECT_NEAR(s.points.values()(i, 2), -lo, 1e-12);
    }
  }
  EXPECT_TRUE(found_origin);
  EXPECT_EQ(gen_swiss_roll(2000).points.values(), s.points.values());
}

TEST(GenPersistence, QuantileAndCovariances) {
  EXPECT_NEAR(exponential_quantile(0.99, 1.0), 4.6052, 1e-4);
  PersistenceOptions o;
  const auto p = gen_persistence(o);
  ASSERT_EQ(p.points.n_points(), 500);
  ASSERT_EQ(p.points.n_dims(), 10);
  ASSERT_EQ(p.covariances.size(), 5u);
  for (const auto& c : p.covariances) {
    EXPECT_LE((c - c.transpose()).cwiseAbs().maxCoeff(), 1e-15);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c);
    EXPECT_GT(es.eigenvalues().minCoeff(), o.eps);
    EXPECT_LT(es.eigenvalues().maxCoeff(), o.eig_scale + o.eps);
  }
}

TEST(GenPersistence, DecreasingClassSizes) {
  PersistenceOptions o;
  const auto p = gen_persistence(o);
  std::vector<int> counts(5, 0);
  for (int l : p.labels) {
    ASSERT_GE(l, 0);
    ASSERT_LT(l, 5);
    ++counts[static_cast<std::size_t>(l)];
  }
  for (std::size_t c = 1; c < 3; ++c) EXPECT_GT(counts[c - 1], counts[c]);
  EXPECT_GT(counts[0], 250);
  EXPECT_EQ(gen_persistence(o).points.values(), p.points.values());
  // the two smallest classes are close in expectation; their order holds over many seeds
  std::vector<int> total(5, 0);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    o.seed = seed;
    const auto q = gen_persistence(o);
    if (seed == 1) EXPECT_NE(q.points.values(), p.points.values());
    for (int l : q.labels) ++total[static_cast<std::size_t>(l)];
  }
  for (std::size_t c = 1; c < 5; ++c) EXPECT_GT(total[c - 1], total[c]);
}

TEST(Csv, PlainAndHeader) {
  const auto a = parse_points_csv("0,0\n1,1\n");
  EXPECT_EQ(a.n_points(), 2);
  EXPECT_EQ(a.n_dims(), 2);
  const auto b = parse_points_csv("x,y\n0.5,2\n-1e-3,4\n");
  EXPECT_EQ(b.n_points(), 2);
  EXPECT_EQ(b.values()(1, 0), -1e-3);
}

TEST(Csv, ErrorsCarryLineNumbers) {
  for (const std::string text : {"1,2\n3\n", "1,2\n3,abc\n"}) {
    try {
      parse_points_csv(text);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::ParseError);
      EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
    }
  }
}

TEST(Csv, Iris) {
  const auto d = load_points_csv(FINSLER_TEST_DATA "/iris.csv");
  EXPECT_EQ(d.n_points(), 150);
  EXPECT_EQ(d.n_dims(), 4);
  const auto l = load_labels_csv(FINSLER_TEST_DATA "/iris_labels.csv");
  EXPECT_EQ(l.labels.size(), 150u);
  EXPECT_EQ(l.categories.size(), 3u);
  EXPECT_EQ(l.categories[0], "setosa");
}

TEST(Labels, IntegersAndStrings) {
  EXPECT_EQ(parse_labels("3\n1\n3\n").labels, (Labels{3, 1, 3}));
  const auto s = parse_labels("b\na\nb\n");
  EXPECT_EQ(s.labels, (Labels{0, 1, 0}));
  EXPECT_EQ(s.categories, (std::vector<std::string>{"b", "a"}));
  EXPECT_THROW(parse_labels(""), Error);
}
