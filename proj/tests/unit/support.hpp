#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "finsler/dissim.hpp"
#include "finsler/types.hpp"

namespace finsler::testing {

inline constexpr double kFdStep = 1e-6;

inline RowMatrix random_matrix(Index rows, Index cols, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  RowMatrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

inline Vector random_direction(Index dim, double magnitude, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Vector v(dim);
  for (Index i = 0; i < dim; ++i) v[i] = normal(rng);
  return magnitude == 0.0 ? Vector::Zero(dim) : Vector(v.normalized() * magnitude);
}

// central differences of f over every entry of x
inline RowMatrix numeric_gradient(const std::function<double(const RowMatrix&)>& f, const RowMatrix& x,
                                  double h = kFdStep) {
  RowMatrix g(x.rows(), x.cols());
  RowMatrix work = x;
  for (Index i = 0; i < x.size(); ++i) {
    const double orig = work.data()[i];
    work.data()[i] = orig + h;
    const double up = f(work);
    work.data()[i] = orig - h;
    const double down = f(work);
    work.data()[i] = orig;
    g.data()[i] = (up - down) / (2.0 * h);
  }
  return g;
}

inline double relative_error(const RowMatrix& analytic, const RowMatrix& numeric) {
  return (analytic - numeric).norm() / std::max(numeric.norm(), 1e-300);
}

inline double relative_error(const Vector& analytic, const Vector& numeric) {
  return (analytic - numeric).norm() / std::max(numeric.norm(), 1e-300);
}

// dense random p with total mass 1; symmetric when asked
inline Dissimilarities random_joint_p(Index n, std::mt19937_64& rng, bool symmetric) {
  std::uniform_real_distribution<double> unif(0.05, 1.0);
  RowMatrix m(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) m(i, j) = i == j ? 0.0 : unif(rng);
  if (symmetric) m = RowMatrix(0.5 * (m + m.transpose()));
  m /= m.sum();
  std::vector<std::vector<Entry>> rows(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if (i != j) rows[static_cast<std::size_t>(i)].push_back({j, m(i, j)});
  return Dissimilarities(std::move(rows), Normalization::None,
                         symmetric ? Symmetry::Symmetric : Symmetry::Asymmetric);
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const auto n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

// average ranks, ties share the mean rank
inline std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    for (std::size_t t = i; t <= j; ++t) r[idx[t]] = 0.5 * static_cast<double>(i + j);
    i = j + 1;
  }
  return r;
}

inline double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  return pearson(ranks(a), ranks(b));
}

}  // namespace finsler::testing
