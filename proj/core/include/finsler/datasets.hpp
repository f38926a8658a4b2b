#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "finsler/types.hpp"

namespace finsler {

/// Uniform polar grid on the unit disk: 20 angles times n/20 radii
/// (radii r/(n/20), r = 1..n/20). Denser near the centre in Cartesian terms.
DataMatrix gen_disk(Index n);

struct SwissRoll {
  DataMatrix points;
  RowMatrix uv;  // grid parameters in [0, 1]^2, one row per point
};

/// Regular floor(5/2 sqrt(n)) x floor(2/5 sqrt(n)) grid on the unit square
/// mapped by x = (u~ cos u~, v~, u~ sin u~), u~ = 3 pi (u + 1/2), v~ = 20 v.
SwissRoll gen_swiss_roll(Index n_target);

struct PersistenceOptions {
  Index n = 500;
  Index dims = 10;
  int classes = 5;
  double lambda_exp = 1.0;
  double p_exp = 0.99;
  double eig_scale = 0.1;
  double eps = 1e-5;
  std::uint64_t seed = 0;
};

struct PersistenceData {
  DataMatrix points;
  Labels labels;
  std::vector<RowMatrix> covariances;
  RowMatrix means;  // classes x dims
};

/// Gaussian mixture with exponentially decaying class sizes. Labels are
/// floor(C c / q) clipped to [0, C-1] for c ~ Exp(lambda) and q the p-quantile
/// of Exp(lambda); covariances B sigmoid_s(Lambda) B^T + eps I from random
/// A A^T, A ~ U[0,1]^(n x n); means ~ U[0,1]^n.
PersistenceData gen_persistence(const PersistenceOptions& options);

/// p-quantile of Exp(lambda): -ln(1 - p) / lambda.
double exponential_quantile(double p, double lambda);

/// Rectangular numeric CSV ('.' decimals, ',' separators). A first line that
/// does not parse as numbers is treated as a header. Throws ParseError with
/// the 1-based line number for ragged rows or non-numeric cells.
DataMatrix load_points_csv(const std::filesystem::path& path);
DataMatrix parse_points_csv(const std::string& text);

struct LabelColumn {
  Labels labels;
  /// Category names in id order when the file held strings; empty for
  /// integer labels.
  std::vector<std::string> categories;
};

/// One label per line: integers are used as-is, anything else is interned in
/// order of first appearance.
LabelColumn load_labels_csv(const std::filesystem::path& path);
LabelColumn parse_labels(const std::string& text);

}  // namespace finsler
