#pragma once

#include <optional>
#include <vector>

#include "finsler/dissim.hpp"
#include "finsler/embedding.hpp"
#include "finsler/types.hpp"

namespace finsler {

inline constexpr double kQFloor = 1e-12;

struct TsneConfig {
  double perplexity = 30.0;
  /// Degrees of freedom of the Student kernel; max(m - 1, 1) when unset.
  std::optional<double> nu;
  int epochs = 1000;
  double learning_rate = 200.0;
  double momentum_initial = 0.5;
  double momentum_final = 0.8;
  int momentum_switch_epoch = 250;
  double early_exaggeration = 12.0;
  int exaggeration_epochs = 250;
  /// Plain gradient descent: no momentum, gains or exaggeration.
  bool plain_gd = false;
  /// Worker threads for the O(N^2) gradient; results do not depend on it.
  int threads = 1;
};

double default_nu(Index dim);

/// Joint embedding similarities, dense N x N with a zero diagonal.
struct StudentKernel {
  RowMatrix q;
  double normalizer;  // sum over ordered pairs of the unnormalised kernel
};

/// q_ij = t_ij / sum_{k != l} t_kl, t_ij = (1 + d_ij^2 / nu)^(-(nu+1)/2), floored at kQFloor.
StudentKernel tsne_q(const RowMatrix& coords, double nu);

/// Same kernel on the Randers distance d(y_i, y_j); asymmetric unless omega = 0.
StudentKernel finsler_tsne_q(const Embedding& embedding, double nu);

/// Corrected gradient of KL(p || q) for a symmetric p with total mass 1:
/// 2 (nu+1)/nu sum_j (p_ij - q_ij) (1 + d_ij^2/nu)^-1 (y_i - y_j).
RowMatrix tsne_grad_fixed(const Dissimilarities& p, const RowMatrix& coords, double nu);

/// The widely published variant with exponent -(nu+1)/2 in place of -1.
/// Only correct for nu = 1; kept for regression comparisons.
RowMatrix tsne_grad_legacy(const Dissimilarities& p, const RowMatrix& coords, double nu);

/// Gradient of -sum p_ij ln q^F_ij for an asymmetric p with total mass 1.
/// Combines ray forces along y_i - y_j with drift forces along omega.
RowMatrix finsler_tsne_grad(const Dissimilarities& p, const Embedding& embedding, double nu);

/// KL(p || q) (Euclidean) and KL(p || q^F).
double tsne_loss(const Dissimilarities& p, const RowMatrix& coords, double nu);
double finsler_tsne_loss(const Dissimilarities& p, const Embedding& embedding, double nu);

struct TsneResult {
  Embedding embedding;
  std::vector<double> loss_trace;  // KL after each epoch
};

/// Gradient descent on KL(p || q) in `space` (Finsler when omega != 0).
/// `p` must have total mass 1. Throws NumericalFailure on a NaN loss.
TsneResult run_tsne(const Dissimilarities& p, const TsneConfig& config, const Embedding& init,
                    const RandersSpace& space);

}  // namespace finsler
