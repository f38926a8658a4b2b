#pragma once

#include <vector>

#include "finsler/embedding.hpp"
#include "finsler/geometry.hpp"
#include "finsler/types.hpp"

namespace finsler {

/// Weighted stress over ordered pairs: sum_{i != j} w_ij (d(y_i, y_j) - D_ij)^2.
/// D may be asymmetric; W is non-negative with a zero diagonal.
class StressProblem {
 public:
  /// Uniform weights (1 off the diagonal).
  StressProblem(RowMatrix target, RandersSpace space);
  StressProblem(RowMatrix target, RowMatrix weights, RandersSpace space);

  Index size() const { return target_.rows(); }
  const RowMatrix& target() const { return target_; }
  const RowMatrix& weights() const { return weights_; }
  const RandersSpace& space() const { return space_; }
  bool uniform_weights() const { return uniform_; }
  /// Pseudo-inverse of V for explicit weights (empty for uniform weights)
  /// and the dimension of its discarded null space.
  const Eigen::MatrixXd& v_pinv() const { return v_pinv_; }
  Index v_null_dim() const { return v_null_dim_; }

 private:
  RowMatrix target_;
  RowMatrix weights_;
  RandersSpace space_;
  bool uniform_ = false;
  Eigen::MatrixXd v_pinv_;
  Index v_null_dim_ = 1;
};

/// Stress with Euclidean embedding distances.
double stress(const RowMatrix& coords, const StressProblem& problem);
/// Stress with Randers distances of problem.space().
double finsler_stress(const RowMatrix& coords, const StressProblem& problem);
/// Analytic gradient of finsler_stress.
RowMatrix finsler_stress_grad(const RowMatrix& coords, const StressProblem& problem);

/// One Guttman transform Y' = V^+ B(Y) Y (Euclidean; D and W symmetric).
/// Throws DisconnectedGraph for weights that leave V with a larger null space.
RowMatrix smacof_step(const RowMatrix& coords, const StressProblem& problem);

/// One Finsler SMACOF update vec(Y') = K^+ vec(B(Y) Y - C) with
/// K = (I + omega omega^T) (x) V, C = (W.D - W^T.D^T) 1 omega^T and B built
/// from Randers distances. Solved through the Kronecker factors. No monotone
/// decrease guarantee. Refuses (TooLarge) when N * m > kFinslerSmacofLimit.
RowMatrix finsler_smacof_step(const RowMatrix& coords, const StressProblem& problem);

inline constexpr Index kFinslerSmacofLimit = 4000;

struct StressResult {
  Embedding embedding;
  std::vector<double> stress_trace;
};

/// Repeated smacof_step (Euclidean) or finsler_smacof_step.
StressResult run_smacof(const StressProblem& problem, const Embedding& init, int iterations);
StressResult run_finsler_smacof(const StressProblem& problem, const Embedding& init,
                                int iterations);

struct AdamOptions {
  double learning_rate = 1e-3;
  int epochs = 100;
  double weight_decay = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  /// Cosine annealing period; lr_t = lr (1 + cos(pi t / t_max)) / 2.
  int cosine_t_max = 100;
};

/// Full-batch Adam on finsler_stress with cosine-annealed step size.
/// Throws NumericalFailure on NaN.
StressResult run_finsler_mds_gd(const StressProblem& problem, const Embedding& init,
                                const AdamOptions& options = {});

}  // namespace finsler
