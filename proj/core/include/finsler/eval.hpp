#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "finsler/types.hpp"

namespace finsler {

struct KMeansResult {
  Labels labels;
  RowMatrix centroids;
  double inertia;
};

/// Lloyd iterations from k-means++ seeds; best inertia over n_init restarts.
/// Empty clusters are re-seeded from the point farthest from its centroid.
KMeansResult kmeans(const RowMatrix& coords, int k, std::uint64_t seed, int n_init = 10,
                    int max_iter = 300);

// Label agreement scores. Throw InvalidArgument on length mismatch.
double score_ami(const Labels& truth, const Labels& pred);   // max-entropy normaliser
double score_ari(const Labels& truth, const Labels& pred);
double score_nmi(const Labels& truth, const Labels& pred);   // arithmetic-mean normaliser
double score_homogeneity(const Labels& truth, const Labels& pred);
double score_completeness(const Labels& truth, const Labels& pred);
double score_vmeasure(const Labels& truth, const Labels& pred);
double score_fmi(const Labels& truth, const Labels& pred);

// Label-free cluster shape scores on Euclidean coordinates. Throw
// InvalidArgument with fewer than two clusters.
double score_silhouette(const RowMatrix& coords, const Labels& pred);
double score_dbi(const RowMatrix& coords, const Labels& pred);
double score_chi(const RowMatrix& coords, const Labels& pred);

struct KnnCvOptions {
  int k_nn = 5;
  int folds = 5;
  int repeats = 2;
  std::uint64_t seed = 0;
};

/// Mean accuracy of a k-NN majority-vote classifier over repeated stratified
/// folds. Throws InvalidArgument if a class has fewer members than folds.
double knn_cv_accuracy(const RowMatrix& coords, const Labels& labels, const KnnCvOptions& options = {});

/// Named scores of one embedding run plus its provenance.
struct ScoreReport {
  std::map<std::string, double> scores;
  std::map<std::string, std::string> metadata;

  /// Checks documented score ranges; returns the names that violate them.
  std::vector<std::string> out_of_range() const;
};

/// All label scores of `pred` against `truth`.
std::map<std::string, double> label_scores(const Labels& truth, const Labels& pred);

struct EvaluationOptions {
  std::vector<std::uint64_t> kmeans_seeds = {0};
  bool shape_scores = true;
  bool knn_accuracy = true;
};

/// kMeans with as many clusters as classes for every seed; reports mean
/// label scores, shape scores of the first seed's clustering and k-NN
/// accuracy.
ScoreReport evaluate_embedding(const RowMatrix& coords, const Labels& truth,
                               const EvaluationOptions& options = {});

}  // namespace finsler
