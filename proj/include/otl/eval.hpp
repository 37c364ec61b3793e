#pragma once

#include "otl/matrix_core.hpp"

#include <vector>

namespace otl {

// One score matrix and one pseudo-label vector per augmentation view.
struct ViewSet {
  std::vector<ScoreMatrix> outputs;
  std::vector<LabelVector> labels;

  std::size_t views() const { return outputs.size(); }
};

struct KnnConfig {
  int neighbors = 50;
  double sigma = 0.1;  // similarity temperature for the vote weights
};

// Mean over rows of -log softmax probability of the marked class, with the
// row max subtracted before exponentiation.
double softmax_cross_entropy(const ScoreMatrix& scores,
                             const ScoreMatrix& onehot);
double softmax_cross_entropy(const ScoreMatrix& scores,
                             const LabelVector& labels);

// Cross-entropy summed over every ordered (label view, output view) pair,
// the a == b diagonal included.
double lct_loss(const ViewSet& views);

// Cosine-similarity kNN with exp(similarity/sigma) vote weights. Ties in
// similarity and in the class vote both resolve to the lowest index.
LabelVector weighted_knn_predict(const FeatureMatrix& train_features,
                                 const LabelVector& train_labels,
                                 const FeatureMatrix& query_features,
                                 const KnnConfig& config,
                                 Eigen::Index n_classes);

}  // namespace otl
