#include "otl/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace otl {

namespace {

// log softmax denominator with the max pulled out. The max position
// contributes exactly one, so the rest goes through log1p; rounding 1+rest
// into a double first would cost tiny tails seven digits.
double log_sum_exp(const ScoreMatrix& scores, Eigen::Index row, double row_max) {
  Eigen::Index max_idx = 0;
  while (scores(row, max_idx) != row_max) ++max_idx;
  double rest = 0.0;
  for (Eigen::Index c = 0; c < scores.cols(); ++c)
    if (c != max_idx) rest += std::exp(scores(row, c) - row_max);
  return std::log1p(rest);
}

}  // namespace

double softmax_cross_entropy(const ScoreMatrix& scores,
                             const ScoreMatrix& onehot) {
  validate_scores(scores);
  if (onehot.rows() != scores.rows() || onehot.cols() != scores.cols())
    throw std::invalid_argument("label matrix shape does not match scores");
  double total = 0.0;
  for (Eigen::Index r = 0; r < scores.rows(); ++r) {
    const double m = scores.row(r).maxCoeff();
    const double lse = log_sum_exp(scores, r, m);
    double row_loss = 0.0;
    for (Eigen::Index c = 0; c < scores.cols(); ++c)
      if (onehot(r, c) != 0.0)
        row_loss -= onehot(r, c) * (scores(r, c) - m - lse);
    total += row_loss;
  }
  return total / static_cast<double>(scores.rows());
}

double softmax_cross_entropy(const ScoreMatrix& scores,
                             const LabelVector& labels) {
  validate_scores(scores);
  if (labels.size() != scores.rows())
    throw std::invalid_argument("label count does not match row count");
  double total = 0.0;
  for (Eigen::Index r = 0; r < scores.rows(); ++r) {
    const std::int32_t y = labels[r];
    if (y < 0 || y >= scores.cols())
      throw std::invalid_argument("label " + std::to_string(y) + " at row " +
                                  std::to_string(r) + " is outside [0, " +
                                  std::to_string(scores.cols()) + ")");
    const double m = scores.row(r).maxCoeff();
    total -= scores(r, y) - m - log_sum_exp(scores, r, m);
  }
  return total / static_cast<double>(scores.rows());
}

double lct_loss(const ViewSet& views) {
  const std::size_t g = views.views();
  if (g < 1) throw std::invalid_argument("view set is empty");
  if (views.labels.size() != g)
    throw std::invalid_argument("view set has " + std::to_string(g) +
                                " outputs but " +
                                std::to_string(views.labels.size()) + " labels");
  const Eigen::Index n = views.outputs[0].rows();
  const Eigen::Index k = views.outputs[0].cols();
  for (std::size_t v = 0; v < g; ++v) {
    if (views.outputs[v].rows() != n || views.outputs[v].cols() != k)
      throw std::invalid_argument("view " + std::to_string(v) +
                                  " has mismatched output shape");
    if (views.labels[v].size() != n)
      throw std::invalid_argument("view " + std::to_string(v) +
                                  " has mismatched label count");
  }
  double total = 0.0;
  for (std::size_t a = 0; a < g; ++a)
    for (std::size_t b = 0; b < g; ++b)
      total += softmax_cross_entropy(views.outputs[b], views.labels[a]);
  return total;
}

LabelVector weighted_knn_predict(const FeatureMatrix& train_features,
                                 const LabelVector& train_labels,
                                 const FeatureMatrix& query_features,
                                 const KnnConfig& config,
                                 Eigen::Index n_classes) {
  if (train_features.rows() < 1)
    throw std::invalid_argument("no training features");
  if (query_features.cols() != train_features.cols())
    throw std::invalid_argument("query feature width does not match training");
  if (train_labels.size() != train_features.rows())
    throw std::invalid_argument("training label count does not match rows");
  if (n_classes < 1)
    throw std::invalid_argument("need at least one class");
  if (config.neighbors < 1)
    throw std::invalid_argument("neighbor count must be at least 1");
  if (!(config.sigma > 0.0))
    throw std::invalid_argument("sigma must be positive");
  for (Eigen::Index i = 0; i < train_labels.size(); ++i)
    if (train_labels[i] < 0 || train_labels[i] >= n_classes)
      throw std::invalid_argument("training label out of range at row " +
                                  std::to_string(i));

  const auto normalize = [](const FeatureMatrix& m, const char* what) {
    FeatureMatrix out = m;
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
      const double norm = out.row(r).norm();
      if (!(norm > 0.0) || !std::isfinite(norm))
        throw std::invalid_argument(std::string(what) + " feature row " +
                                    std::to_string(r) +
                                    " has zero or non-finite norm");
      out.row(r) /= norm;
    }
    return out;
  };
  const FeatureMatrix train = normalize(train_features, "training");
  const FeatureMatrix query = normalize(query_features, "query");

  const Eigen::Index n_train = train.rows();
  const Eigen::Index top =
      std::min<Eigen::Index>(config.neighbors, n_train);

  LabelVector predictions(query.rows());
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n_train));
  std::vector<double> votes(static_cast<std::size_t>(n_classes));

  const Eigen::Index block = 256;
  for (Eigen::Index q0 = 0; q0 < query.rows(); q0 += block) {
    const Eigen::Index rows = std::min<Eigen::Index>(block, query.rows() - q0);
    const Eigen::MatrixXd sims =
        query.middleRows(q0, rows) * train.transpose();
    for (Eigen::Index r = 0; r < rows; ++r) {
      std::iota(order.begin(), order.end(), Eigen::Index{0});
      std::partial_sort(order.begin(), order.begin() + top, order.end(),
                        [&](Eigen::Index a, Eigen::Index b) {
                          if (sims(r, a) != sims(r, b))
                            return sims(r, a) > sims(r, b);
                          return a < b;
                        });
      std::fill(votes.begin(), votes.end(), 0.0);
      for (Eigen::Index t = 0; t < top; ++t) {
        const Eigen::Index nb = order[static_cast<std::size_t>(t)];
        votes[static_cast<std::size_t>(train_labels[nb])] +=
            std::exp(sims(r, nb) / config.sigma);
      }
      Eigen::Index best = 0;
      for (Eigen::Index c = 1; c < n_classes; ++c)
        if (votes[static_cast<std::size_t>(c)] >
            votes[static_cast<std::size_t>(best)])
          best = c;
      predictions[q0 + r] = static_cast<std::int32_t>(best);
    }
  }
  return predictions;
}

}  // namespace otl
