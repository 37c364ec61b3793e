#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace otl {

// N x k matrix of cluster scores, one row per sample. Row-major so a row is
// contiguous, matching the on-disk layout.
using ScoreMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using FeatureMatrix = ScoreMatrix;

using LabelVector = Eigen::Matrix<std::int32_t, Eigen::Dynamic, 1>;
using CountVector = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

// Per-cluster real-valued size targets; must sum to the sample count.
using TargetDistribution = Eigen::VectorXd;

// Per-cluster (count - target); entries sum to ~0.
using FrequencyIndicator = Eigen::VectorXd;

struct ClusterHistogram {
  CountVector counts;
  std::int64_t total = 0;

  Eigen::Index clusters() const { return counts.size(); }
};

template <typename Derived>
void validate_scores(const Eigen::MatrixBase<Derived>& scores) {
  if (scores.rows() < 1)
    throw std::invalid_argument("score matrix needs at least one row");
  if (scores.cols() < 2)
    throw std::invalid_argument("score matrix needs at least two clusters");
  if (!scores.derived().allFinite())
    throw std::invalid_argument("score matrix contains non-finite entries");
}

// Per-row argmax of (scores - translation), ties going to the lowest cluster
// index. The translation is shared by all rows, so it never changes any
// within-row difference; it only moves the decision boundaries.
template <typename Derived, typename TransDerived>
LabelVector argmax_assign(const Eigen::MatrixBase<Derived>& scores,
                          const Eigen::MatrixBase<TransDerived>& translation) {
  if (translation.size() != scores.cols())
    throw std::invalid_argument(
        "translation length " + std::to_string(translation.size()) +
        " does not match cluster count " + std::to_string(scores.cols()));
  const auto& m = scores.derived();
  const Eigen::Index k = m.cols();
  Eigen::RowVectorXd shift(k);
  for (Eigen::Index c = 0; c < k; ++c)
    shift[c] = static_cast<double>(translation.coeff(c));
  LabelVector labels(m.rows());
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    // Vector max first, then scan for its first position; the row is hot in
    // cache for the second pass and the max reduction vectorizes.
    const double best =
        (m.row(r).template cast<double>() - shift).maxCoeff();
    Eigen::Index best_idx = 0;
    for (Eigen::Index c = 0; c < k; ++c) {
      if (static_cast<double>(m.coeff(r, c)) - shift[c] == best) {
        best_idx = c;
        break;
      }
    }
    labels[r] = static_cast<std::int32_t>(best_idx);
  }
  return labels;
}

template <typename Derived>
LabelVector argmax_assign(const Eigen::MatrixBase<Derived>& scores) {
  return argmax_assign(scores, Eigen::VectorXd::Zero(scores.cols()));
}

inline ClusterHistogram histogram(const LabelVector& labels,
                                  Eigen::Index n_clusters) {
  if (n_clusters < 1)
    throw std::invalid_argument("histogram needs at least one cluster");
  ClusterHistogram h;
  h.counts = CountVector::Zero(n_clusters);
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    const std::int32_t v = labels[i];
    if (v < 0 || v >= n_clusters)
      throw std::invalid_argument("label " + std::to_string(v) + " at row " +
                                  std::to_string(i) + " is outside [0, " +
                                  std::to_string(n_clusters) + ")");
    ++h.counts[v];
  }
  h.total = labels.size();
  return h;
}

inline TargetDistribution uniform_target(std::int64_t n_samples,
                                         Eigen::Index n_clusters) {
  return TargetDistribution::Constant(
      n_clusters, static_cast<double>(n_samples) /
                      static_cast<double>(n_clusters));
}

inline FrequencyIndicator frequency_indicator(const ClusterHistogram& hist,
                                              const TargetDistribution& target) {
  if (target.size() != hist.counts.size())
    throw std::invalid_argument(
        "target length " + std::to_string(target.size()) +
        " does not match cluster count " + std::to_string(hist.counts.size()));
  const double target_total = target.sum();
  if (std::abs(static_cast<double>(hist.total) - target_total) > 1e-6)
    throw std::invalid_argument(
        "target sums to " + std::to_string(target_total) + " but histogram has " +
        std::to_string(hist.total) + " samples");
  return hist.counts.cast<double>() - target;
}

// Population standard deviation of the indicator about zero: the indicator
// already has (near-)zero mean because counts and targets share a total.
template <typename Derived>
double indicator_std(const Eigen::MatrixBase<Derived>& indicator) {
  if (indicator.size() < 1)
    throw std::invalid_argument("indicator is empty");
  return std::sqrt(indicator.derived().squaredNorm() /
                   static_cast<double>(indicator.size()));
}

// Worst case under a uniform target: all samples in one cluster. The deltas
// are then (n - n/k) once and (-n/k) in the k-1 remaining slots, which
// collapses to n*sqrt(k-1)/k.
inline double max_std(std::int64_t n_samples, std::int64_t n_clusters) {
  if (n_clusters < 2)
    throw std::invalid_argument("max_std needs at least two clusters");
  if (n_samples < 1)
    throw std::invalid_argument("max_std needs at least one sample");
  return static_cast<double>(n_samples) *
         std::sqrt(static_cast<double>(n_clusters - 1)) /
         static_cast<double>(n_clusters);
}

// Best case under a uniform target: the most even integer histogram has
// n % k clusters holding one extra sample.
inline double min_achievable_std(std::int64_t n_samples,
                                 std::int64_t n_clusters) {
  if (n_clusters < 2)
    throw std::invalid_argument("min_achievable_std needs at least two clusters");
  if (n_samples < 1)
    throw std::invalid_argument("min_achievable_std needs at least one sample");
  const std::int64_t lo = n_samples / n_clusters;
  const std::int64_t r = n_samples % n_clusters;
  const double mean =
      static_cast<double>(n_samples) / static_cast<double>(n_clusters);
  const double d_hi = static_cast<double>(lo + 1) - mean;
  const double d_lo = static_cast<double>(lo) - mean;
  return std::sqrt((static_cast<double>(r) * d_hi * d_hi +
                    static_cast<double>(n_clusters - r) * d_lo * d_lo) /
                   static_cast<double>(n_clusters));
}

// General targets: integer counts cannot usually hit fractional targets, so
// the reachable floor is the best integer apportionment. Flooring every
// target and granting the leftover units to the largest fractional parts
// minimizes the squared deviation (moving a unit anywhere else can only
// swap a smaller remainder for a larger one).
inline double min_achievable_std(const TargetDistribution& target) {
  const Eigen::Index k = target.size();
  if (k < 2)
    throw std::invalid_argument("min_achievable_std needs at least two clusters");
  for (Eigen::Index i = 0; i < k; ++i)
    if (!(target[i] >= 0.0))
      throw std::invalid_argument("target entries must be non-negative");
  const std::int64_t total = std::llround(target.sum());
  CountVector counts(k);
  std::int64_t floored = 0;
  for (Eigen::Index i = 0; i < k; ++i) {
    counts[i] = static_cast<std::int64_t>(std::floor(target[i]));
    floored += counts[i];
  }
  std::int64_t leftover = total - floored;
  std::vector<Eigen::Index> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) {
                     const double fa = target[a] - std::floor(target[a]);
                     const double fb = target[b] - std::floor(target[b]);
                     return fa > fb;
                   });
  for (Eigen::Index i = 0; i < k && leftover > 0; ++i, --leftover)
    ++counts[order[static_cast<std::size_t>(i)]];
  const FrequencyIndicator deltas = counts.cast<double>() - target;
  return indicator_std(deltas);
}

template <typename Derived>
double score_range(const Eigen::MatrixBase<Derived>& scores) {
  validate_scores(scores);
  return scores.derived().maxCoeff() - scores.derived().minCoeff();
}

}  // namespace otl
