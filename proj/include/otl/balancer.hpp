#pragma once

#include "otl/matrix_core.hpp"

#include <stdexcept>
#include <vector>

namespace otl {

struct BalanceConfig {
  double decay_rate = 1.5;    // step shrink factor on a rejected iteration, > 1
  double step_floor = 1e-15;  // stop once the step decays below this, > 0
  int max_outer_iters = 10000;
  TargetDistribution target;  // empty means uniform n/k
  // Re-derive the step from the best std each iteration instead of
  // freezing the initial estimate; rejections still decay it.
  bool rescale_step = false;
  // Translate through rejected probes instead of rolling them back. With
  // this on, a failed move stays applied and only the step shrinks; the
  // wandering state usually cannot re-reach the best deviation seen, so
  // convergence is not guaranteed. Off, a rejection restores the best
  // state before the smaller retry.
  bool keep_rejected_moves = false;
};

struct TraceEntry {
  int iteration = 0;
  double step = 0.0;
  double std_value = 0.0;
  bool accepted = false;
};

struct BalanceResult {
  LabelVector labels;
  Eigen::VectorXd net_translation;
  double final_std = 0.0;
  std::vector<TraceEntry> trace;
  int iterations = 0;
  int improvements = 0;
};

// Raised when the outer-iteration cap fires before the step floor or the
// std floor is reached; carries the state at the cap.
struct IterationCapError : std::runtime_error {
  BalanceResult partial;
  explicit IterationCapError(std::string msg, BalanceResult state)
      : std::runtime_error(std::move(msg)), partial(std::move(state)) {}
};

// First translation step: scale the score range by how uneven the current
// assignment is relative to the worst case. A degenerate histogram gets the
// full range; a balanced one gets zero.
double initial_step_size(const ScoreMatrix& scores,
                         const FrequencyIndicator& indicator);

// Balance the argmax assignment of `scores` by translating all rows by a
// shared per-cluster offset. Rows are never modified; the returned
// net_translation is the only state, so within-row score differences are
// those of the input, untouched.
//
// Each iteration probes one translation along the frequency indicator and
// keeps it only if the deviation drops. Oversized probes shrink the step by
// decay_rate; probes too small to move any row raise it instead, and once
// both bounds are known the search bisects between them. A bracket that
// pinches shut without an improvement triggers one upward sweep past the
// pinch point, since a larger jump moving several rows at once can succeed
// where the smallest flip only ties; the sweep engages only while the
// deviation exceeds the apportionment floor by more than one sample. The
// loop stops at the step floor, when the sweep runs out of boundaries to
// cross, or once no assignment can beat the rounding floor of the target
// itself.
BalanceResult balance(const ScoreMatrix& scores, const BalanceConfig& config);

// Cluster-size targets proportional to (i+1)^exponent, scaled to n_samples.
// exponent 0 reproduces the uniform target.
TargetDistribution powerlaw_target(std::int64_t n_samples,
                                   Eigen::Index n_clusters, double exponent);

// One-hot rows from a label vector.
ScoreMatrix onehot_labels(const LabelVector& labels, Eigen::Index n_clusters);

// Difference between two rows of the translated matrix. The shared
// translation cancels term by term, so this reads only the original rows
// and is exact whatever the balancer did.
Eigen::VectorXd translated_row_difference(const ScoreMatrix& scores,
                                          Eigen::Index row_a,
                                          Eigen::Index row_b);

}  // namespace otl
