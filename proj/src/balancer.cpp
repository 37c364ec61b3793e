#include "otl/balancer.hpp"

#include <cmath>
#include <string>

namespace otl {

namespace {

void validate_config(const BalanceConfig& config, Eigen::Index n_rows,
                     Eigen::Index n_cols) {
  if (!(config.decay_rate > 1.0))
    throw std::invalid_argument("decay rate must exceed 1");
  if (!(config.step_floor > 0.0))
    throw std::invalid_argument("step floor must be positive");
  if (config.max_outer_iters < 1)
    throw std::invalid_argument("iteration cap must be at least 1");
  if (config.target.size() != 0) {
    if (config.target.size() != n_cols)
      throw std::invalid_argument(
          "target length " + std::to_string(config.target.size()) +
          " does not match cluster count " + std::to_string(n_cols));
    for (Eigen::Index i = 0; i < config.target.size(); ++i)
      if (!(config.target[i] >= 0.0) || !std::isfinite(config.target[i]))
        throw std::invalid_argument("target entries must be finite and non-negative");
    const double sum = config.target.sum();
    if (std::abs(sum - static_cast<double>(n_rows)) > 1e-6)
      throw std::invalid_argument("target sums to " + std::to_string(sum) +
                                  " but the matrix has " +
                                  std::to_string(n_rows) + " rows");
  }
}

}  // namespace

double initial_step_size(const ScoreMatrix& scores,
                         const FrequencyIndicator& indicator) {
  validate_scores(scores);
  if (indicator.size() != scores.cols())
    throw std::invalid_argument("indicator length does not match cluster count");
  const double worst = max_std(scores.rows(), scores.cols());
  return indicator_std(indicator) / worst * score_range(scores);
}

BalanceResult balance(const ScoreMatrix& scores, const BalanceConfig& config) {
  validate_scores(scores);
  validate_config(config, scores.rows(), scores.cols());
  const Eigen::Index n = scores.rows();
  const Eigen::Index k = scores.cols();
  const TargetDistribution target =
      config.target.size() ? config.target : uniform_target(n, k);

  // Integer counts cannot land below the best apportionment of the target,
  // so treat that as the convergence floor (plus rounding slack).
  const double std_floor = min_achievable_std(target) + 1e-9;
  const double worst = max_std(n, k);
  const double range = score_range(scores);

  BalanceResult res;
  res.net_translation = Eigen::VectorXd::Zero(k);
  res.labels = argmax_assign(scores, res.net_translation);
  FrequencyIndicator deltas =
      frequency_indicator(histogram(res.labels, k), target);
  double best_std = indicator_std(deltas);

  double decay = 1.0;  // accumulated shrink from unhelpful oversized probes
  double base = best_std / worst * range;
  double step = base * decay;
  res.trace.push_back({0, step, best_std, true});

  // Bracket of the line search along the current indicator direction:
  // `lo` is the largest probe that crossed no decision boundary, `hi` the
  // smallest that moved rows without improving. Both reset whenever a probe
  // is accepted, since the direction changes with the state. When the
  // bracket pinches shut on the first boundary without an improvement, a
  // sweep phase keeps growing the step past it, since a jump that carries
  // several rows at once can succeed where the smallest flip only ties.
  // The sweep hunts whole-sample imbalances, so it engages only while the
  // deviation sits more than one sample above the apportionment floor;
  // closer than that only sub-sample rounding remains and the pinch is
  // final.
  const double inf = std::numeric_limits<double>::infinity();
  double lo = 0.0;
  double hi = inf;
  bool sweep = false;
  // The sweep climbs coarser than the bracket search; it only has to catch
  // gross wins above the pinch, not resolve them finely.
  const double sweep_rate = config.decay_rate * config.decay_rate;

  // Past this step even the flattest cluster shift dwarfs the score range,
  // so no further boundary crossing can exist along the direction.
  const auto past_last_flip = [&](double probe) {
    double min_push = inf;
    for (Eigen::Index i = 0; i < deltas.size(); ++i) {
      const double a = std::abs(deltas[i]);
      if (a > 1e-9) min_push = std::min(min_push, a);
    }
    return probe * min_push > 4.0 * range;
  };

  while (step > config.step_floor && best_std > std_floor) {
    if (!sweep && lo > 0.0 && hi <= lo * (1.0 + 1e-12)) {
      if (best_std <= std_floor + 1.0) break;
      sweep = true;
      step = hi * sweep_rate;
      if (past_last_flip(step)) break;
      continue;
    }
    if (res.iterations >= config.max_outer_iters) {
      res.final_std = indicator_std(deltas);
      throw IterationCapError(
          "no convergence after " + std::to_string(res.iterations) +
              " iterations (std " + std::to_string(best_std) + ")",
          res);
    }
    ++res.iterations;

    // Probe: push each cluster's scores down in proportion to its surplus.
    Eigen::VectorXd trial = res.net_translation + step * deltas;
    LabelVector trial_labels = argmax_assign(scores, trial);
    FrequencyIndicator trial_deltas =
        frequency_indicator(histogram(trial_labels, k), target);
    const double trial_std = indicator_std(trial_deltas);

    const bool accepted = trial_std < best_std;
    res.trace.push_back({res.iterations, step, trial_std, accepted});

    if (accepted) {
      best_std = trial_std;
      ++res.improvements;
      if (config.rescale_step) base = best_std / worst * range;
      res.net_translation = std::move(trial);
      res.labels = std::move(trial_labels);
      deltas = std::move(trial_deltas);
      lo = 0.0;
      hi = inf;
      sweep = false;
      step = base * decay;
      continue;
    }

    if (config.keep_rejected_moves) {
      // Literal translate-through variant: the move stays applied, the
      // step only ever shrinks. Kept for study; usually never re-reaches
      // the benchmark deviation once a probe overshoots.
      res.net_translation = std::move(trial);
      res.labels = std::move(trial_labels);
      deltas = std::move(trial_deltas);
      decay /= config.decay_rate;
      step = base * decay;
      continue;
    }

    if (sweep) {
      // Bracket bookkeeping is over; keep climbing until nothing flips.
      step *= sweep_rate;
      if (past_last_flip(step)) break;
      continue;
    }

    if (trial_labels == res.labels) {
      // No row crossed a boundary, so every smaller probe is equally
      // useless: raise the lower bracket and go bigger.
      lo = step;
      if (hi < inf) {
        step = std::sqrt(lo * hi);
      } else {
        step *= config.decay_rate;
        if (past_last_flip(step)) break;
      }
    } else {
      // Rows moved but the deviation did not drop: oversized probe.
      hi = std::min(hi, step);
      decay /= config.decay_rate;
      step = lo > 0.0 ? std::sqrt(lo * hi) : base * decay;
    }
  }

  res.final_std = indicator_std(deltas);
  return res;
}

TargetDistribution powerlaw_target(std::int64_t n_samples,
                                   Eigen::Index n_clusters, double exponent) {
  if (n_samples < 1)
    throw std::invalid_argument("powerlaw_target needs at least one sample");
  if (n_clusters < 1)
    throw std::invalid_argument("powerlaw_target needs at least one cluster");
  if (!(exponent >= 0.0))
    throw std::invalid_argument("powerlaw exponent must be non-negative");
  TargetDistribution weights(n_clusters);
  for (Eigen::Index i = 0; i < n_clusters; ++i)
    weights[i] = std::pow(static_cast<double>(i + 1), exponent);
  return weights * (static_cast<double>(n_samples) / weights.sum());
}

ScoreMatrix onehot_labels(const LabelVector& labels, Eigen::Index n_clusters) {
  if (n_clusters < 1)
    throw std::invalid_argument("onehot_labels needs at least one cluster");
  ScoreMatrix out = ScoreMatrix::Zero(labels.size(), n_clusters);
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    const std::int32_t v = labels[i];
    if (v < 0 || v >= n_clusters)
      throw std::invalid_argument("label " + std::to_string(v) + " at row " +
                                  std::to_string(i) + " is outside [0, " +
                                  std::to_string(n_clusters) + ")");
    out(i, v) = 1.0;
  }
  return out;
}

Eigen::VectorXd translated_row_difference(const ScoreMatrix& scores,
                                          Eigen::Index row_a,
                                          Eigen::Index row_b) {
  if (row_a < 0 || row_a >= scores.rows() || row_b < 0 ||
      row_b >= scores.rows())
    throw std::invalid_argument("row index out of range");
  return (scores.row(row_a) - scores.row(row_b)).transpose();
}

}  // namespace otl
