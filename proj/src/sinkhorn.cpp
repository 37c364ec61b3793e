#include "otl/sinkhorn.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

namespace otl {

ScoreMatrix sinkhorn_positive(const ScoreMatrix& scores, double temperature) {
  validate_scores(scores);
  if (!(temperature > 0.0))
    throw std::invalid_argument("temperature must be positive");
  ScoreMatrix p(scores.rows(), scores.cols());
  for (Eigen::Index r = 0; r < scores.rows(); ++r) {
    const double m = scores.row(r).maxCoeff();
    p.row(r) = ((scores.row(r).array() - m) / temperature).exp();
    p.row(r) /= p.row(r).sum();
  }
  return p;
}

SinkhornResult sinkhorn_balance(const ScoreMatrix& scores,
                                const SinkhornConfig& config) {
  if (config.max_iters < 1)
    throw std::invalid_argument("iteration cap must be at least 1");
  if (!(config.tolerance > 0.0))
    throw std::invalid_argument("tolerance must be positive");

  const Eigen::Index n = scores.rows();
  const Eigen::Index k = scores.cols();
  const double row_target = 1.0 / static_cast<double>(n);
  const double col_target = 1.0 / static_cast<double>(k);

  ScoreMatrix p = sinkhorn_positive(scores, config.temperature);
  for (Eigen::Index c = 0; c < k; ++c)
    if (!(p.col(c).sum() > 0.0))
      throw std::invalid_argument(
          "column " + std::to_string(c) +
          " vanished in the positive rewrite; raise the temperature");

  SinkhornResult res;
  res.row_scale = Eigen::VectorXd::Ones(n);
  res.col_scale = Eigen::VectorXd::Ones(k);
  Eigen::VectorXd row_sums = p.rowwise().sum();  // p * col_scale

  for (int t = 1; t <= config.max_iters; ++t) {
    res.iterations = t;
    res.row_scale = row_target / row_sums.array();
    const Eigen::VectorXd col_sums = p.transpose() * res.row_scale;
    res.col_scale = col_target / col_sums.array();
    if (!res.row_scale.allFinite() || !res.col_scale.allFinite())
      throw std::invalid_argument(
          "scaling factors overflowed; raise the temperature");
    // Columns are exact right after the column update, so the remaining
    // marginal error is all in the rows.
    row_sums = p * res.col_scale;
    const double row_dev =
        (res.row_scale.array() * row_sums.array() - row_target)
            .abs()
            .maxCoeff();
    if (row_dev < config.tolerance) break;
  }

  res.scaled = p;
  res.scaled.array().rowwise() *= res.col_scale.transpose().array();
  res.scaled.array().colwise() *= res.row_scale.array();
  res.labels = argmax_assign(res.scaled);
  return res;
}

BalancerComparison compare_balancers(const ScoreMatrix& scores,
                                     const BalanceConfig& balance_config,
                                     const SinkhornConfig& sinkhorn_config) {
  using clock = std::chrono::steady_clock;
  BalancerComparison cmp;
  const TargetDistribution target =
      uniform_target(scores.rows(), scores.cols());

  const auto t0 = clock::now();
  const BalanceResult bal = balance(scores, balance_config);
  const auto t1 = clock::now();
  const SinkhornResult sk = sinkhorn_balance(scores, sinkhorn_config);
  const auto t2 = clock::now();

  cmp.translation_std = bal.final_std;
  cmp.translation_iters = bal.iterations;
  cmp.sinkhorn_std = indicator_std(
      frequency_indicator(histogram(sk.labels, scores.cols()), target));
  cmp.sinkhorn_iters = sk.iterations;
  cmp.translation_ms =
      std::chrono::duration<double, std::milli>(t1 - t0).count();
  cmp.sinkhorn_ms = std::chrono::duration<double, std::milli>(t2 - t1).count();
  return cmp;
}

}  // namespace otl
