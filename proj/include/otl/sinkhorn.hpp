#pragma once

#include "otl/balancer.hpp"
#include "otl/matrix_core.hpp"

namespace otl {

struct SinkhornConfig {
  int max_iters = 1000;
  double tolerance = 1e-8;   // max marginal deviation at which to stop
  double temperature = 1.0;  // softmax temperature for the positive rewrite
};

struct SinkhornResult {
  ScoreMatrix scaled;        // row_scale[s] * (col_scale[i] * positive(s,i))
  LabelVector labels;
  int iterations = 0;
  Eigen::VectorXd row_scale;
  Eigen::VectorXd col_scale;
};

// The positive matrix the scaling iteration actually runs on: row-wise
// softmax of scores/temperature. Exposed so the factorization of a result
// can be checked against it.
ScoreMatrix sinkhorn_positive(const ScoreMatrix& scores, double temperature);

// Alternate row/column rescaling toward row sums 1/N and column sums 1/k.
// Unlike translation this multiplies entries by per-column factors, so it
// does not preserve row differences.
SinkhornResult sinkhorn_balance(const ScoreMatrix& scores,
                                const SinkhornConfig& config);

struct BalancerComparison {
  double translation_std = 0.0;
  double sinkhorn_std = 0.0;
  int translation_iters = 0;
  int sinkhorn_iters = 0;
  double translation_ms = 0.0;
  double sinkhorn_ms = 0.0;
};

// Run both balancers on the same matrix against a uniform target and
// measure the assignment std each one reaches.
BalancerComparison compare_balancers(const ScoreMatrix& scores,
                                     const BalanceConfig& balance_config,
                                     const SinkhornConfig& sinkhorn_config);

}  // namespace otl
