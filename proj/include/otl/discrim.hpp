#pragma once

#include "otl/matrix_core.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <compare>

namespace otl {

// Pair counts grow like N^2 and the even-assignment count like k^N, so all
// of this module is exact big-integer / rational arithmetic.
using BigInt = boost::multiprecision::cpp_int;
using BigRat = boost::multiprecision::cpp_rational;

struct DiscrimReport {
  BigInt indistinguishable;  // same-cluster sample pairs
  BigInt distinguishable;    // cross-cluster sample pairs
  BigInt total_pairs;        // N choose 2
  bool std_form_check = false;  // deviation form reproduced the pair count
};

// Same-cluster pairs, sum over clusters of C(n_i, 2). Cross-checked against
// the equivalent (sum n_i^2 - N)/2 before returning.
BigInt indistinguishable_pairs(const ClusterHistogram& hist);

// Cross-cluster pairs, sum over cluster pairs of n_i * n_j.
BigInt distinguishable_pairs(const ClusterHistogram& hist);

// Same-cluster pairs rewritten around the per-cluster deviation from the
// uniform share N/k: (sum (n_i - N/k)^2 + N^2/k - N) / 2, kept rational so
// fractional shares lose nothing.
BigRat indistinguishable_pairs_spread_form(const ClusterHistogram& hist);

// True when no histogram on the same N and k has fewer same-cluster pairs,
// i.e. counts differ pairwise by at most one.
bool is_most_discriminative(const ClusterHistogram& hist);

// Number of ways to split N samples into k unlabeled groups of exactly N/k:
// N! / ((N/k)!^k * k!). Requires k | N.
BigInt count_even_assignments(std::int64_t n_samples, std::int64_t n_clusters);

// Orders two histograms over the same N by cross-cluster pair count;
// greater means `a` separates more pairs.
std::strong_ordering compare_discriminativeness(const ClusterHistogram& a,
                                                const ClusterHistogram& b);

DiscrimReport discrim_report(const ClusterHistogram& hist);

}  // namespace otl
