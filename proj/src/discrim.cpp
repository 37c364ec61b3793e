#include "otl/discrim.hpp"

#include <stdexcept>
#include <string>

namespace otl {

namespace {

void validate_hist(const ClusterHistogram& hist) {
  if (hist.counts.size() < 1)
    throw std::invalid_argument("histogram has no clusters");
  std::int64_t sum = 0;
  for (Eigen::Index i = 0; i < hist.counts.size(); ++i) {
    if (hist.counts[i] < 0)
      throw std::invalid_argument("histogram count is negative");
    sum += hist.counts[i];
  }
  if (sum != hist.total)
    throw std::invalid_argument("histogram counts sum to " +
                                std::to_string(sum) + ", not the stated total " +
                                std::to_string(hist.total));
}

BigInt pair_count(const BigInt& n) { return n * (n - 1) / 2; }

}  // namespace

BigInt indistinguishable_pairs(const ClusterHistogram& hist) {
  validate_hist(hist);
  BigInt per_cluster = 0;
  BigInt sum_sq = 0;
  for (Eigen::Index i = 0; i < hist.counts.size(); ++i) {
    const BigInt c = hist.counts[i];
    per_cluster += pair_count(c);
    sum_sq += c * c;
  }
  const BigInt via_squares = (sum_sq - hist.total) / 2;
  if (per_cluster != via_squares)
    throw std::logic_error("pair-count forms disagree");
  return per_cluster;
}

BigInt distinguishable_pairs(const ClusterHistogram& hist) {
  validate_hist(hist);
  // sum over i<j of n_i * n_j, folded as n_i times the suffix sum
  BigInt sum = 0;
  BigInt suffix = 0;
  for (Eigen::Index i = hist.counts.size(); i-- > 0;) {
    sum += BigInt(hist.counts[i]) * suffix;
    suffix += hist.counts[i];
  }
  return sum;
}

BigRat indistinguishable_pairs_spread_form(const ClusterHistogram& hist) {
  validate_hist(hist);
  const BigInt n = hist.total;
  const BigInt k = hist.counts.size();
  // Work over a common denominator: sum (n_i - n/k)^2 = sum (k n_i - n)^2 / k^2.
  BigInt scaled_spread = 0;
  for (Eigen::Index i = 0; i < hist.counts.size(); ++i) {
    const BigInt d = k * hist.counts[i] - n;
    scaled_spread += d * d;
  }
  const BigRat spread(scaled_spread, k * k);
  return (spread + BigRat(n * n, k) - n) / 2;
}

bool is_most_discriminative(const ClusterHistogram& hist) {
  validate_hist(hist);
  std::int64_t lo = hist.counts[0];
  std::int64_t hi = hist.counts[0];
  for (Eigen::Index i = 1; i < hist.counts.size(); ++i) {
    lo = std::min(lo, hist.counts[i]);
    hi = std::max(hi, hist.counts[i]);
  }
  return hi - lo <= 1;
}

BigInt count_even_assignments(std::int64_t n_samples, std::int64_t n_clusters) {
  if (n_clusters < 1)
    throw std::invalid_argument("count_even_assignments needs at least one cluster");
  if (n_samples < 1 || n_samples % n_clusters != 0)
    throw std::invalid_argument("count_even_assignments needs the cluster count "
                                "to divide the sample count");
  const std::int64_t group = n_samples / n_clusters;
  // Fill groups one at a time: product of C(remaining, group), then divide
  // out the k! orderings of the unlabeled groups.
  BigInt ways = 1;
  for (std::int64_t remaining = n_samples; remaining > 0; remaining -= group) {
    BigInt choose = 1;
    for (std::int64_t j = 0; j < group; ++j) {
      choose *= remaining - j;
      choose /= j + 1;
    }
    ways *= choose;
  }
  for (std::int64_t i = 2; i <= n_clusters; ++i) ways /= i;
  return ways;
}

std::strong_ordering compare_discriminativeness(const ClusterHistogram& a,
                                                const ClusterHistogram& b) {
  if (a.total != b.total)
    throw std::invalid_argument("histograms cover different sample counts");
  const BigInt da = distinguishable_pairs(a);
  const BigInt db = distinguishable_pairs(b);
  if (da < db) return std::strong_ordering::less;
  if (da > db) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

DiscrimReport discrim_report(const ClusterHistogram& hist) {
  DiscrimReport rep;
  rep.indistinguishable = indistinguishable_pairs(hist);
  rep.distinguishable = distinguishable_pairs(hist);
  rep.total_pairs = pair_count(BigInt(hist.total));
  rep.std_form_check =
      indistinguishable_pairs_spread_form(hist) == BigRat(rep.indistinguishable);
  return rep;
}

}  // namespace otl
