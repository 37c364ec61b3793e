#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "otl/matrix_core.hpp"

#include <random>

using namespace otl;

namespace {

ScoreMatrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  ScoreMatrix m(static_cast<Eigen::Index>(rows.size()),
                static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index r = 0;
  for (const auto& row : rows) {
    Eigen::Index c = 0;
    for (const double v : row) m(r, c++) = v;
    ++r;
  }
  return m;
}

LabelVector labels_of(std::initializer_list<std::int32_t> v) {
  LabelVector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (const std::int32_t x : v) out[i++] = x;
  return out;
}

}  // namespace

TEST_CASE("argmax_assign picks the largest translated score per row") {
  const ScoreMatrix m = mat({{1.0, 3.0, 2.0}, {0.5, 0.2, 0.1}});
  const LabelVector l = argmax_assign(m);
  CHECK(l[0] == 1);
  CHECK(l[1] == 0);
}

TEST_CASE("argmax_assign breaks ties toward the lowest cluster index") {
  CHECK(argmax_assign(mat({{2.0, 2.0}}))[0] == 0);
  CHECK(argmax_assign(mat({{1.0, 5.0, 5.0}}))[0] == 1);
}

TEST_CASE("a translation can flip an assignment") {
  const ScoreMatrix m = mat({{3.0, 1.0}});
  Eigen::VectorXd t(2);
  t << 2.5, 0.0;
  CHECK(argmax_assign(m)[0] == 0);
  CHECK(argmax_assign(m, t)[0] == 1);
}

TEST_CASE("argmax_assign rejects a translation of the wrong length") {
  const ScoreMatrix m = mat({{1.0, 2.0}});
  CHECK_THROWS_AS(argmax_assign(m, Eigen::VectorXd::Zero(3)),
                  std::invalid_argument);
}

TEST_CASE("translating all clusters equally changes nothing") {
  std::mt19937_64 eng(7);
  ScoreMatrix m(40, 6);
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      m(r, c) = static_cast<double>(eng() >> 11) * 0x1p-53;
  Eigen::VectorXd t(6);
  for (Eigen::Index c = 0; c < 6; ++c)
    t[c] = static_cast<double>(eng() >> 11) * 0x1p-53;
  const LabelVector base = argmax_assign(m, t);
  const LabelVector shifted =
      argmax_assign(m, (t.array() + 0.37).matrix().eval());
  CHECK(base == shifted);
}

TEST_CASE("histogram counts labels and keeps the total") {
  const ClusterHistogram h = histogram(labels_of({0, 1, 1, 2}), 4);
  CHECK(h.counts[0] == 1);
  CHECK(h.counts[1] == 2);
  CHECK(h.counts[2] == 1);
  CHECK(h.counts[3] == 0);
  CHECK(h.total == 4);
}

TEST_CASE("histogram rejects out-of-range labels") {
  CHECK_THROWS_AS(histogram(labels_of({0, 3}), 3), std::invalid_argument);
  CHECK_THROWS_AS(histogram(labels_of({-1}), 3), std::invalid_argument);
  CHECK_THROWS_AS(histogram(labels_of({0}), 0), std::invalid_argument);
}

TEST_CASE("frequency_indicator subtracts the target from the counts") {
  ClusterHistogram h;
  h.counts = CountVector(4);
  h.counts << 4, 0, 0, 0;
  h.total = 4;
  const FrequencyIndicator d = frequency_indicator(h, uniform_target(4, 4));
  CHECK(d[0] == doctest::Approx(3.0));
  CHECK(d[1] == doctest::Approx(-1.0));
  CHECK(d.sum() == doctest::Approx(0.0));
}

TEST_CASE("frequency_indicator validates shape and mass") {
  ClusterHistogram h;
  h.counts = CountVector(2);
  h.counts << 3, 1;
  h.total = 4;
  CHECK_THROWS_AS(frequency_indicator(h, uniform_target(4, 3)),
                  std::invalid_argument);
  CHECK_THROWS_AS(frequency_indicator(h, uniform_target(6, 2)),
                  std::invalid_argument);
}

TEST_CASE("indicator_std is the population deviation about zero") {
  Eigen::VectorXd d(4);
  d << 3, -1, -1, -1;
  CHECK(indicator_std(d) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
  Eigen::VectorXd e(2);
  e << 2, -2;
  CHECK(indicator_std(e) == doctest::Approx(2.0));
  CHECK(indicator_std(Eigen::VectorXd::Zero(5)) == 0.0);
}

TEST_CASE("max_std matches an explicitly built degenerate histogram") {
  const auto degenerate_std = [](std::int64_t n, std::int64_t k) {
    ClusterHistogram h;
    h.counts = CountVector::Zero(k);
    h.counts[0] = n;
    h.total = n;
    return indicator_std(frequency_indicator(h, uniform_target(n, k)));
  };
  CHECK(max_std(4, 4) == doctest::Approx(degenerate_std(4, 4)).epsilon(1e-12));
  CHECK(max_std(50000, 128) ==
        doctest::Approx(degenerate_std(50000, 128)).epsilon(1e-12));
  CHECK(max_std(1000, 2) == doctest::Approx(500.0));
  CHECK_THROWS_AS(max_std(10, 1), std::invalid_argument);
}

TEST_CASE("min_achievable_std is zero exactly when k divides n") {
  CHECK(min_achievable_std(100, 4) == 0.0);
  CHECK(min_achievable_std(5, 4) ==
        doctest::Approx(std::sqrt(0.1875)).epsilon(1e-12));
  CHECK(min_achievable_std(7, 3) > 0.0);
}

TEST_CASE("target overload of min_achievable_std agrees with the uniform one") {
  for (const auto [n, k] : {std::pair<std::int64_t, std::int64_t>{5, 4},
                            {100, 4},
                            {50000, 128},
                            {17, 6}}) {
    CHECK(min_achievable_std(uniform_target(n, k)) ==
          doctest::Approx(min_achievable_std(n, k)).epsilon(1e-9));
  }
}

TEST_CASE("min_achievable_std apportions fractional targets optimally") {
  TargetDistribution t(2);
  t << 10.0 / 3.0, 20.0 / 3.0;
  // floors (3,6), the one leftover goes to the larger remainder: (3,7)
  CHECK(min_achievable_std(t) == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("score_range spans the extremes") {
  CHECK(score_range(mat({{0.0, 1.0}, {0.25, 0.75}})) == doctest::Approx(1.0));
  CHECK(score_range(ScoreMatrix::Constant(3, 3, 0.4)) == 0.0);
}

TEST_CASE("random assignments keep mass balance invariants") {
  std::mt19937_64 eng(123);
  for (int rep = 0; rep < 50; ++rep) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(eng() % 200);
    const Eigen::Index k = 2 + static_cast<Eigen::Index>(eng() % 12);
    LabelVector l(n);
    for (Eigen::Index i = 0; i < n; ++i)
      l[i] = static_cast<std::int32_t>(eng() % static_cast<std::uint64_t>(k));
    const ClusterHistogram h = histogram(l, k);
    CHECK(h.total == n);
    CHECK(h.counts.sum() == n);
    const FrequencyIndicator d = frequency_indicator(h, uniform_target(n, k));
    CHECK(std::abs(d.sum()) < 1e-9);
    CHECK(indicator_std(d) <= max_std(n, k) + 1e-9);
    CHECK(indicator_std(d) + 1e-12 >= min_achievable_std(n, k));
  }
}
