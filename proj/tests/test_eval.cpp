#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "otl/datagen.hpp"
#include "otl/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

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

// Plain top-k majority vote, written independently of the library path.
LabelVector majority_oracle(const FeatureMatrix& train_features,
                            const LabelVector& train_labels,
                            const FeatureMatrix& query_features,
                            Eigen::Index neighbors, Eigen::Index n_classes) {
  FeatureMatrix train = train_features;
  for (Eigen::Index r = 0; r < train.rows(); ++r)
    train.row(r) /= train.row(r).norm();
  FeatureMatrix query = query_features;
  for (Eigen::Index r = 0; r < query.rows(); ++r)
    query.row(r) /= query.row(r).norm();

  const Eigen::Index top = std::min(neighbors, train.rows());
  LabelVector out(query.rows());
  for (Eigen::Index q = 0; q < query.rows(); ++q) {
    const Eigen::VectorXd sims = train * query.row(q).transpose();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(train.rows()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
      if (sims[a] != sims[b]) return sims[a] > sims[b];
      return a < b;
    });
    std::vector<int> counts(static_cast<std::size_t>(n_classes), 0);
    for (Eigen::Index t = 0; t < top; ++t)
      ++counts[static_cast<std::size_t>(train_labels[order[static_cast<std::size_t>(t)]])];
    out[q] = static_cast<std::int32_t>(std::distance(
        counts.begin(), std::max_element(counts.begin(), counts.end())));
  }
  return out;
}

}  // namespace

TEST_CASE("a uniform two-way softmax costs ln 2") {
  const double ce = softmax_cross_entropy(mat({{0.0, 0.0}}), labels_of({0}));
  CHECK(ce == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("a twenty-logit margin costs log1p(e^-20)") {
  const double ce =
      softmax_cross_entropy(mat({{10.0, -10.0}}), labels_of({0}));
  CHECK(ce == doctest::Approx(2.0611536203143807e-9).epsilon(1e-9));
}

TEST_CASE("the loss is the mean of the per-row losses") {
  const double ce = softmax_cross_entropy(mat({{0.0, 0.0}, {10.0, -10.0}}),
                                          labels_of({0, 0}));
  CHECK(ce == doctest::Approx(0.3465735913105495).epsilon(1e-9));
}

TEST_CASE("the one-hot and label-vector forms agree") {
  const ScoreMatrix m = gen_uniform(50, 6, 14);
  LabelVector labels(50);
  for (Eigen::Index i = 0; i < 50; ++i)
    labels[i] = static_cast<std::int32_t>((i * 7) % 6);
  CHECK(softmax_cross_entropy(m, labels) ==
        doctest::Approx(softmax_cross_entropy(m, onehot_labels(labels, 6)))
            .epsilon(1e-12));
}

TEST_CASE("the loss is non-negative and shrinks as the right logit grows") {
  const LabelVector y = labels_of({0});
  double last = softmax_cross_entropy(mat({{0.0, 0.0}}), y);
  CHECK(last > 0.0);
  for (const double margin : {1.0, 5.0, 15.0}) {
    const double ce = softmax_cross_entropy(mat({{margin, 0.0}}), y);
    CHECK(ce > 0.0);
    CHECK(ce < last);
    last = ce;
  }
}

TEST_CASE("loss input shapes are validated") {
  CHECK_THROWS_AS(
      softmax_cross_entropy(mat({{1.0, 2.0}}), labels_of({0, 1})),
      std::invalid_argument);
  CHECK_THROWS_AS(softmax_cross_entropy(mat({{1.0, 2.0}}), labels_of({2})),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      softmax_cross_entropy(mat({{1.0, 2.0}}), mat({{1.0, 0.0, 0.0}})),
      std::invalid_argument);
}

TEST_CASE("a single view reduces the pair loss to plain cross-entropy") {
  ViewSet v;
  v.outputs.push_back(gen_uniform(30, 4, 3));
  LabelVector labels(30);
  for (Eigen::Index i = 0; i < 30; ++i)
    labels[i] = static_cast<std::int32_t>(i % 4);
  v.labels.push_back(labels);
  CHECK(lct_loss(v) == softmax_cross_entropy(v.outputs[0], v.labels[0]));
}

TEST_CASE("two identical views cost exactly four single-view terms") {
  ViewSet v;
  v.outputs.push_back(gen_uniform(40, 5, 9));
  LabelVector labels(40);
  for (Eigen::Index i = 0; i < 40; ++i)
    labels[i] = static_cast<std::int32_t>(i % 5);
  v.labels.push_back(labels);
  v.outputs.push_back(v.outputs[0]);
  v.labels.push_back(v.labels[0]);
  const double single = softmax_cross_entropy(v.outputs[0], v.labels[0]);
  CHECK(lct_loss(v) == doctest::Approx(4.0 * single).epsilon(1e-12));
}

TEST_CASE("view-inconsistent labels cost more than consistent ones") {
  const ScoreMatrix confident = mat({{10.0, 0.0}, {0.0, 10.0}});
  ViewSet consistent;
  consistent.outputs = {confident, confident};
  consistent.labels = {labels_of({0, 1}), labels_of({0, 1})};
  ViewSet flipped;
  flipped.outputs = {confident, confident};
  flipped.labels = {labels_of({0, 1}), labels_of({1, 0})};
  CHECK(lct_loss(flipped) > lct_loss(consistent));
}

TEST_CASE("view sets are validated") {
  CHECK_THROWS_AS(lct_loss(ViewSet{}), std::invalid_argument);

  ViewSet odd;
  odd.outputs = {mat({{1.0, 0.0}}), mat({{1.0, 0.0, 0.0}})};
  odd.labels = {labels_of({0}), labels_of({0})};
  CHECK_THROWS_AS(lct_loss(odd), std::invalid_argument);

  ViewSet short_labels;
  short_labels.outputs = {mat({{1.0, 0.0}})};
  short_labels.labels = {};
  CHECK_THROWS_AS(lct_loss(short_labels), std::invalid_argument);
}

TEST_CASE("a query equal to a training point takes that point's label") {
  const ScoreMatrix train =
      mat({{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}});
  const LabelVector tl = labels_of({2, 0, 1});
  KnnConfig cfg;
  cfg.neighbors = 1;
  const LabelVector pred = weighted_knn_predict(train, tl, train, cfg, 3);
  CHECK(pred == tl);
}

TEST_CASE("tight blobs classify almost perfectly") {
  const FeatureMatrix centers = blob_centers(32, 5, 60);
  double d_min = std::numeric_limits<double>::infinity();
  for (Eigen::Index a = 0; a < 5; ++a)
    for (Eigen::Index b = a + 1; b < 5; ++b)
      d_min = std::min(d_min, (centers.row(a) - centers.row(b)).norm());
  const BlobData data = gen_blobs(1000, 32, 5, d_min / 10.0, 60);
  CHECK((data.centers - centers).cwiseAbs().maxCoeff() == 0.0);

  const Eigen::Index split = 800;
  const FeatureMatrix train = data.features.topRows(split);
  const FeatureMatrix query = data.features.bottomRows(1000 - split);
  const LabelVector tl = data.labels.head(split);
  const LabelVector pred =
      weighted_knn_predict(train, tl, query, KnnConfig{}, 5);
  int hits = 0;
  for (Eigen::Index i = 0; i < pred.size(); ++i)
    if (pred[i] == data.labels[split + i]) ++hits;
  CHECK(hits >= 190);  // 95% of 200
}

TEST_CASE("a huge temperature reduces to an unweighted majority vote") {
  const BlobData data = gen_blobs(400, 16, 4, 0.08, 21);
  const FeatureMatrix train = data.features.topRows(320);
  const FeatureMatrix query = data.features.bottomRows(80);
  const LabelVector tl = data.labels.head(320);
  KnnConfig cfg;
  cfg.neighbors = 15;
  cfg.sigma = 1e6;
  const LabelVector pred = weighted_knn_predict(train, tl, query, cfg, 4);
  const LabelVector plain = majority_oracle(train, tl, query, 15, 4);
  CHECK(pred == plain);
}

TEST_CASE("doubling every feature changes nothing") {
  const BlobData data = gen_blobs(200, 8, 3, 0.1, 5);
  const FeatureMatrix train = data.features.topRows(150);
  const FeatureMatrix query = data.features.bottomRows(50);
  const LabelVector tl = data.labels.head(150);
  const LabelVector base =
      weighted_knn_predict(train, tl, query, KnnConfig{}, 3);
  const LabelVector scaled = weighted_knn_predict(
      FeatureMatrix(2.0 * train), tl, FeatureMatrix(2.0 * query), KnnConfig{}, 3);
  CHECK(base == scaled);
}

TEST_CASE("more neighbors than training rows just uses them all") {
  const ScoreMatrix train = mat({{1.0, 0.0}, {0.9, 0.1}, {0.0, 1.0}});
  const LabelVector tl = labels_of({0, 0, 1});
  KnnConfig cfg;
  cfg.neighbors = 50;
  const LabelVector pred =
      weighted_knn_predict(train, tl, mat({{1.0, 0.05}}), cfg, 2);
  CHECK(pred[0] == 0);
}

TEST_CASE("zero-norm feature rows are rejected") {
  ScoreMatrix train = mat({{1.0, 0.0}, {0.0, 0.0}});
  const LabelVector tl = labels_of({0, 1});
  CHECK_THROWS_AS(
      weighted_knn_predict(train, tl, mat({{1.0, 0.0}}), KnnConfig{}, 2),
      std::invalid_argument);
  const ScoreMatrix good = mat({{1.0, 0.0}, {0.0, 1.0}});
  CHECK_THROWS_AS(
      weighted_knn_predict(good, tl, mat({{0.0, 0.0}}), KnnConfig{}, 2),
      std::invalid_argument);
}

TEST_CASE("classifier configuration is validated") {
  const ScoreMatrix train = mat({{1.0, 0.0}, {0.0, 1.0}});
  const LabelVector tl = labels_of({0, 1});
  const ScoreMatrix q = mat({{1.0, 0.0}});
  KnnConfig cfg;
  cfg.neighbors = 0;
  CHECK_THROWS_AS(weighted_knn_predict(train, tl, q, cfg, 2),
                  std::invalid_argument);
  cfg = KnnConfig{};
  cfg.sigma = 0.0;
  CHECK_THROWS_AS(weighted_knn_predict(train, tl, q, cfg, 2),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      weighted_knn_predict(train, tl, mat({{1.0, 0.0, 0.0}}), KnnConfig{}, 2),
      std::invalid_argument);
  CHECK_THROWS_AS(weighted_knn_predict(train, tl, q, KnnConfig{}, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      weighted_knn_predict(train, labels_of({0}), q, KnnConfig{}, 2),
      std::invalid_argument);
}
