#include "mmts/retrieval.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "mmts/errors.hpp"
#include "oracles.hpp"

namespace mmts {
namespace {

SimilarityMatrix sim(const oracle::Grid& g) { return SimilarityMatrix{oracle::to_matrix(g)}; }

const std::vector<std::size_t> kKs{1, 5, 10};

TEST(RecallTest, IdentityIsPerfect) {
  const SimilarityMatrix s{Matrix::identity(10)};
  const auto r = recall_at_k(s, kKs);
  for (std::size_t k : kKs) EXPECT_EQ(r.at(k), 1.0);
  const auto report = evaluate(s, RelevancyMatrix::diagonal(10), kKs);
  EXPECT_EQ(report.map_v2t, 1.0);
  EXPECT_EQ(report.ndcg_v2t, 1.0);
  EXPECT_EQ(report.recall_at_t2v.at(1), 1.0);
}

TEST(RecallTest, AntiDiagonalIsZeroAtOne) {
  Matrix m(6, 6);
  for (std::size_t i = 0; i < 6; ++i) m(i, 5 - i) = 1.0;
  const auto r = recall_at_k(SimilarityMatrix{m}, std::vector<std::size_t>{1, 6});
  EXPECT_EQ(r.at(1), 0.0);
  EXPECT_EQ(r.at(6), 1.0);
}

TEST(RecallTest, TiesGoToLowerIndex) {
  const Matrix m(3, 3, std::vector<double>(9, 0.5));
  EXPECT_EQ(diagonal_ranks(SimilarityMatrix{m}), (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(rank_gallery(std::vector<double>{0.1, 0.3, 0.3, 0.2}),
            (std::vector<std::size_t>{1, 2, 3, 0}));
}

TEST(RecallTest, KLargerThanGalleryRejected) {
  EXPECT_THROW(recall_at_k(SimilarityMatrix{Matrix::identity(4)}, std::vector<std::size_t>{5}),
               ArgumentError);
  EXPECT_THROW(recall_at_k(SimilarityMatrix{Matrix::identity(4)}, std::vector<std::size_t>{0}),
               ArgumentError);
}

TEST(MapTest, HandExamples) {
  // Positive at rank 1 -> AP 1; positive at rank 2 -> AP 0.5.
  const auto s = sim({{0.9, 0.1}, {0.9, 0.1}});
  const RelevancyMatrix rel(Matrix::identity(2));
  EXPECT_DOUBLE_EQ(mean_average_precision(s, rel).value, 0.75);
  EXPECT_DOUBLE_EQ(ndcg(s, rel).value, (1.0 + 1.0 / std::log2(3.0)) / 2.0);

  const auto single = sim({{0.2, 0.8}});
  const RelevancyMatrix first(Matrix(1, 2, {1.0, 0.0}));
  EXPECT_DOUBLE_EQ(mean_average_precision(single, first).value, 0.5);
  EXPECT_DOUBLE_EQ(ndcg(single, first).value, 1.0 / std::log2(3.0));
}

TEST(MapTest, ThresholdExcludesQueries) {
  const auto s = sim({{0.9, 0.1}, {0.1, 0.9}});
  const RelevancyMatrix rel(Matrix(2, 2, {0.3, 0.0, 0.0, 1.0}));
  const auto m = mean_average_precision(s, rel, 0.5);
  EXPECT_EQ(m.excluded, 1u);
  EXPECT_EQ(m.value, 1.0);
  EXPECT_EQ(ndcg(s, rel).excluded, 0u);
}

TEST(RelevancyTest, Validation) {
  EXPECT_THROW(RelevancyMatrix(Matrix(1, 2, {0.0, 0.0})), ValidationError);
  EXPECT_THROW(RelevancyMatrix(Matrix(1, 2, {1.5, 0.0})), ValidationError);
  const std::vector<std::size_t> labels{0, 0, 1};
  const auto r = RelevancyMatrix::same_cluster(labels, labels);
  EXPECT_EQ(r.values(), Matrix(3, 3, {1, 1, 0, 1, 1, 0, 0, 0, 1}));
}

TEST(MetricsOracleTest, RandomInstancesAgree) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> size_dist(2, 12);
  std::bernoulli_distribution coarse(0.3);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = size_dist(rng);
    auto g = oracle::random_grid(n, n, rng);
    // Quantized scores force ties through the tie-break path.
    if (coarse(rng))
      for (auto& row : g)
        for (double& v : row) v = std::round(v * 2.0) / 2.0;
    oracle::Grid rel = oracle::random_grid(n, n, rng, 0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) rel[i][j] = rel[i][j] < 0.6 ? 0.0 : rel[i][j];
    for (std::size_t i = 0; i < n; ++i) rel[i][i] = 1.0;
    const auto s = sim(g);
    const RelevancyMatrix r(oracle::to_matrix(rel));
    for (std::size_t k = 1; k <= n; ++k)
      EXPECT_NEAR(recall_at_k(s, std::vector<std::size_t>{k}).at(k), oracle::recall_at(g, k), 1e-12);
    EXPECT_NEAR(mean_average_precision(s, r, 0.0).value, oracle::mean_average_precision(g, rel, 0.0),
                1e-12);
    EXPECT_NEAR(mean_average_precision(s, r, 0.7).value, oracle::mean_average_precision(g, rel, 0.7),
                1e-12);
    EXPECT_NEAR(ndcg(s, r).value, oracle::ndcg(g, rel), 1e-12);
  }
}

TEST(MetricsPropertyTest, MonotoneTransformInvariance) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto g = oracle::random_grid(8, 8, rng);
    auto h = g;
    for (auto& row : h)
      for (double& v : row) v = std::exp(3.0 * v) + 1.0;
    const auto a = evaluate(sim(g), RelevancyMatrix::diagonal(8), std::vector<std::size_t>{1, 3, 8});
    const auto b = evaluate(sim(h), RelevancyMatrix::diagonal(8), std::vector<std::size_t>{1, 3, 8});
    EXPECT_EQ(nlohmann::json(a), nlohmann::json(b));
  }
}

TEST(MetricsPropertyTest, RecallMonotoneInK) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const auto g = oracle::random_grid(10, 10, rng);
    std::vector<std::size_t> ks(10);
    for (std::size_t k = 0; k < 10; ++k) ks[k] = k + 1;
    const auto r = recall_at_k(sim(g), ks);
    for (std::size_t k = 2; k <= 10; ++k) EXPECT_LE(r.at(k - 1), r.at(k));
    EXPECT_EQ(r.at(10), 1.0);
  }
}

TEST(StratifiedTest, UniformAndPerfectAndAdversarial) {
  // Clusters: 0 has 4 items, 1 has 2, 2 has 1, 3 has 1. Head = {0, 1}.
  const std::vector<std::size_t> labels{0, 0, 0, 0, 1, 1, 2, 3};
  const std::vector<std::int64_t> sizes{4, 2, 1, 1};
  const std::vector<std::size_t> ks{1};

  const auto perfect = stratified_report(SimilarityMatrix{Matrix::identity(8)}, labels, sizes, ks);
  EXPECT_EQ(perfect.head.clusters, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(perfect.tail.clusters, (std::vector<std::size_t>{2, 3}));
  EXPECT_EQ(perfect.head.queries, 6u);
  EXPECT_EQ(perfect.tail.queries, 2u);
  EXPECT_EQ(perfect.head.recall_at.at(1), 1.0);
  EXPECT_EQ(perfect.tail.recall_at.at(1), 1.0);
  EXPECT_EQ(perfect.per_cluster.at(3).recall_at.at(1), 1.0);

  // Tail rows point at item 0, head rows are correct.
  Matrix adv = Matrix::identity(8);
  for (std::size_t i : {6u, 7u}) {
    adv(i, i) = 0.0;
    adv(i, 0) = 1.0;
  }
  const auto a = stratified_report(SimilarityMatrix{adv}, labels, sizes, ks);
  EXPECT_EQ(a.head.recall_at.at(1), 1.0);
  EXPECT_EQ(a.tail.recall_at.at(1), 0.0);

  // Constant scores: only ties to the lowest gallery index hit.
  const Matrix flat(8, 8, std::vector<double>(64, 0.0));
  const auto u = stratified_report(SimilarityMatrix{flat}, labels, sizes, ks);
  EXPECT_DOUBLE_EQ(u.head.recall_at.at(1), 1.0 / 6.0);
  EXPECT_EQ(u.tail.recall_at.at(1), 0.0);
}

TEST(StratifiedTest, MedianClusterGoesToTail) {
  const std::vector<std::size_t> labels{0, 1, 2};
  const std::vector<std::int64_t> sizes{1, 3, 2};
  const auto r = stratified_report(SimilarityMatrix{Matrix::identity(3)}, labels, sizes,
                                   std::vector<std::size_t>{1});
  EXPECT_EQ(r.head.clusters, (std::vector<std::size_t>{1}));
  EXPECT_EQ(r.tail.clusters, (std::vector<std::size_t>{0, 2}));
}

TEST(StratifiedTest, LongTailSplitFollowsSizes) {
  std::vector<std::int64_t> sizes(40, 10);
  for (std::size_t c = 0; c < 8; ++c) sizes[c] = 500;
  std::vector<std::size_t> labels(40);
  for (std::size_t c = 0; c < 40; ++c) labels[c] = c;
  const auto r = stratified_report(SimilarityMatrix{Matrix::identity(40)}, labels, sizes,
                                   std::vector<std::size_t>{1});
  EXPECT_EQ(r.head.clusters.size(), 8u);
  EXPECT_EQ(r.tail.clusters.size(), 32u);
  EXPECT_EQ(r.tail.clusters.front(), 8u);

  const std::vector<std::int64_t> uniform(5, 3);
  const std::vector<std::size_t> five{0, 1, 2, 3, 4};
  const auto u = stratified_report(SimilarityMatrix{Matrix::identity(5)}, five, uniform,
                                   std::vector<std::size_t>{1});
  EXPECT_EQ(u.head.clusters, (std::vector<std::size_t>{0, 1, 2}));
}

TEST(EvaluateTest, JsonShape) {
  const auto report =
      evaluate(SimilarityMatrix{Matrix::identity(3)}, RelevancyMatrix::diagonal(3),
               std::vector<std::size_t>{1, 2});
  const nlohmann::json j = report;
  EXPECT_EQ(j.at("recall_at").at("1"), 1.0);
  EXPECT_EQ(j.at("excluded").at("map"), 0);
  EXPECT_TRUE(j.contains("ndcg_t2v"));
}

}  // namespace
}  // namespace mmts
