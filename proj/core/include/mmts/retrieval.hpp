#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mmts/loss.hpp"
#include "mmts/matrix.hpp"

namespace mmts {

// Graded query x gallery relevance in [0, 1]; every query needs at least one
// relevant item.
class RelevancyMatrix {
 public:
  explicit RelevancyMatrix(Matrix values);

  // relevancy[i][j] = 1 iff i == j.
  static RelevancyMatrix diagonal(std::size_t n);
  // relevancy[i][j] = 1 iff query i and gallery j share a cluster label.
  static RelevancyMatrix same_cluster(std::span<const std::size_t> query_labels,
                                      std::span<const std::size_t> gallery_labels);

  const Matrix& values() const noexcept { return values_; }
  RelevancyMatrix transposed() const;

 private:
  Matrix values_;
};

// Gallery indices sorted by descending score; equal scores keep the lower
// index first.
std::vector<std::size_t> rank_gallery(std::span<const double> scores);

// 0-based rank of the diagonal item in each query row under rank_gallery.
std::vector<std::size_t> diagonal_ranks(const SimilarityMatrix& similarities);

std::map<std::size_t, double> recall_at_k(const SimilarityMatrix& similarities,
                                          std::span<const std::size_t> ks);

// Mean over queries that contributed; `excluded` counts the ones that had no
// positives (mAP) or zero ideal DCG (nDCG).
struct AveragedMetric {
  double value = 0.0;
  std::size_t excluded = 0;
};

AveragedMetric mean_average_precision(const SimilarityMatrix& similarities,
                                      const RelevancyMatrix& relevancy, double threshold = 0.0);

// Linear gains, log2(rank + 1) discount over the full ranking.
AveragedMetric ndcg(const SimilarityMatrix& similarities, const RelevancyMatrix& relevancy);

struct StratumRecall {
  std::vector<std::size_t> clusters;
  std::size_t queries = 0;
  std::map<std::size_t, double> recall_at;
};

struct StratifiedReport {
  StratumRecall head;
  StratumRecall tail;
  std::map<std::size_t, StratumRecall> per_cluster;
};

// Clusters larger than the median size form the head, the rest the tail. When
// every size is equal, the first ceil(k/2) indices are the head. Queries are restricted to a stratum, the gallery is always complete.
StratifiedReport stratified_report(const SimilarityMatrix& similarities,
                                   std::span<const std::size_t> labels,
                                   std::span<const std::int64_t> sizes,
                                   std::span<const std::size_t> ks);

struct MetricsReport {
  std::map<std::size_t, double> recall_at;      // visual -> text
  std::map<std::size_t, double> recall_at_t2v;  // text -> visual
  double map_v2t = 0.0;
  double map_t2v = 0.0;
  double ndcg_v2t = 0.0;
  double ndcg_t2v = 0.0;
  std::size_t map_excluded = 0;
  std::size_t ndcg_excluded = 0;
  std::optional<StratifiedReport> per_cluster;
};

MetricsReport evaluate(const SimilarityMatrix& similarities_v2t, const RelevancyMatrix& relevancy,
                       std::span<const std::size_t> ks);

void to_json(nlohmann::json& j, const StratumRecall& stratum);
void to_json(nlohmann::json& j, const StratifiedReport& report);
void to_json(nlohmann::json& j, const MetricsReport& report);

}  // namespace mmts
