#include "mmts/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <nlohmann/json.hpp>

#include "mmts/errors.hpp"

namespace mmts {
namespace {

void require_shapes(const SimilarityMatrix& s, const RelevancyMatrix& r) {
  if (s.values.rows() != r.values().rows() || s.values.cols() != r.values().cols())
    throw ArgumentError("similarity and relevancy shapes differ");
}

void require_square(const SimilarityMatrix& s) {
  if (s.values.rows() != s.values.cols())
    throw ArgumentError("diagonal retrieval needs a square similarity matrix");
}

std::map<std::size_t, double> recall_from_ranks(const std::vector<std::size_t>& ranks,
                                                std::span<const std::size_t> queries,
                                                std::span<const std::size_t> ks) {
  std::map<std::size_t, double> out;
  for (std::size_t k : ks) {
    std::size_t hits = 0;
    for (std::size_t q : queries)
      if (ranks[q] < k) ++hits;
    out[k] = queries.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(queries.size());
  }
  return out;
}

void check_ks(std::span<const std::size_t> ks, std::size_t n) {
  for (std::size_t k : ks) {
    if (k == 0) throw ArgumentError("recall K must be positive");
    if (k > n)
      throw ArgumentError("recall K = " + std::to_string(k) + " exceeds gallery size " +
                          std::to_string(n));
  }
}

}  // namespace

RelevancyMatrix::RelevancyMatrix(Matrix values) : values_(std::move(values)) {
  for (std::size_t i = 0; i < values_.rows(); ++i) {
    bool any = false;
    for (double v : values_.row(i)) {
      if (!(v >= 0.0 && v <= 1.0))
        throw ValidationError("relevancy entries must lie in [0, 1]");
      any = any || v > 0.0;
    }
    if (!any) throw ValidationError("query " + std::to_string(i) + " has no relevant item");
  }
}

RelevancyMatrix RelevancyMatrix::diagonal(std::size_t n) {
  return RelevancyMatrix(Matrix::identity(n));
}

RelevancyMatrix RelevancyMatrix::same_cluster(std::span<const std::size_t> query_labels,
                                              std::span<const std::size_t> gallery_labels) {
  Matrix values(query_labels.size(), gallery_labels.size());
  for (std::size_t i = 0; i < query_labels.size(); ++i)
    for (std::size_t j = 0; j < gallery_labels.size(); ++j)
      values(i, j) = query_labels[i] == gallery_labels[j] ? 1.0 : 0.0;
  return RelevancyMatrix(std::move(values));
}

RelevancyMatrix RelevancyMatrix::transposed() const {
  return RelevancyMatrix(values_.transposed());
}

std::vector<std::size_t> rank_gallery(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

std::vector<std::size_t> diagonal_ranks(const SimilarityMatrix& similarities) {
  require_square(similarities);
  const std::size_t n = similarities.size();
  std::vector<std::size_t> ranks(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = similarities.values.row(i);
    const double target = row[i];
    std::size_t ahead = 0;
    for (std::size_t j = 0; j < n; ++j)
      if (row[j] > target || (row[j] == target && j < i)) ++ahead;
    ranks[i] = ahead;
  }
  return ranks;
}

std::map<std::size_t, double> recall_at_k(const SimilarityMatrix& similarities,
                                          std::span<const std::size_t> ks) {
  require_square(similarities);
  check_ks(ks, similarities.size());
  std::vector<std::size_t> all(similarities.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return recall_from_ranks(diagonal_ranks(similarities), all, ks);
}

AveragedMetric mean_average_precision(const SimilarityMatrix& similarities,
                                      const RelevancyMatrix& relevancy, double threshold) {
  require_shapes(similarities, relevancy);
  AveragedMetric out;
  double sum = 0.0;
  std::size_t counted = 0;
  for (std::size_t q = 0; q < similarities.values.rows(); ++q) {
    const auto rel = relevancy.values().row(q);
    const auto order = rank_gallery(similarities.values.row(q));
    std::size_t hits = 0;
    double precision_sum = 0.0;
    for (std::size_t r = 0; r < order.size(); ++r) {
      if (rel[order[r]] > threshold) {
        ++hits;
        precision_sum += static_cast<double>(hits) / static_cast<double>(r + 1);
      }
    }
    if (hits == 0) {
      ++out.excluded;
      continue;
    }
    sum += precision_sum / static_cast<double>(hits);
    ++counted;
  }
  out.value = counted == 0 ? 0.0 : sum / static_cast<double>(counted);
  return out;
}

AveragedMetric ndcg(const SimilarityMatrix& similarities, const RelevancyMatrix& relevancy) {
  require_shapes(similarities, relevancy);
  AveragedMetric out;
  double sum = 0.0;
  std::size_t counted = 0;
  std::vector<double> ideal;
  for (std::size_t q = 0; q < similarities.values.rows(); ++q) {
    const auto rel = relevancy.values().row(q);
    const auto order = rank_gallery(similarities.values.row(q));
    double dcg = 0.0;
    for (std::size_t r = 0; r < order.size(); ++r)
      dcg += rel[order[r]] / std::log2(static_cast<double>(r) + 2.0);
    ideal.assign(rel.begin(), rel.end());
    std::sort(ideal.begin(), ideal.end(), std::greater<>());
    double idcg = 0.0;
    for (std::size_t r = 0; r < ideal.size(); ++r)
      idcg += ideal[r] / std::log2(static_cast<double>(r) + 2.0);
    if (!(idcg > 0.0)) {
      ++out.excluded;
      continue;
    }
    sum += dcg / idcg;
    ++counted;
  }
  out.value = counted == 0 ? 0.0 : sum / static_cast<double>(counted);
  return out;
}

StratifiedReport stratified_report(const SimilarityMatrix& similarities,
                                   std::span<const std::size_t> labels,
                                   std::span<const std::int64_t> sizes,
                                   std::span<const std::size_t> ks) {
  require_square(similarities);
  const std::size_t n = similarities.size();
  if (labels.size() != n)
    throw ArgumentError("labels length " + std::to_string(labels.size()) +
                        " does not match N = " + std::to_string(n));
  for (std::size_t l : labels)
    if (l >= sizes.size()) throw ArgumentError("label refers to an unknown cluster");
  check_ks(ks, n);

  std::vector<bool> is_head(sizes.size(), false);
  if (!sizes.empty()) {
    std::vector<std::int64_t> sorted(sizes.begin(), sizes.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t k = sorted.size();
    const double median = k % 2 == 1 ? static_cast<double>(sorted[k / 2])
                                     : 0.5 * static_cast<double>(sorted[k / 2 - 1] + sorted[k / 2]);
    bool any_head = false;
    for (std::size_t c = 0; c < k; ++c) {
      is_head[c] = static_cast<double>(sizes[c]) > median;
      any_head = any_head || is_head[c];
    }
    // All sizes equal: the lower half of the indices forms the head.
    if (!any_head)
      for (std::size_t c = 0; c < (k + 1) / 2; ++c) is_head[c] = true;
  }

  const auto ranks = diagonal_ranks(similarities);
  StratifiedReport report;
  std::vector<std::size_t> head_queries;
  std::vector<std::size_t> tail_queries;
  std::map<std::size_t, std::vector<std::size_t>> cluster_queries;
  for (std::size_t i = 0; i < n; ++i) {
    (is_head[labels[i]] ? head_queries : tail_queries).push_back(i);
    cluster_queries[labels[i]].push_back(i);
  }
  for (std::size_t c = 0; c < sizes.size(); ++c)
    (is_head[c] ? report.head.clusters : report.tail.clusters).push_back(c);

  report.head.queries = head_queries.size();
  report.head.recall_at = recall_from_ranks(ranks, head_queries, ks);
  report.tail.queries = tail_queries.size();
  report.tail.recall_at = recall_from_ranks(ranks, tail_queries, ks);
  for (const auto& [c, queries] : cluster_queries) {
    StratumRecall s;
    s.clusters = {c};
    s.queries = queries.size();
    s.recall_at = recall_from_ranks(ranks, queries, ks);
    report.per_cluster.emplace(c, std::move(s));
  }
  return report;
}

MetricsReport evaluate(const SimilarityMatrix& similarities_v2t, const RelevancyMatrix& relevancy,
                       std::span<const std::size_t> ks) {
  const SimilarityMatrix t2v = similarities_v2t.transposed();
  const RelevancyMatrix relevancy_t2v = relevancy.transposed();
  MetricsReport report;
  report.recall_at = recall_at_k(similarities_v2t, ks);
  report.recall_at_t2v = recall_at_k(t2v, ks);
  const auto map_v2t = mean_average_precision(similarities_v2t, relevancy);
  const auto map_t2v = mean_average_precision(t2v, relevancy_t2v);
  const auto ndcg_v2t = ndcg(similarities_v2t, relevancy);
  const auto ndcg_t2v = ndcg(t2v, relevancy_t2v);
  report.map_v2t = map_v2t.value;
  report.map_t2v = map_t2v.value;
  report.ndcg_v2t = ndcg_v2t.value;
  report.ndcg_t2v = ndcg_t2v.value;
  report.map_excluded = map_v2t.excluded + map_t2v.excluded;
  report.ndcg_excluded = ndcg_v2t.excluded + ndcg_t2v.excluded;
  return report;
}

namespace {
nlohmann::json recall_json(const std::map<std::size_t, double>& recall) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : recall) j[std::to_string(k)] = v;
  return j;
}
}  // namespace

void to_json(nlohmann::json& j, const StratumRecall& stratum) {
  j = nlohmann::json{{"clusters", stratum.clusters},
                     {"queries", stratum.queries},
                     {"recall_at", recall_json(stratum.recall_at)}};
}

void to_json(nlohmann::json& j, const StratifiedReport& report) {
  nlohmann::json clusters = nlohmann::json::object();
  for (const auto& [c, s] : report.per_cluster) clusters[std::to_string(c)] = s;
  j = nlohmann::json{{"head", report.head}, {"tail", report.tail}, {"per_cluster", clusters}};
}

void to_json(nlohmann::json& j, const MetricsReport& report) {
  j = nlohmann::json{{"recall_at", recall_json(report.recall_at)},
                     {"recall_at_t2v", recall_json(report.recall_at_t2v)},
                     {"map_v2t", report.map_v2t},
                     {"map_t2v", report.map_t2v},
                     {"ndcg_v2t", report.ndcg_v2t},
                     {"ndcg_t2v", report.ndcg_t2v},
                     {"excluded", {{"map", report.map_excluded}, {"ndcg", report.ndcg_excluded}}}};
  if (report.per_cluster) j["stratified"] = *report.per_cluster;
}

}  // namespace mmts
