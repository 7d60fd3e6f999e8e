#include "mmts/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "mmts/errors.hpp"
#include "mmts/parallel.hpp"

namespace mmts {
namespace {

struct Assignment {
  std::size_t cluster;
  double distance;
};

Assignment nearest(std::span<const double> point, const Matrix& centroids) {
  Assignment best{0, std::numeric_limits<double>::infinity()};
  for (std::size_t c = 0; c < centroids.rows(); ++c) {
    const double d = squared_distance(point, centroids.row(c));
    if (d < best.distance) best = {c, d};
  }
  return best;
}

void assign_all(const Matrix& points, const Matrix& centroids, unsigned threads,
                std::vector<Assignment>& out) {
  out.resize(points.rows());
  parallel_for(points.rows(), threads,
               [&](std::size_t i) { out[i] = nearest(points.row(i), centroids); });
}

double total_inertia(const std::vector<Assignment>& assignments) {
  double sum = 0.0;
  for (const auto& a : assignments) sum += a.distance;
  return sum;
}

// Uniform double in [0, 1) from the top 53 bits of a 64-bit draw.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

Matrix kmeans_plus_plus(const Matrix& points, std::size_t k, std::mt19937_64& rng) {
  const std::size_t n = points.rows();
  Matrix centroids(k, points.cols());
  std::vector<double> best(n, std::numeric_limits<double>::infinity());

  auto place = [&](std::size_t c, std::size_t index) {
    const auto src = points.row(index);
    std::copy(src.begin(), src.end(), centroids.row(c).begin());
    for (std::size_t i = 0; i < n; ++i)
      best[i] = std::min(best[i], squared_distance(points.row(i), centroids.row(c)));
  };

  place(0, static_cast<std::size_t>(rng() % n));
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (double b : best) total += b;
    std::size_t chosen = n - 1;
    if (total > 0.0) {
      const double target = uniform01(rng) * total;
      double running = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        running += best[i];
        if (target < running) {
          chosen = i;
          break;
        }
      }
      // Guard against landing on a zero-weight tail through rounding.
      while (best[chosen] == 0.0 && chosen > 0) --chosen;
    } else {
      chosen = static_cast<std::size_t>(rng() % n);
    }
    place(c, chosen);
  }
  return centroids;
}

}  // namespace

KMeansModel kmeans_fit(const EmbeddingMatrix& embeddings, const KMeansOptions& options) {
  const std::size_t n = embeddings.count();
  if (options.k == 0) throw ArgumentError("k must be positive");
  if (options.k > n) {
    throw ArgumentError("k = " + std::to_string(options.k) + " exceeds sample count " +
                        std::to_string(n));
  }
  if (options.max_iters == 0) throw ArgumentError("max_iters must be positive");
  if (!(options.tol >= 0.0)) throw ArgumentError("tol must be non-negative");

  const Matrix points = embeddings.normalized().matrix();
  const std::size_t d = points.cols();
  const std::size_t k = options.k;

  std::mt19937_64 rng(static_cast<std::uint64_t>(options.seed));
  KMeansModel model;
  model.k = k;
  model.seed = options.seed;
  model.centroids = kmeans_plus_plus(points, k, rng);

  std::vector<Assignment> assignments;
  std::vector<std::size_t> counts(k);
  for (std::size_t iter = 0; iter < options.max_iters; ++iter) {
    assign_all(points, model.centroids, options.threads, assignments);
    model.inertia_history.push_back(total_inertia(assignments));
    model.iterations_run = iter + 1;

    Matrix sums(k, d);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t c = assignments[i].cluster;
      ++counts[c];
      auto dst = sums.row(c);
      const auto src = points.row(i);
      for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
    }

    Matrix next(k, d);
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      auto dst = next.row(c);
      const auto src = sums.row(c);
      for (std::size_t j = 0; j < d; ++j) dst[j] = src[j] / static_cast<double>(counts[c]);
    }
    // Empty clusters take the sample currently farthest from its centroid;
    // that sample's distance drops to zero, so inertia cannot grow.
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      std::size_t far = 0;
      for (std::size_t i = 1; i < n; ++i)
        if (assignments[i].distance > assignments[far].distance) far = i;
      const auto src = points.row(far);
      std::copy(src.begin(), src.end(), next.row(c).begin());
      assignments[far].distance = 0.0;
    }

    double movement = 0.0;
    for (std::size_t c = 0; c < k; ++c)
      movement = std::max(movement, std::sqrt(squared_distance(next.row(c), model.centroids.row(c))));
    model.centroids = std::move(next);
    if (movement < options.tol) break;
  }

  assign_all(points, model.centroids, options.threads, assignments);
  model.inertia = total_inertia(assignments);
  model.inertia_history.push_back(model.inertia);
  return model;
}

std::vector<std::size_t> nearest_centroids(const KMeansModel& model,
                                           const EmbeddingMatrix& embeddings, unsigned threads) {
  if (embeddings.dim() != model.centroids.cols()) {
    throw ArgumentError("embedding dimension " + std::to_string(embeddings.dim()) +
                        " does not match centroid dimension " +
                        std::to_string(model.centroids.cols()));
  }
  const Matrix points = embeddings.normalized().matrix();
  std::vector<Assignment> assignments;
  assign_all(points, model.centroids, threads, assignments);
  std::vector<std::size_t> labels(assignments.size());
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = assignments[i].cluster;
  return labels;
}

std::vector<std::int64_t> cluster_sizes(const KMeansModel& model,
                                        const EmbeddingMatrix& embeddings) {
  std::vector<std::int64_t> sizes(model.k, 0);
  for (std::size_t c : nearest_centroids(model, embeddings)) ++sizes[c];
  return sizes;
}

ShiftTable build_shift_table(const KMeansModel& model, const EmbeddingMatrix& embeddings,
                             double sh_minus, double sh_plus) {
  if (sh_minus > sh_plus) throw ArgumentError("sh_minus must be <= sh_plus");
  auto labels = nearest_centroids(model, embeddings);
  std::vector<std::int64_t> sizes(model.k, 0);
  for (std::size_t c : labels) ++sizes[c];
  return shift_table_from_sizes(std::move(sizes), std::move(labels), sh_minus, sh_plus,
                                model.seed);
}

}  // namespace mmts
