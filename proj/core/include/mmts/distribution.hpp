#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mmts/embeddings.hpp"
#include "mmts/matrix.hpp"
#include "mmts/schedule.hpp"

namespace mmts {

struct KMeansOptions {
  std::size_t k = 200;
  std::int64_t seed = 42;
  std::size_t max_iters = 300;
  double tol = 1e-6;
  unsigned threads = 1;
};

// Centroids live in the L2-normalized embedding space.
struct KMeansModel {
  std::size_t k = 0;
  Matrix centroids;
  double inertia = 0.0;
  std::size_t iterations_run = 0;
  std::int64_t seed = 0;
  // Inertia after every assignment step, followed by the final inertia.
  std::vector<double> inertia_history;
};

// Lloyd's algorithm with k-means++ seeding on L2-normalized rows. Empty
// clusters are re-seeded with the sample farthest from its centroid.
// Deterministic for a given (embeddings, options), independent of threads.
KMeansModel kmeans_fit(const EmbeddingMatrix& embeddings, const KMeansOptions& options);

// Nearest centroid per (normalized) row; ties go to the lowest index.
std::vector<std::size_t> nearest_centroids(const KMeansModel& model,
                                           const EmbeddingMatrix& embeddings,
                                           unsigned threads = 1);

std::vector<std::int64_t> cluster_sizes(const KMeansModel& model,
                                        const EmbeddingMatrix& embeddings);

ShiftTable build_shift_table(const KMeansModel& model, const EmbeddingMatrix& embeddings,
                             double sh_minus, double sh_plus);

}  // namespace mmts
