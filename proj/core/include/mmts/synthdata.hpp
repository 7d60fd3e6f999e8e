#pragma once

#include <cstddef>
#include <cstdint>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mmts/matrix.hpp"

namespace mmts {

// size_c proportional to (c+1)^-exponent, scaled to `total`, each >= 1.
struct ZipfSizes {
  double exponent = 1.0;
  std::int64_t total = 1000;
};

// i.i.d. ceil(scale * Pareto(alpha)) draws, sorted descending.
struct ParetoSizes {
  double alpha = 6.0;
  double scale = 1.0;
};

struct ExplicitSizes {
  std::vector<std::int64_t> sizes;
};

using SizeDistribution = std::variant<ZipfSizes, ParetoSizes, ExplicitSizes>;

struct SyntheticDatasetSpec {
  std::size_t num_clusters = 8;
  SizeDistribution distribution = ZipfSizes{};
  std::size_t latent_dim = 16;
  std::size_t visual_dim = 32;
  std::size_t text_dim = 32;
  double noise_sigma = 0.1;
  std::int64_t seed = 0;
  // Balanced held-out pairs per cluster; 0 disables the test split.
  std::size_t test_per_cluster = 0;

  void validate() const;
};

void to_json(nlohmann::json& j, const SyntheticDatasetSpec& spec);
void from_json(const nlohmann::json& j, SyntheticDatasetSpec& spec);

struct PairedDataset {
  Matrix v_raw;
  Matrix t_raw;
  std::vector<std::size_t> labels;
  std::vector<std::int64_t> sizes;

  std::size_t count() const noexcept { return labels.size(); }
};

std::vector<std::int64_t> sample_sizes(const SyntheticDatasetSpec& spec);

// Training pairs: cluster prototypes on the unit sphere plus isotropic noise,
// pushed through two fixed full-rank random linear maps (one per view).
PairedDataset generate(const SyntheticDatasetSpec& spec);

// Balanced split sharing prototypes and view maps with generate(spec) but
// drawn from an independent noise stream.
PairedDataset generate_test_split(const SyntheticDatasetSpec& spec);

// Numerical rank by Gaussian elimination with partial pivoting.
std::size_t matrix_rank(const Matrix& m, double tolerance = 1e-9);

}  // namespace mmts
