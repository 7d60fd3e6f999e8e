#include "mmts/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include <nlohmann/json.hpp>

#include "mmts/errors.hpp"

namespace mmts {
namespace {

// Independent streams derived from one seed.
enum class Stream : std::uint64_t { sizes = 1, prototypes = 2, maps = 3, train = 4, test = 5 };

std::mt19937_64 stream_rng(std::int64_t seed, Stream stream) {
  std::seed_seq seq{static_cast<std::uint64_t>(seed) & 0xffffffffu,
                    static_cast<std::uint64_t>(seed) >> 32, static_cast<std::uint64_t>(stream)};
  return std::mt19937_64(seq);
}

struct Geometry {
  Matrix prototypes;  // num_clusters x latent_dim
  Matrix visual_map;  // latent_dim x visual_dim
  Matrix text_map;    // latent_dim x text_dim
};

Matrix random_map(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(rows)));
  const std::size_t full_rank = std::min(rows, cols);
  for (int attempt = 0; attempt < 64; ++attempt) {
    Matrix m(rows, cols);
    for (double& v : m.values()) v = normal(rng);
    if (matrix_rank(m) == full_rank) return m;
  }
  throw NumericError("could not draw a full-rank view map");
}

Geometry make_geometry(const SyntheticDatasetSpec& spec) {
  Geometry g;
  auto proto_rng = stream_rng(spec.seed, Stream::prototypes);
  std::normal_distribution<double> normal(0.0, 1.0);
  g.prototypes = Matrix(spec.num_clusters, spec.latent_dim);
  for (std::size_t c = 0; c < spec.num_clusters; ++c) {
    auto row = g.prototypes.row(c);
    double norm = 0.0;
    while (!(norm > 1e-12)) {
      for (double& v : row) v = normal(proto_rng);
      norm = l2_norm(row);
    }
    for (double& v : row) v /= norm;
  }
  auto map_rng = stream_rng(spec.seed, Stream::maps);
  g.visual_map = random_map(spec.latent_dim, spec.visual_dim, map_rng);
  g.text_map = random_map(spec.latent_dim, spec.text_dim, map_rng);
  return g;
}

PairedDataset sample_pairs(const SyntheticDatasetSpec& spec, const Geometry& g,
                           const std::vector<std::int64_t>& sizes, std::mt19937_64& rng) {
  const auto total = static_cast<std::size_t>(std::accumulate(sizes.begin(), sizes.end(), std::int64_t{0}));
  Matrix latent(total, spec.latent_dim);
  PairedDataset data;
  data.sizes = sizes;
  data.labels.reserve(total);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::size_t row = 0;
  for (std::size_t c = 0; c < sizes.size(); ++c) {
    for (std::int64_t s = 0; s < sizes[c]; ++s, ++row) {
      const auto proto = g.prototypes.row(c);
      auto z = latent.row(row);
      for (std::size_t j = 0; j < z.size(); ++j) {
        // Always consume the draw so sigma does not change the stream layout.
        const double e = noise(rng);
        z[j] = proto[j] + spec.noise_sigma * e;
      }
      data.labels.push_back(c);
    }
  }
  data.v_raw = matmul(latent, g.visual_map);
  data.t_raw = matmul(latent, g.text_map);
  return data;
}

std::vector<std::int64_t> zipf_sizes(std::size_t k, const ZipfSizes& z) {
  if (!(z.exponent >= 0.0) || !std::isfinite(z.exponent))
    throw ArgumentError("zipf exponent must be >= 0");
  if (z.total < static_cast<std::int64_t>(k))
    throw ArgumentError("zipf total must be at least num_clusters");
  std::vector<double> weights(k);
  for (std::size_t c = 0; c < k; ++c) weights[c] = std::pow(static_cast<double>(c + 1), -z.exponent);
  const double mass = std::accumulate(weights.begin(), weights.end(), 0.0);

  // Largest-remainder rounding keeps the sum exact and the order monotone.
  std::vector<std::int64_t> sizes(k);
  std::vector<double> remainder(k);
  std::int64_t assigned = 0;
  for (std::size_t c = 0; c < k; ++c) {
    const double quota = static_cast<double>(z.total) * weights[c] / mass;
    sizes[c] = static_cast<std::int64_t>(std::floor(quota + 1e-9));
    remainder[c] = quota - static_cast<double>(sizes[c]);
    assigned += sizes[c];
  }
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t i = 0; assigned < z.total; ++i, ++assigned) ++sizes[order[i % k]];

  // Clamp to 1, taking the difference from the largest clusters.
  for (std::size_t c = k; c-- > 0;) {
    while (sizes[c] < 1) {
      const auto donor = static_cast<std::size_t>(
          std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
      --sizes[donor];
      ++sizes[c];
    }
  }
  return sizes;
}

std::vector<std::int64_t> pareto_sizes(const SyntheticDatasetSpec& spec, const ParetoSizes& p) {
  if (!(p.alpha > 0.0) || !std::isfinite(p.alpha)) throw ArgumentError("pareto alpha must be > 0");
  if (!(p.scale > 0.0) || !std::isfinite(p.scale)) throw ArgumentError("pareto scale must be > 0");
  auto rng = stream_rng(spec.seed, Stream::sizes);
  std::vector<std::int64_t> sizes(spec.num_clusters);
  for (auto& s : sizes) {
    // Inverse CDF on (0, 1].
    const double u = 1.0 - static_cast<double>(rng() >> 11) * 0x1.0p-53;
    const double draw = p.scale * std::pow(u, -1.0 / p.alpha);
    s = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(draw)));
  }
  std::sort(sizes.begin(), sizes.end(), std::greater<>());
  return sizes;
}

}  // namespace

void SyntheticDatasetSpec::validate() const {
  if (num_clusters < 1) throw ArgumentError("num_clusters must be >= 1");
  if (latent_dim < 1 || visual_dim < 1 || text_dim < 1)
    throw ArgumentError("latent and view dimensions must be >= 1");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma))
    throw ArgumentError("noise_sigma must be >= 0");
  if (const auto* e = std::get_if<ExplicitSizes>(&distribution)) {
    if (e->sizes.size() != num_clusters)
      throw ArgumentError("explicit sizes must list one entry per cluster");
    for (auto s : e->sizes)
      if (s < 1) throw ArgumentError("explicit sizes must all be >= 1");
  }
}

void to_json(nlohmann::json& j, const SyntheticDatasetSpec& spec) {
  nlohmann::json dist;
  std::visit(
      [&](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, ZipfSizes>) {
          dist = {{"kind", "zipf"}, {"exponent", d.exponent}, {"total", d.total}};
        } else if constexpr (std::is_same_v<T, ParetoSizes>) {
          dist = {{"kind", "pareto"}, {"alpha", d.alpha}, {"scale", d.scale}};
        } else {
          dist = {{"kind", "explicit"}, {"sizes", d.sizes}};
        }
      },
      spec.distribution);
  j = nlohmann::json{{"num_clusters", spec.num_clusters},
                     {"distribution", dist},
                     {"latent_dim", spec.latent_dim},
                     {"view_dims", {spec.visual_dim, spec.text_dim}},
                     {"noise_sigma", spec.noise_sigma},
                     {"seed", spec.seed},
                     {"test_per_cluster", spec.test_per_cluster}};
}

void from_json(const nlohmann::json& j, SyntheticDatasetSpec& spec) {
  try {
    const auto& dist = j.at("distribution");
    const auto kind = dist.at("kind").get<std::string>();
    if (kind == "zipf") {
      spec.distribution = ZipfSizes{dist.at("exponent").get<double>(), dist.at("total").get<std::int64_t>()};
    } else if (kind == "pareto") {
      spec.distribution = ParetoSizes{dist.at("alpha").get<double>(), dist.value("scale", 1.0)};
    } else if (kind == "explicit") {
      spec.distribution = ExplicitSizes{dist.at("sizes").get<std::vector<std::int64_t>>()};
    } else {
      throw ArgumentError("unknown size distribution '" + kind + "'");
    }
    if (j.contains("num_clusters")) {
      spec.num_clusters = j.at("num_clusters").get<std::size_t>();
    } else if (const auto* e = std::get_if<ExplicitSizes>(&spec.distribution)) {
      spec.num_clusters = e->sizes.size();
    } else {
      throw ArgumentError("num_clusters is required");
    }
    spec.latent_dim = j.at("latent_dim").get<std::size_t>();
    const auto dims = j.at("view_dims").get<std::vector<std::size_t>>();
    if (dims.size() != 2) throw ArgumentError("view_dims must have two entries");
    spec.visual_dim = dims[0];
    spec.text_dim = dims[1];
    spec.noise_sigma = j.at("noise_sigma").get<double>();
    spec.seed = j.at("seed").get<std::int64_t>();
    spec.test_per_cluster = j.value("test_per_cluster", std::size_t{0});
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(std::string("dataset spec: ") + e.what());
  }
  spec.validate();
}

std::vector<std::int64_t> sample_sizes(const SyntheticDatasetSpec& spec) {
  if (spec.num_clusters < 1) throw ArgumentError("num_clusters must be >= 1");
  return std::visit(
      [&](const auto& d) -> std::vector<std::int64_t> {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, ZipfSizes>) {
          return zipf_sizes(spec.num_clusters, d);
        } else if constexpr (std::is_same_v<T, ParetoSizes>) {
          return pareto_sizes(spec, d);
        } else {
          if (d.sizes.size() != spec.num_clusters)
            throw ArgumentError("explicit sizes must list one entry per cluster");
          for (auto s : d.sizes)
            if (s < 1) throw ArgumentError("explicit sizes must all be >= 1");
          return d.sizes;
        }
      },
      spec.distribution);
}

PairedDataset generate(const SyntheticDatasetSpec& spec) {
  spec.validate();
  const auto sizes = sample_sizes(spec);
  const Geometry g = make_geometry(spec);
  auto rng = stream_rng(spec.seed, Stream::train);
  return sample_pairs(spec, g, sizes, rng);
}

PairedDataset generate_test_split(const SyntheticDatasetSpec& spec) {
  spec.validate();
  if (spec.test_per_cluster == 0) throw ArgumentError("test_per_cluster is 0");
  const Geometry g = make_geometry(spec);
  auto rng = stream_rng(spec.seed, Stream::test);
  const std::vector<std::int64_t> sizes(spec.num_clusters,
                                        static_cast<std::int64_t>(spec.test_per_cluster));
  return sample_pairs(spec, g, sizes, rng);
}

std::size_t matrix_rank(const Matrix& m, double tolerance) {
  Matrix a = m;
  std::size_t rank = 0;
  const std::size_t rows = a.rows();
  const std::size_t cols = a.cols();
  for (std::size_t col = 0; col < cols && rank < rows; ++col) {
    std::size_t pivot = rank;
    for (std::size_t r = rank + 1; r < rows; ++r)
      if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
    if (std::abs(a(pivot, col)) <= tolerance) continue;
    for (std::size_t c = 0; c < cols; ++c) std::swap(a(rank, c), a(pivot, c));
    for (std::size_t r = rank + 1; r < rows; ++r) {
      const double f = a(r, col) / a(rank, col);
      for (std::size_t c = col; c < cols; ++c) a(r, c) -= f * a(rank, c);
    }
    ++rank;
  }
  return rank;
}

}  // namespace mmts
