#include <random>

#include <benchmark/benchmark.h>

#include "mmts/distribution.hpp"
#include "mmts/loss.hpp"
#include "mmts/retrieval.hpp"
#include "mmts/synthdata.hpp"

namespace {

mmts::Matrix unit_rows(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  mmts::Matrix m(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = m.row(i);
    for (double& v : row) v = normal(rng);
    const double norm = mmts::l2_norm(row);
    for (double& v : row) v /= norm;
  }
  return m;
}

mmts::SimilarityMatrix random_similarities(std::size_t n) {
  return mmts::similarity_matrix(unit_rows(n, 16, 1), unit_rows(n, 16, 2));
}

void BM_MultimodalInfoNCE(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto s = random_similarities(n);
  const auto taus = mmts::TemperatureVector::constant(n, 0.07);
  for (auto _ : state) benchmark::DoNotOptimize(mmts::multimodal_infonce(s, taus));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_MultimodalInfoNCE)->RangeMultiplier(2)->Range(32, 512)->Complexity();

void BM_MaxMargin(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto s = random_similarities(n);
  const auto margins = mmts::TemperatureVector::constant(n, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(mmts::max_margin(s, margins));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_MaxMargin)->RangeMultiplier(2)->Range(32, 512)->Complexity();

void BM_KMeans(benchmark::State& state) {
  const mmts::EmbeddingMatrix emb(unit_rows(static_cast<std::size_t>(state.range(0)), 32, 3));
  mmts::KMeansOptions options;
  options.k = 20;
  options.max_iters = 50;
  for (auto _ : state) benchmark::DoNotOptimize(mmts::kmeans_fit(emb, options));
}
BENCHMARK(BM_KMeans)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);

void BM_Evaluate(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto s = random_similarities(n);
  const auto relevancy = mmts::RelevancyMatrix::diagonal(n);
  const std::vector<std::size_t> ks{1, 5, 10};
  for (auto _ : state) benchmark::DoNotOptimize(mmts::evaluate(s, relevancy, ks));
}
BENCHMARK(BM_Evaluate)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
