#include "mmts/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <nlohmann/json.hpp>

#include "mmts/distribution.hpp"
#include "mmts/errors.hpp"

namespace mmts {

std::string_view to_string(TrainMode mode) {
  switch (mode) {
    case TrainMode::fixed:
      return "fixed";
    case TrainMode::ts_only:
      return "ts_only";
    case TrainMode::ics_only:
      return "ics_only";
    case TrainMode::ts_and_ics:
      return "ts_and_ics";
  }
  return "fixed";
}

TrainMode train_mode_from_string(std::string_view name) {
  if (name == "fixed") return TrainMode::fixed;
  if (name == "ts_only") return TrainMode::ts_only;
  if (name == "ics_only") return TrainMode::ics_only;
  if (name == "ts_and_ics") return TrainMode::ts_and_ics;
  throw ArgumentError("unknown training mode '" + std::string(name) + "'");
}

std::string_view to_string(ShiftSource source) {
  return source == ShiftSource::oracle_labels ? "oracle_labels" : "kmeans_on_text_view";
}

ShiftSource shift_source_from_string(std::string_view name) {
  if (name == "oracle_labels") return ShiftSource::oracle_labels;
  if (name == "kmeans_on_text_view") return ShiftSource::kmeans_on_text_view;
  throw ArgumentError("unknown shift table source '" + std::string(name) + "'");
}

void TrainConfig::validate() const {
  schedule.validate();
  if (mode == TrainMode::fixed && !(fixed_value > 0.0))
    throw ArgumentError("fixed temperature/margin must be positive");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
    throw ArgumentError("learning_rate must be non-negative");
  if (batch_size < 1) throw ArgumentError("batch_size must be >= 1");
  if (total_iters < 0) throw ArgumentError("total_iters must be >= 0");
  if (embedding_dim < 1) throw ArgumentError("embedding_dim must be >= 1");
  if (log_interval < 1) throw ArgumentError("log_interval must be >= 1");
}

void to_json(nlohmann::json& j, const TrainConfig& config) {
  j = nlohmann::json{{"schedule", config.schedule},
                     {"mode", to_string(config.mode)},
                     {"fixed_value", config.fixed_value},
                     {"learning_rate", config.learning_rate},
                     {"batch_size", config.batch_size},
                     {"total_iters", config.total_iters},
                     {"seed", config.seed},
                     {"shift_table_source", to_string(config.shift_table_source)},
                     {"embedding_dim", config.embedding_dim},
                     {"log_interval", config.log_interval},
                     {"kmeans_k", config.kmeans_k}};
}

void from_json(const nlohmann::json& j, TrainConfig& config) {
  try {
    const TrainConfig defaults;
    config.schedule = j.at("schedule").get<ScheduleConfig>();
    config.mode = train_mode_from_string(j.value("mode", std::string(to_string(defaults.mode))));
    config.fixed_value = j.value("fixed_value", defaults.fixed_value);
    config.learning_rate = j.at("learning_rate").get<double>();
    config.batch_size = j.at("batch_size").get<std::size_t>();
    config.total_iters = j.at("total_iters").get<std::int64_t>();
    config.seed = j.at("seed").get<std::int64_t>();
    config.shift_table_source = shift_source_from_string(
        j.value("shift_table_source", std::string(to_string(defaults.shift_table_source))));
    config.embedding_dim = j.value("embedding_dim", defaults.embedding_dim);
    config.log_interval = j.value("log_interval", defaults.log_interval);
    config.kmeans_k = j.value("kmeans_k", defaults.kmeans_k);
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(std::string("train config: ") + e.what());
  }
  config.validate();
}

TwoTowerModel TwoTowerModel::initialize(std::size_t d_v, std::size_t d_t, std::size_t d_emb,
                                        std::int64_t seed) {
  std::mt19937_64 rng(static_cast<std::uint64_t>(seed) ^ 0x9e3779b97f4a7c15ULL);
  auto draw = [&](std::size_t rows) {
    std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(rows)));
    Matrix w(rows, d_emb);
    for (double& v : w.values()) v = normal(rng);
    return w;
  };
  TwoTowerModel model;
  model.w_v = draw(d_v);
  model.w_t = draw(d_t);
  return model;
}

Embeddings forward(const TwoTowerModel& model, const Matrix& v_raw, const Matrix& t_raw) {
  if (v_raw.cols() != model.w_v.rows() || t_raw.cols() != model.w_t.rows())
    throw ArgumentError("forward: input dimension does not match encoder");
  if (v_raw.rows() != t_raw.rows()) throw ArgumentError("forward: batch sizes differ");
  Embeddings out;
  out.raw_v = matmul(v_raw, model.w_v);
  out.raw_t = matmul(t_raw, model.w_t);
  auto normalize = [](const Matrix& raw, const char* name) {
    Matrix unit = raw;
    for (std::size_t i = 0; i < unit.rows(); ++i) {
      auto row = unit.row(i);
      const double norm = l2_norm(row);
      if (!(norm > 0.0) || !std::isfinite(norm))
        throw NumericError(std::string(name) + " embedding row " + std::to_string(i) +
                           " has zero or non-finite norm");
      for (double& v : row) v /= norm;
    }
    return unit;
  };
  out.unit_v = normalize(out.raw_v, "visual");
  out.unit_t = normalize(out.raw_t, "text");
  return out;
}

TemperatureVector batch_temperatures(std::int64_t t, std::span<const std::size_t> batch,
                                     const ShiftTable& table, const TrainConfig& config) {
  std::vector<double> taus(batch.size());
  const double midpoint = (config.schedule.sh_minus + config.schedule.sh_plus) / 2.0;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    switch (config.mode) {
      case TrainMode::fixed:
        taus[b] = config.fixed_value;
        break;
      case TrainMode::ts_only:
        taus[b] = base_temperature(t, config.schedule) + midpoint;
        break;
      case TrainMode::ics_only: {
        if (batch[b] >= table.assignments.size())
          throw IndexError("sample " + std::to_string(batch[b]) + " missing from shift table");
        taus[b] = table.shifts[table.assignments[batch[b]]];
        break;
      }
      case TrainMode::ts_and_ics:
        taus[b] = sample_temperature(t, batch[b], table, config.schedule);
        break;
    }
  }
  return TemperatureVector(std::move(taus));
}

StepGradients compute_step(const TwoTowerModel& model, const PairedDataset& data,
                           std::span<const std::size_t> batch, std::int64_t t,
                           const ShiftTable& table, const TrainConfig& config) {
  const Matrix v_batch = data.v_raw.gather_rows(batch);
  const Matrix t_batch = data.t_raw.gather_rows(batch);
  const Embeddings emb = forward(model, v_batch, t_batch);
  const TemperatureVector taus = batch_temperatures(t, batch, table, config);
  const SimilarityMatrix sims{matmul_transpose_b(emb.unit_v, emb.unit_t), Direction::v_to_t};

  const LossResult result = config.schedule.loss_kind == LossKind::infonce
                                ? multimodal_infonce(sims, taus, config.threads)
                                : max_margin(sims, taus, config.threads);
  auto [grad_v, grad_t] = embedding_gradients(emb.raw_v, emb.raw_t, result);

  StepGradients out;
  out.stats = {result.loss, taus.min(), taus.max()};
  out.grad_w_v = matmul_transpose_a(v_batch, grad_v);
  out.grad_w_t = matmul_transpose_a(t_batch, grad_t);
  return out;
}

StepResult train_step(TwoTowerModel& model, const PairedDataset& data,
                      std::span<const std::size_t> batch, std::int64_t t, const ShiftTable& table,
                      const TrainConfig& config) {
  StepGradients step;
  try {
    step = compute_step(model, data, batch, t, table, config);
  } catch (const NumericError& e) {
    throw DivergenceError(t, e.what());
  }
  if (!std::isfinite(step.stats.loss)) throw DivergenceError(t, "non-finite loss");
  if (config.learning_rate == 0.0) return step.stats;

  auto apply = [&](Matrix& w, const Matrix& g) {
    auto wv = w.values();
    const auto gv = g.values();
    for (std::size_t i = 0; i < wv.size(); ++i) wv[i] -= config.learning_rate * gv[i];
  };
  apply(model.w_v, step.grad_w_v);
  apply(model.w_t, step.grad_w_t);
  if (!model.w_v.all_finite() || !model.w_t.all_finite())
    throw DivergenceError(t, "non-finite weights after update");
  return step.stats;
}

ShiftTable make_shift_table(const PairedDataset& data, const TrainConfig& config) {
  const auto& s = config.schedule;
  if (config.shift_table_source == ShiftSource::oracle_labels)
    return shift_table_from_sizes(data.sizes, data.labels, s.sh_minus, s.sh_plus, config.seed);

  KMeansOptions options;
  options.k = config.kmeans_k != 0 ? config.kmeans_k : data.sizes.size();
  options.seed = config.seed;
  options.threads = config.threads;
  const EmbeddingMatrix text(data.t_raw);
  const KMeansModel model = kmeans_fit(text, options);
  return build_shift_table(model, text, s.sh_minus, s.sh_plus);
}

std::vector<std::size_t> sample_batch(std::size_t n, std::size_t batch_size,
                                      std::mt19937_64& rng) {
  if (batch_size > n) throw ArgumentError("batch_size exceeds dataset size");
  // Partial Fisher-Yates over a fresh identity permutation.
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < batch_size; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng() % (n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(batch_size);
  return pool;
}

TrainResult train(const PairedDataset& data, const ShiftTable& table, const TrainConfig& config) {
  config.validate();
  if (config.batch_size > data.count())
    throw ArgumentError("batch_size " + std::to_string(config.batch_size) +
                        " exceeds dataset size " + std::to_string(data.count()));
  if (config.mode == TrainMode::ics_only || config.mode == TrainMode::ts_and_ics) {
    if (table.assignments.size() != data.count())
      throw ArgumentError("shift table covers " + std::to_string(table.assignments.size()) +
                          " samples, dataset has " + std::to_string(data.count()));
  }

  TrainResult result{TwoTowerModel::initialize(data.v_raw.cols(), data.t_raw.cols(),
                                               config.embedding_dim, config.seed),
                     {}};
  std::mt19937_64 rng(static_cast<std::uint64_t>(config.seed));
  for (std::int64_t t = 0; t < config.total_iters; ++t) {
    const auto batch = sample_batch(data.count(), config.batch_size, rng);
    const StepResult step = train_step(result.model, data, batch, t, table, config);
    if (t % config.log_interval == 0 || t + 1 == config.total_iters)
      result.log.push_back({t, step.loss, step.tau_min, step.tau_max});
  }
  return result;
}

}  // namespace mmts
