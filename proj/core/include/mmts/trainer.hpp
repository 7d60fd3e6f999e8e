#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mmts/loss.hpp"
#include "mmts/matrix.hpp"
#include "mmts/schedule.hpp"
#include "mmts/synthdata.hpp"

namespace mmts {

// Linear two-tower encoder: e_v = x_v W_v, e_t = x_t W_t, then L2 normalize.
struct TwoTowerModel {
  Matrix w_v;  // d_v x d_emb
  Matrix w_t;  // d_t x d_emb

  std::size_t embedding_dim() const noexcept { return w_v.cols(); }
  static TwoTowerModel initialize(std::size_t d_v, std::size_t d_t, std::size_t d_emb,
                                  std::int64_t seed);

  friend bool operator==(const TwoTowerModel&, const TwoTowerModel&) = default;
};

// fixed: constant; ts_only: cosine + midpoint shift; ics_only: cluster shift
// only; ts_and_ics: cosine + cluster shift.
enum class TrainMode { fixed, ts_only, ics_only, ts_and_ics };

std::string_view to_string(TrainMode mode);
TrainMode train_mode_from_string(std::string_view name);

enum class ShiftSource { oracle_labels, kmeans_on_text_view };

std::string_view to_string(ShiftSource source);
ShiftSource shift_source_from_string(std::string_view name);

struct TrainConfig {
  ScheduleConfig schedule;
  TrainMode mode = TrainMode::ts_and_ics;
  // Temperature (InfoNCE) or margin (max-margin) for TrainMode::fixed.
  double fixed_value = 0.01;
  double learning_rate = 0.1;
  std::size_t batch_size = 64;
  std::int64_t total_iters = 2000;
  std::int64_t seed = 0;
  ShiftSource shift_table_source = ShiftSource::oracle_labels;
  std::size_t embedding_dim = 16;
  std::int64_t log_interval = 100;
  std::size_t kmeans_k = 0;  // 0: use the dataset's cluster count
  unsigned threads = 1;

  void validate() const;
};

void to_json(nlohmann::json& j, const TrainConfig& config);
void from_json(const nlohmann::json& j, TrainConfig& config);

struct Embeddings {
  Matrix raw_v;
  Matrix raw_t;
  Matrix unit_v;
  Matrix unit_t;
};

// Linear map then row normalization; throws NumericError on zero rows.
Embeddings forward(const TwoTowerModel& model, const Matrix& v_raw, const Matrix& t_raw);

// Per-anchor temperatures or margins for the samples in `batch` at step t.
TemperatureVector batch_temperatures(std::int64_t t, std::span<const std::size_t> batch,
                                     const ShiftTable& table, const TrainConfig& config);

struct StepResult {
  double loss = 0.0;
  double tau_min = 0.0;
  double tau_max = 0.0;
};

// Loss, gradients w.r.t. both weight matrices, and the batch temperatures
// for one step; does not modify the model.
struct StepGradients {
  StepResult stats;
  Matrix grad_w_v;
  Matrix grad_w_t;
};

StepGradients compute_step(const TwoTowerModel& model, const PairedDataset& data,
                           std::span<const std::size_t> batch, std::int64_t t,
                           const ShiftTable& table, const TrainConfig& config);

// One plain SGD step. Throws DivergenceError on a non-finite loss or weights.
StepResult train_step(TwoTowerModel& model, const PairedDataset& data,
                      std::span<const std::size_t> batch, std::int64_t t, const ShiftTable& table,
                      const TrainConfig& config);

struct LogRow {
  std::int64_t iter;
  double loss;
  double tau_min;
  double tau_max;
};

struct TrainResult {
  TwoTowerModel model;
  std::vector<LogRow> log;
};

// Shift table for training, per config.shift_table_source.
ShiftTable make_shift_table(const PairedDataset& data, const TrainConfig& config);

TrainResult train(const PairedDataset& data, const ShiftTable& table, const TrainConfig& config);

// Draws batch_size distinct indices from [0, n).
std::vector<std::size_t> sample_batch(std::size_t n, std::size_t batch_size,
                                      std::mt19937_64& rng);

}  // namespace mmts
