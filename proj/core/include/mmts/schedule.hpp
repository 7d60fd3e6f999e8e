#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace mmts {

enum class LossKind { infonce, max_margin };

std::string_view to_string(LossKind kind);
LossKind loss_kind_from_string(std::string_view name);

// Cosine amplitude, period and cluster-shift bounds. The same numbers act as
// temperatures for InfoNCE and as margins for the max-margin loss.
struct ScheduleConfig {
  double alpha = 0.04;
  std::int64_t period = 1000;
  double sh_minus = 0.05;
  double sh_plus = 0.10;
  LossKind loss_kind = LossKind::infonce;

  // Throws ArgumentError unless sh_minus <= sh_plus, sh_minus - alpha/2 > 0,
  // alpha >= 0 and period >= 1.
  void validate() const;

  friend bool operator==(const ScheduleConfig&, const ScheduleConfig&) = default;
};

void to_json(nlohmann::json& j, const ScheduleConfig& config);
void from_json(const nlohmann::json& j, ScheduleConfig& config);

// Frozen per-cluster shifts computed once before training.
struct ShiftTable {
  std::size_t k = 0;
  std::vector<std::int64_t> sizes;
  std::vector<double> shifts;
  std::vector<std::size_t> assignments;
  double sh_minus = 0.0;
  double sh_plus = 0.0;
  std::int64_t seed = 0;

  // Checks the shift-range, endpoint and assignment-range invariants.
  void validate() const;

  friend bool operator==(const ShiftTable&, const ShiftTable&) = default;
};

void to_json(nlohmann::json& j, const ShiftTable& table);
void from_json(const nlohmann::json& j, ShiftTable& table);

// Min-max affine map from cluster size to shift. Equal min and max sizes
// collapse to the midpoint of the bounds.
double cluster_shift(std::int64_t size, std::int64_t min_size, std::int64_t max_size,
                     double sh_minus, double sh_plus);

// alpha * cos(2 pi t / T) / 2. The phase is reduced modulo T in integers
// first, so the value is exactly periodic.
double base_temperature(std::int64_t t, const ScheduleConfig& config);

double sample_temperature(std::int64_t t, std::size_t sample_index, const ShiftTable& table,
                          const ScheduleConfig& config);

// Builds a table from known cluster sizes and per-sample labels.
ShiftTable shift_table_from_sizes(std::vector<std::int64_t> sizes,
                                  std::vector<std::size_t> assignments, double sh_minus,
                                  double sh_plus, std::int64_t seed = 0);

struct ScheduleRow {
  std::int64_t t;
  std::size_t cluster;
  double temperature;
};

std::vector<ScheduleRow> schedule_dump(const ShiftTable& table, const ScheduleConfig& config,
                                       std::int64_t iters);

// Header "t\tcluster\ttemperature", temperatures with 9 significant digits.
void write_schedule_tsv(std::ostream& out, const std::vector<ScheduleRow>& rows);

}  // namespace mmts
