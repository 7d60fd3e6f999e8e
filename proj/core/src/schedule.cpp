#include "mmts/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "mmts/errors.hpp"

namespace mmts {

std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::infonce:
      return "infonce";
    case LossKind::max_margin:
      return "max_margin";
  }
  return "infonce";
}

LossKind loss_kind_from_string(std::string_view name) {
  if (name == "infonce") return LossKind::infonce;
  if (name == "max_margin") return LossKind::max_margin;
  throw ArgumentError("unknown loss kind '" + std::string(name) + "'");
}

void ScheduleConfig::validate() const {
  if (!std::isfinite(alpha) || alpha < 0.0) throw ArgumentError("alpha must be >= 0");
  if (period < 1) throw ArgumentError("period must be >= 1");
  if (!std::isfinite(sh_minus) || !std::isfinite(sh_plus) || sh_minus > sh_plus)
    throw ArgumentError("sh_minus must be <= sh_plus");
  if (!(sh_minus - alpha / 2.0 > 0.0))
    throw ArgumentError("sh_minus - alpha/2 must be positive so every temperature is > 0");
}

void to_json(nlohmann::json& j, const ScheduleConfig& config) {
  j = nlohmann::json{{"alpha", config.alpha},
                     {"period", config.period},
                     {"sh_minus", config.sh_minus},
                     {"sh_plus", config.sh_plus},
                     {"loss_kind", to_string(config.loss_kind)}};
}

void from_json(const nlohmann::json& j, ScheduleConfig& config) {
  try {
    config.alpha = j.at("alpha").get<double>();
    config.period = j.at("period").get<std::int64_t>();
    config.sh_minus = j.at("sh_minus").get<double>();
    config.sh_plus = j.at("sh_plus").get<double>();
    config.loss_kind = loss_kind_from_string(j.value("loss_kind", std::string("infonce")));
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(std::string("schedule config: ") + e.what());
  }
  config.validate();
}

void ShiftTable::validate() const {
  if (sizes.size() != k || shifts.size() != k)
    throw ValidationError("shift table: sizes/shifts length must equal k");
  for (double s : shifts) {
    if (!(s >= sh_minus && s <= sh_plus))
      throw ValidationError("shift table: shift outside [sh_minus, sh_plus]");
  }
  for (std::size_t a : assignments) {
    if (a >= k) throw ValidationError("shift table: assignment index >= k");
  }
  if (k > 0) {
    const auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
    if (*hi > *lo) {
      if (shifts[static_cast<std::size_t>(hi - sizes.begin())] != sh_plus ||
          shifts[static_cast<std::size_t>(lo - sizes.begin())] != sh_minus)
        throw ValidationError("shift table: extreme clusters must map to sh_plus/sh_minus");
    }
  }
}

void to_json(nlohmann::json& j, const ShiftTable& table) {
  j = nlohmann::json{{"k", table.k},
                     {"sizes", table.sizes},
                     {"shifts", table.shifts},
                     {"assignments", table.assignments},
                     {"sh_minus", table.sh_minus},
                     {"sh_plus", table.sh_plus},
                     {"seed", table.seed}};
}

void from_json(const nlohmann::json& j, ShiftTable& table) {
  try {
    table.k = j.at("k").get<std::size_t>();
    table.sizes = j.at("sizes").get<std::vector<std::int64_t>>();
    table.shifts = j.at("shifts").get<std::vector<double>>();
    table.assignments = j.at("assignments").get<std::vector<std::size_t>>();
    table.sh_minus = j.at("sh_minus").get<double>();
    table.sh_plus = j.at("sh_plus").get<double>();
    table.seed = j.value("seed", std::int64_t{0});
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(std::string("shift table: ") + e.what());
  }
  table.validate();
}

double cluster_shift(std::int64_t size, std::int64_t min_size, std::int64_t max_size,
                     double sh_minus, double sh_plus) {
  if (min_size < 0 || size < min_size || size > max_size) {
    throw DomainError("cluster size " + std::to_string(size) + " outside [" +
                      std::to_string(min_size) + ", " + std::to_string(max_size) + "]");
  }
  if (max_size == min_size) return (sh_plus + sh_minus) / 2.0;
  // Endpoints are returned verbatim so the largest/smallest cluster hit the
  // bounds bit-exactly.
  if (size == max_size) return sh_plus;
  if (size == min_size) return sh_minus;
  const double fraction =
      static_cast<double>(size - min_size) / static_cast<double>(max_size - min_size);
  return fraction * (sh_plus - sh_minus) + sh_minus;
}

double base_temperature(std::int64_t t, const ScheduleConfig& config) {
  if (config.period < 1) throw ArgumentError("period must be >= 1");
  std::int64_t phase = t % config.period;
  if (phase < 0) phase += config.period;
  const double angle =
      2.0 * std::numbers::pi * static_cast<double>(phase) / static_cast<double>(config.period);
  return config.alpha * std::cos(angle) / 2.0;
}

double sample_temperature(std::int64_t t, std::size_t sample_index, const ShiftTable& table,
                          const ScheduleConfig& config) {
  if (sample_index >= table.assignments.size()) {
    throw IndexError("sample index " + std::to_string(sample_index) + " out of range for " +
                     std::to_string(table.assignments.size()) + " samples");
  }
  const std::size_t cluster = table.assignments[sample_index];
  if (cluster >= table.shifts.size()) throw IndexError("assignment refers to missing cluster");
  return base_temperature(t, config) + table.shifts[cluster];
}

ShiftTable shift_table_from_sizes(std::vector<std::int64_t> sizes,
                                  std::vector<std::size_t> assignments, double sh_minus,
                                  double sh_plus, std::int64_t seed) {
  if (sh_minus > sh_plus) throw ArgumentError("sh_minus must be <= sh_plus");
  if (sizes.empty()) throw ArgumentError("shift table needs at least one cluster");
  ShiftTable table;
  table.k = sizes.size();
  table.sh_minus = sh_minus;
  table.sh_plus = sh_plus;
  table.seed = seed;
  const auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
  table.shifts.reserve(sizes.size());
  for (std::int64_t s : sizes) table.shifts.push_back(cluster_shift(s, *lo, *hi, sh_minus, sh_plus));
  table.sizes = std::move(sizes);
  table.assignments = std::move(assignments);
  table.validate();
  return table;
}

std::vector<ScheduleRow> schedule_dump(const ShiftTable& table, const ScheduleConfig& config,
                                       std::int64_t iters) {
  if (iters < 1) throw ArgumentError("iters must be >= 1");
  std::vector<ScheduleRow> rows;
  rows.reserve(static_cast<std::size_t>(iters) * table.k);
  for (std::int64_t t = 0; t < iters; ++t) {
    const double base = base_temperature(t, config);
    for (std::size_t c = 0; c < table.k; ++c) rows.push_back({t, c, base + table.shifts[c]});
  }
  return rows;
}

void write_schedule_tsv(std::ostream& out, const std::vector<ScheduleRow>& rows) {
  out << "t\tcluster\ttemperature\n";
  char buf[64];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof(buf), "%.9g", row.temperature);
    out << row.t << '\t' << row.cluster << '\t' << buf << '\n';
  }
}

}  // namespace mmts
