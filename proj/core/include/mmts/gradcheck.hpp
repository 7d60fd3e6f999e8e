#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mmts/matrix.hpp"
#include "mmts/schedule.hpp"

namespace mmts {

// Central differences of a scalar function of a matrix, one entry at a time.
Matrix central_difference(const std::function<double(const Matrix&)>& f, const Matrix& at,
                          double step);

// max|a - b| / max(max|a|, max|b|), with a tiny floor for all-zero inputs.
double relative_error(const Matrix& analytic, const Matrix& numeric);

struct GradCheckOptions {
  std::size_t trials = 100;
  std::int64_t seed = 0;
  double step = 1e-5;
  double tolerance = 1e-4;
  std::size_t max_batch = 16;
  std::size_t max_dim = 8;
  // Max-margin instances are redrawn until every hinge argument is at least
  // this far from zero.
  double kink_clearance = 1e-3;
};

struct GradCheckTrial {
  std::size_t index = 0;
  LossKind loss = LossKind::infonce;
  std::size_t batch = 0;
  std::size_t dim = 0;
  double similarity_error = 0.0;
  double embedding_error = 0.0;
  // Largest |sum_j dL/ds_ij| over rows; only meaningful for InfoNCE.
  double max_row_sum = 0.0;
  bool passed = false;
};

struct GradCheckReport {
  std::vector<GradCheckTrial> trials;
  double max_error = 0.0;
  bool all_passed = true;
};

// Runs `trials` random instances for each loss kind.
GradCheckReport run_gradcheck(const GradCheckOptions& options);

void to_json(nlohmann::json& j, const GradCheckTrial& trial);
void to_json(nlohmann::json& j, const GradCheckReport& report);

}  // namespace mmts
