#include "mmts/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <nlohmann/json.hpp>

#include "mmts/loss.hpp"

namespace mmts {
namespace {

Matrix normalize_rows(const Matrix& raw) {
  Matrix unit = raw;
  for (std::size_t i = 0; i < unit.rows(); ++i) {
    auto row = unit.row(i);
    const double norm = l2_norm(row);
    for (double& v : row) v /= norm;
  }
  return unit;
}

LossResult evaluate_loss(LossKind kind, const SimilarityMatrix& s, const TemperatureVector& taus) {
  return kind == LossKind::infonce ? multimodal_infonce(s, taus) : max_margin(s, taus);
}

double max_abs(const Matrix& m) {
  double worst = 0.0;
  for (double v : m.values()) worst = std::max(worst, std::abs(v));
  return worst;
}

bool clear_of_kinks(const Matrix& s, const TemperatureVector& margins, double clearance) {
  const std::size_t n = s.rows();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      if (std::abs(s(i, j) - s(i, i) + margins[i]) < clearance) return false;
      if (std::abs(s(j, i) - s(i, i) + margins[i]) < clearance) return false;
    }
  return true;
}

}  // namespace

Matrix central_difference(const std::function<double(const Matrix&)>& f, const Matrix& at,
                          double step) {
  Matrix grad(at.rows(), at.cols());
  Matrix probe = at;
  for (std::size_t i = 0; i < at.size(); ++i) {
    const double original = probe.values()[i];
    probe.values()[i] = original + step;
    const double up = f(probe);
    probe.values()[i] = original - step;
    const double down = f(probe);
    probe.values()[i] = original;
    grad.values()[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

double relative_error(const Matrix& analytic, const Matrix& numeric) {
  const double scale = std::max({max_abs(analytic), max_abs(numeric), 1e-12});
  return max_abs_diff(analytic, numeric) / scale;
}

GradCheckReport run_gradcheck(const GradCheckOptions& options) {
  GradCheckReport report;
  std::mt19937_64 rng(static_cast<std::uint64_t>(options.seed));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> batch_dist(2, std::max<std::size_t>(2, options.max_batch));
  std::uniform_int_distribution<std::size_t> dim_dist(2, std::max<std::size_t>(2, options.max_dim));
  std::uniform_real_distribution<double> tau_dist(0.05, 1.0);
  std::uniform_real_distribution<double> margin_dist(0.05, 0.5);

  std::size_t index = 0;
  for (LossKind kind : {LossKind::infonce, LossKind::max_margin}) {
    for (std::size_t trial = 0; trial < options.trials; ++trial, ++index) {
      const std::size_t n = batch_dist(rng);
      const std::size_t d = dim_dist(rng);
      Matrix v_raw(n, d);
      Matrix t_raw(n, d);
      std::vector<double> taus(n);
      SimilarityMatrix sims;
      for (;;) {
        for (double& x : v_raw.values()) x = normal(rng);
        for (double& x : t_raw.values()) x = normal(rng);
        for (double& x : taus) x = kind == LossKind::infonce ? tau_dist(rng) : margin_dist(rng);
        sims = similarity_matrix(normalize_rows(v_raw), normalize_rows(t_raw));
        if (kind == LossKind::infonce ||
            clear_of_kinks(sims.values, TemperatureVector(taus), options.kink_clearance))
          break;
      }
      const TemperatureVector tv(taus);
      const LossResult result = evaluate_loss(kind, sims, tv);

      const Matrix numeric_sims = central_difference(
          [&](const Matrix& s) { return evaluate_loss(kind, {s, Direction::v_to_t}, tv).loss; },
          sims.values, options.step);

      const auto [grad_v, grad_t] = embedding_gradients(v_raw, t_raw, result);
      auto loss_from_raw = [&](const Matrix& v, const Matrix& t) {
        const SimilarityMatrix s{matmul_transpose_b(normalize_rows(v), normalize_rows(t)),
                                 Direction::v_to_t};
        return evaluate_loss(kind, s, tv).loss;
      };
      const Matrix numeric_v = central_difference(
          [&](const Matrix& v) { return loss_from_raw(v, t_raw); }, v_raw, options.step);
      const Matrix numeric_t = central_difference(
          [&](const Matrix& t) { return loss_from_raw(v_raw, t); }, t_raw, options.step);

      GradCheckTrial out;
      out.index = index;
      out.loss = kind;
      out.batch = n;
      out.dim = d;
      out.similarity_error = relative_error(result.grad_similarities, numeric_sims);
      out.embedding_error =
          std::max(relative_error(grad_v, numeric_v), relative_error(grad_t, numeric_t));
      if (kind == LossKind::infonce) {
        // The softmax identity holds per direction, not for the symmetric sum.
        const LossResult forward = infonce(sims, tv);
        for (std::size_t i = 0; i < n; ++i) {
          double row = 0.0;
          for (double g : forward.grad_similarities.row(i)) row += g;
          out.max_row_sum = std::max(out.max_row_sum, std::abs(row));
        }
      }
      out.passed = out.similarity_error < options.tolerance &&
                   out.embedding_error < options.tolerance &&
                   (kind != LossKind::infonce || out.max_row_sum < 1e-9);
      report.max_error = std::max({report.max_error, out.similarity_error, out.embedding_error});
      report.all_passed = report.all_passed && out.passed;
      report.trials.push_back(out);
    }
  }
  return report;
}

void to_json(nlohmann::json& j, const GradCheckTrial& trial) {
  j = nlohmann::json{{"index", trial.index},
                     {"loss", to_string(trial.loss)},
                     {"batch", trial.batch},
                     {"dim", trial.dim},
                     {"similarity_error", trial.similarity_error},
                     {"embedding_error", trial.embedding_error},
                     {"max_row_sum", trial.max_row_sum},
                     {"passed", trial.passed}};
}

void to_json(nlohmann::json& j, const GradCheckReport& report) {
  j = nlohmann::json{{"trials", report.trials},
                     {"max_error", report.max_error},
                     {"all_passed", report.all_passed}};
}

}  // namespace mmts
