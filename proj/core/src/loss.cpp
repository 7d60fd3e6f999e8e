#include "mmts/loss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "mmts/errors.hpp"
#include "mmts/parallel.hpp"

namespace mmts {
namespace {

constexpr double kUnitTolerance = 1e-6;

void require_square(const SimilarityMatrix& s, std::size_t expected, const char* what) {
  if (s.values.rows() != s.values.cols())
    throw ArgumentError("similarity matrix must be square");
  if (expected != s.values.rows()) {
    throw ArgumentError(std::string(what) + " has length " + std::to_string(expected) +
                        ", batch size is " + std::to_string(s.values.rows()));
  }
}

void check_unit_rows(const Matrix& m, const char* name) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    if (std::abs(l2_norm(m.row(i)) - 1.0) > kUnitTolerance) {
      throw ValidationError(std::string(name) + " row " + std::to_string(i) +
                            " is not unit-norm");
    }
  }
}

}  // namespace

SimilarityMatrix SimilarityMatrix::transposed() const {
  return {values.transposed(),
          direction == Direction::v_to_t ? Direction::t_to_v : Direction::v_to_t};
}

TemperatureVector::TemperatureVector(std::vector<double> taus) : taus_(std::move(taus)) {
  for (std::size_t i = 0; i < taus_.size(); ++i) {
    if (!(taus_[i] > 0.0) || !std::isfinite(taus_[i]))
      throw DomainError("temperature/margin " + std::to_string(i) + " must be positive");
  }
}

TemperatureVector TemperatureVector::constant(std::size_t n, double tau) {
  return TemperatureVector(std::vector<double>(n, tau));
}

double TemperatureVector::min() const {
  if (taus_.empty()) throw ArgumentError("empty temperature vector");
  return *std::min_element(taus_.begin(), taus_.end());
}

double TemperatureVector::max() const {
  if (taus_.empty()) throw ArgumentError("empty temperature vector");
  return *std::max_element(taus_.begin(), taus_.end());
}

SimilarityMatrix similarity_matrix(const Matrix& v_unit, const Matrix& t_unit) {
  if (v_unit.rows() != t_unit.rows() || v_unit.cols() != t_unit.cols())
    throw ArgumentError("similarity_matrix: v and t must have matching N and d");
  check_unit_rows(v_unit, "v");
  check_unit_rows(t_unit, "t");
  return {matmul_transpose_b(v_unit, t_unit), Direction::v_to_t};
}

SimilarityMatrix similarity_matrix(const EmbeddingMatrix& v, const EmbeddingMatrix& t) {
  return similarity_matrix(v.matrix(), t.matrix());
}

LossResult infonce(const SimilarityMatrix& similarities, const TemperatureVector& taus,
                   unsigned threads) {
  const std::size_t n = similarities.size();
  require_square(similarities, taus.size(), "taus");
  if (n == 0) throw ArgumentError("infonce needs N >= 1");

  LossResult result{0.0, Matrix(n, n), Matrix(n, n)};
  std::vector<double> row_loss(n);
  const double inv_n = 1.0 / static_cast<double>(n);

  parallel_for(n, threads, [&](std::size_t i) {
    const double tau = taus[i];
    const auto s = similarities.values.row(i);
    double peak = -std::numeric_limits<double>::infinity();
    for (double v : s) peak = std::max(peak, v / tau);
    double denom = 0.0;
    for (double v : s) denom += std::exp(v / tau - peak);
    const double log_z = peak + std::log(denom);
    row_loss[i] = log_z - s[i] / tau;

    auto grad = result.grad_similarities.row(i);
    auto contrib = result.per_negative_contributions.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      const double p = std::exp(s[j] / tau - log_z);
      grad[j] = (p - (j == i ? 1.0 : 0.0)) * inv_n / tau;
      contrib[j] = j == i ? 0.0 : p;
    }
  });

  // Fixed-order reduction keeps results independent of the thread count.
  double total = 0.0;
  for (double v : row_loss) total += v;
  result.loss = total * inv_n;
  return result;
}

LossResult multimodal_infonce(const SimilarityMatrix& similarities, const TemperatureVector& taus,
                              unsigned threads) {
  const LossResult forward = infonce(similarities, taus, threads);
  const LossResult backward = infonce(similarities.transposed(), taus, threads);
  const std::size_t n = similarities.size();

  LossResult result{0.5 * (forward.loss + backward.loss), Matrix(n, n),
                    forward.per_negative_contributions};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      result.grad_similarities(i, j) =
          0.5 * (forward.grad_similarities(i, j) + backward.grad_similarities(j, i));
  return result;
}

LossResult max_margin(const SimilarityMatrix& similarities, const TemperatureVector& margins,
                      unsigned threads) {
  const std::size_t n = similarities.size();
  require_square(similarities, margins.size(), "margins");
  if (n == 0) throw ArgumentError("max_margin needs N >= 1");

  LossResult result{0.0, Matrix(n, n), Matrix(n, n)};
  if (n == 1) return result;

  const Matrix& s = similarities.values;
  const double scale = 1.0 / (2.0 * static_cast<double>(n) * static_cast<double>(n - 1));

  // Each anchor row owns its hinge sums and activity counts; the scatter into
  // column i of other rows (text->visual direction) happens serially below.
  std::vector<double> row_loss(n);
  Matrix active_t2v(n, n);
  parallel_for(n, threads, [&](std::size_t i) {
    const double positive = s(i, i);
    const double m = margins[i];
    double sum = 0.0;
    double diag_grad = 0.0;
    auto grad = result.grad_similarities.row(i);
    auto contrib = result.per_negative_contributions.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double v2t = s(i, j) - positive + m;
      if (v2t > 0.0) {
        sum += v2t;
        grad[j] += scale;
        diag_grad -= scale;
        contrib[j] = v2t;
      }
      const double t2v = s(j, i) - positive + m;
      if (t2v > 0.0) {
        sum += t2v;
        active_t2v(i, j) = 1.0;
        diag_grad -= scale;
      }
    }
    grad[i] += diag_grad;
    row_loss[i] = sum;
  });

  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (active_t2v(i, j) != 0.0) result.grad_similarities(j, i) += scale;

  double total = 0.0;
  for (double v : row_loss) total += v;
  result.loss = total * scale;
  return result;
}

std::pair<Matrix, Matrix> embedding_gradients(const Matrix& v_raw, const Matrix& t_raw,
                                              const LossResult& result) {
  const std::size_t n = v_raw.rows();
  const Matrix& g = result.grad_similarities;
  if (t_raw.rows() != n || v_raw.cols() != t_raw.cols() || g.rows() != n || g.cols() != n)
    throw ArgumentError("embedding_gradients: shape mismatch");

  auto normalize = [](const Matrix& raw, std::vector<double>& norms) {
    Matrix unit = raw;
    norms.resize(raw.rows());
    for (std::size_t i = 0; i < raw.rows(); ++i) {
      norms[i] = l2_norm(raw.row(i));
      if (!(norms[i] > 0.0)) throw NumericError("zero-norm embedding row " + std::to_string(i));
      for (double& x : unit.row(i)) x /= norms[i];
    }
    return unit;
  };
  std::vector<double> v_norms;
  std::vector<double> t_norms;
  const Matrix v_unit = normalize(v_raw, v_norms);
  const Matrix t_unit = normalize(t_raw, t_norms);

  // dL/du = G W, dL/dw = G^T U.
  Matrix grad_v = matmul(g, t_unit);
  Matrix grad_t = matmul_transpose_a(g, v_unit);

  // (I - u u^T) / ||x|| projects out the radial component.
  auto project = [](Matrix& grad, const Matrix& unit, const std::vector<double>& norms) {
    for (std::size_t i = 0; i < grad.rows(); ++i) {
      auto row = grad.row(i);
      const auto u = unit.row(i);
      const double radial = dot(row, u);
      for (std::size_t j = 0; j < row.size(); ++j) row[j] = (row[j] - radial * u[j]) / norms[i];
    }
  };
  project(grad_v, v_unit, v_norms);
  project(grad_t, t_unit, t_norms);
  return {std::move(grad_v), std::move(grad_t)};
}

std::vector<ContributionPoint> negative_contribution_profile(const SimilarityMatrix& similarities,
                                                             double tau, std::size_t anchor) {
  if (!(tau > 0.0)) throw DomainError("temperature must be positive");
  const std::size_t n = similarities.size();
  if (anchor >= n) throw IndexError("anchor " + std::to_string(anchor) + " out of range");
  if (similarities.values.cols() != n) throw ArgumentError("similarity matrix must be square");

  const auto s = similarities.values.row(anchor);
  double peak = -std::numeric_limits<double>::infinity();
  for (double v : s) peak = std::max(peak, v / tau);
  double denom = 0.0;
  for (double v : s) denom += std::exp(v / tau - peak);
  const double log_z = peak + std::log(denom);

  std::vector<ContributionPoint> profile;
  profile.reserve(n - 1);
  for (std::size_t j = 0; j < n; ++j) {
    if (j == anchor) continue;
    profile.push_back({j, s[j], std::exp(s[j] / tau - log_z)});
  }
  std::stable_sort(profile.begin(), profile.end(),
                   [](const auto& a, const auto& b) { return a.similarity > b.similarity; });
  return profile;
}

double contribution_entropy(const std::vector<ContributionPoint>& profile) {
  double mass = 0.0;
  for (const auto& p : profile) mass += p.contribution;
  if (!(mass > 0.0)) return 0.0;
  double entropy = 0.0;
  for (const auto& p : profile) {
    const double q = p.contribution / mass;
    if (q > 0.0) entropy -= q * std::log(q);
  }
  return entropy;
}

}  // namespace mmts
