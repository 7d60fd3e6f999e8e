#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "mmts/embeddings.hpp"
#include "mmts/matrix.hpp"

namespace mmts {

enum class Direction { v_to_t, t_to_v };

// Cross-modal similarity scores; the diagonal holds the positive pairs.
struct SimilarityMatrix {
  Matrix values;
  Direction direction = Direction::v_to_t;

  std::size_t size() const noexcept { return values.rows(); }
  SimilarityMatrix transposed() const;
};

// One strictly positive value per anchor: a temperature for InfoNCE or a
// margin for max-margin.
class TemperatureVector {
 public:
  TemperatureVector() = default;
  explicit TemperatureVector(std::vector<double> taus);
  static TemperatureVector constant(std::size_t n, double tau);

  std::size_t size() const noexcept { return taus_.size(); }
  double operator[](std::size_t i) const { return taus_[i]; }
  const std::vector<double>& values() const noexcept { return taus_; }
  double min() const;
  double max() const;

 private:
  std::vector<double> taus_;
};

struct LossResult {
  double loss = 0.0;
  // d loss / d s_ij in v_to_t coordinates.
  Matrix grad_similarities;
  // Softmax mass (InfoNCE) or active hinge value (max-margin) of each
  // negative; zero on the diagonal.
  Matrix per_negative_contributions;
};

// Rows of both inputs must be unit-norm within 1e-6.
SimilarityMatrix similarity_matrix(const EmbeddingMatrix& v, const EmbeddingMatrix& t);
SimilarityMatrix similarity_matrix(const Matrix& v_unit, const Matrix& t_unit);

// Single-direction InfoNCE; row i is a softmax at temperature taus[i].
LossResult infonce(const SimilarityMatrix& similarities, const TemperatureVector& taus,
                   unsigned threads = 1);

// Average of both retrieval directions, gradient expressed in the
// coordinates of the input matrix.
LossResult multimodal_infonce(const SimilarityMatrix& similarities, const TemperatureVector& taus,
                              unsigned threads = 1);

// Bidirectional hinge averaged over all 2N(N-1) ordered negatives; anchor i
// uses margins[i] in both directions. Subgradient at the kink is 0.
LossResult max_margin(const SimilarityMatrix& similarities, const TemperatureVector& margins,
                      unsigned threads = 1);

// Chain rule from d loss / d S back to the raw rows through the dot product
// and per-row L2 normalization.
std::pair<Matrix, Matrix> embedding_gradients(const Matrix& v_raw, const Matrix& t_raw,
                                              const LossResult& result);

struct ContributionPoint {
  std::size_t gallery_index;
  double similarity;
  double contribution;
};

// Negatives of `anchor`, sorted by similarity descending (ties by index),
// with their softmax probability at temperature tau.
std::vector<ContributionPoint> negative_contribution_profile(const SimilarityMatrix& similarities,
                                                             double tau, std::size_t anchor);

// Shannon entropy (nats) of the contributions renormalized over negatives.
double contribution_entropy(const std::vector<ContributionPoint>& profile);

}  // namespace mmts
