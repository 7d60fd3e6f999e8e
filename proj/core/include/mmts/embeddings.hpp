#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "mmts/matrix.hpp"

namespace mmts {

// n x d matrix of finite reals, one row per sample of a single modality.
// Construction rejects empty shapes and non-finite entries.
class EmbeddingMatrix {
 public:
  explicit EmbeddingMatrix(Matrix values);
  EmbeddingMatrix(std::size_t n, std::size_t d, std::vector<double> values);

  std::size_t count() const noexcept { return values_.rows(); }
  std::size_t dim() const noexcept { return values_.cols(); }
  std::span<const double> row(std::size_t i) const { return values_.row(i); }
  const Matrix& matrix() const noexcept { return values_; }

  // Copy with every row scaled to unit L2 norm. Zero rows stay zero.
  EmbeddingMatrix normalized() const;

  friend bool operator==(const EmbeddingMatrix&, const EmbeddingMatrix&) = default;

 private:
  Matrix values_;
};

// MME container: "MMTS" magic, u32 version (1), u64 n, u64 d, then n*d
// little-endian f32 values in row-major order. Nothing may follow the payload.
inline constexpr std::uint32_t kMmeVersion = 1;
inline constexpr std::size_t kMmeHeaderBytes = 4 + 4 + 8 + 8;

EmbeddingMatrix decode_mme(std::span<const std::byte> bytes);
std::vector<std::byte> encode_mme(const Matrix& values);

EmbeddingMatrix load_embeddings(const std::filesystem::path& path);
void save_embeddings(const std::filesystem::path& path, const Matrix& values);

}  // namespace mmts
