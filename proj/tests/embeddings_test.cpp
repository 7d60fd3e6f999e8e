#include "mmts/embeddings.hpp"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "mmts/errors.hpp"

namespace mmts {
namespace {

std::vector<std::byte> header(std::uint64_t n, std::uint64_t d, const char* magic = "MMTS",
                              std::uint32_t version = 1) {
  std::vector<std::byte> out(kMmeHeaderBytes);
  std::memcpy(out.data(), magic, 4);
  std::memcpy(out.data() + 4, &version, 4);
  std::memcpy(out.data() + 8, &n, 8);
  std::memcpy(out.data() + 16, &d, 8);
  return out;
}

void append_floats(std::vector<std::byte>& out, std::initializer_list<float> values) {
  for (float v : values) {
    const auto* p = reinterpret_cast<const std::byte*>(&v);
    out.insert(out.end(), p, p + 4);
  }
}

TEST(MmeFormatTest, DecodesDeclaredShape) {
  auto bytes = header(2, 3);
  append_floats(bytes, {1, 2, 3, 4, 5, 6});
  const EmbeddingMatrix m = decode_mme(bytes);
  EXPECT_EQ(m.count(), 2u);
  EXPECT_EQ(m.dim(), 3u);
  EXPECT_EQ(m.matrix()(1, 2), 6.0);
}

TEST(MmeFormatTest, RejectsWrongMagic) {
  auto bytes = header(2, 3, "XXXX");
  append_floats(bytes, {1, 2, 3, 4, 5, 6});
  EXPECT_THROW(decode_mme(bytes), FormatError);
}

TEST(MmeFormatTest, RejectsUnknownVersion) {
  auto bytes = header(1, 1, "MMTS", 2);
  append_floats(bytes, {1});
  EXPECT_THROW(decode_mme(bytes), FormatError);
}

TEST(MmeFormatTest, ShortPayloadIsTruncation) {
  auto bytes = header(2, 3);
  append_floats(bytes, {1, 2, 3, 4, 5});  // 20 payload bytes
  EXPECT_THROW(decode_mme(bytes), TruncationError);
}

TEST(MmeFormatTest, TrailingBytesAreRejected) {
  auto bytes = header(1, 2);
  append_floats(bytes, {1, 2, 3});
  EXPECT_THROW(decode_mme(bytes), TruncationError);
}

TEST(MmeFormatTest, NanRowIsValidationError) {
  auto bytes = header(2, 1);
  append_floats(bytes, {1, std::numeric_limits<float>::quiet_NaN()});
  EXPECT_THROW(decode_mme(bytes), ValidationError);
}

TEST(MmeFormatTest, RoundTripsFloatRepresentableValuesExactly) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> shape(1, 9);
  std::normal_distribution<float> normal;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = shape(rng);
    const std::size_t d = shape(rng);
    Matrix m(n, d);
    for (double& v : m.values()) v = normal(rng);
    EXPECT_EQ(decode_mme(encode_mme(m)).matrix(), m);
  }
}

TEST(MmeFormatTest, FileRoundTripAndMissingFile) {
  const auto path = std::filesystem::temp_directory_path() / "mmts_embeddings_test.mme";
  const Matrix m(2, 2, {0.5, -1.0, 2.0, 0.25});
  save_embeddings(path, m);
  EXPECT_EQ(load_embeddings(path).matrix(), m);
  std::filesystem::remove(path);
  EXPECT_THROW(load_embeddings(path), IoError);
}

TEST(EmbeddingMatrixTest, NormalizedRowsAreUnit) {
  const EmbeddingMatrix m(2, 2, {3, 4, 0, 0});
  const auto u = m.normalized();
  EXPECT_DOUBLE_EQ(u.matrix()(0, 0), 0.6);
  EXPECT_DOUBLE_EQ(u.matrix()(0, 1), 0.8);
  EXPECT_EQ(u.matrix()(1, 0), 0.0);
}

}  // namespace
}  // namespace mmts
