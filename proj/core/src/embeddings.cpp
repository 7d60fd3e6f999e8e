#include "mmts/embeddings.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "mmts/errors.hpp"

namespace mmts {
namespace {

static_assert(std::endian::native == std::endian::little,
              "MME encoding assumes a little-endian host");

constexpr char kMagic[4] = {'M', 'M', 'T', 'S'};

template <typename T>
T read_scalar(std::span<const std::byte> bytes, std::size_t offset) {
  T value;
  std::memcpy(&value, bytes.data() + offset, sizeof(T));
  return value;
}

template <typename T>
void append_scalar(std::vector<std::byte>& out, T value) {
  const auto* p = reinterpret_cast<const std::byte*>(&value);
  out.insert(out.end(), p, p + sizeof(T));
}

}  // namespace

EmbeddingMatrix::EmbeddingMatrix(Matrix values) : values_(std::move(values)) {
  if (values_.rows() == 0 || values_.cols() == 0) {
    throw ValidationError("embedding matrix must have n >= 1 and d >= 1");
  }
  for (std::size_t i = 0; i < values_.rows(); ++i) {
    for (double v : values_.row(i)) {
      if (!std::isfinite(v)) {
        throw ValidationError("embedding row " + std::to_string(i) +
                              " contains a non-finite value");
      }
    }
  }
}

EmbeddingMatrix::EmbeddingMatrix(std::size_t n, std::size_t d, std::vector<double> values)
    : EmbeddingMatrix(Matrix(n, d, std::move(values))) {}

EmbeddingMatrix EmbeddingMatrix::normalized() const {
  Matrix out = values_;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto r = out.row(i);
    const double norm = l2_norm(r);
    if (norm > 0.0)
      for (double& v : r) v /= norm;
  }
  return EmbeddingMatrix(std::move(out));
}

EmbeddingMatrix decode_mme(std::span<const std::byte> bytes) {
  if (bytes.size() < kMmeHeaderBytes) {
    if (bytes.size() >= 4 && std::memcmp(bytes.data(), kMagic, 4) != 0)
      throw FormatError("bad MME magic");
    throw TruncationError("MME header truncated: " + std::to_string(bytes.size()) + " bytes");
  }
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw FormatError("bad MME magic");
  const auto version = read_scalar<std::uint32_t>(bytes, 4);
  if (version != kMmeVersion)
    throw FormatError("unsupported MME version " + std::to_string(version));
  const auto n = read_scalar<std::uint64_t>(bytes, 8);
  const auto d = read_scalar<std::uint64_t>(bytes, 16);
  if (n != 0 && d > (UINT64_MAX / sizeof(float)) / n)
    throw FormatError("MME shape overflows");
  const std::uint64_t expected = n * d * sizeof(float);
  const std::uint64_t payload = bytes.size() - kMmeHeaderBytes;
  if (payload != expected) {
    throw TruncationError("MME payload is " + std::to_string(payload) + " bytes, header declares " +
                          std::to_string(expected));
  }
  std::vector<double> values(n * d);
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = read_scalar<float>(bytes, kMmeHeaderBytes + i * sizeof(float));
  }
  return EmbeddingMatrix(n, d, std::move(values));
}

std::vector<std::byte> encode_mme(const Matrix& values) {
  std::vector<std::byte> out;
  out.reserve(kMmeHeaderBytes + values.size() * sizeof(float));
  const auto* magic = reinterpret_cast<const std::byte*>(kMagic);
  out.insert(out.end(), magic, magic + 4);
  append_scalar<std::uint32_t>(out, kMmeVersion);
  append_scalar<std::uint64_t>(out, values.rows());
  append_scalar<std::uint64_t>(out, values.cols());
  for (double v : values.values()) append_scalar<float>(out, static_cast<float>(v));
  return out;
}

EmbeddingMatrix load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed for " + path.string());
  return decode_mme(std::as_bytes(std::span(raw)));
}

void save_embeddings(const std::filesystem::path& path, const Matrix& values) {
  const auto bytes = encode_mme(values);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace mmts
