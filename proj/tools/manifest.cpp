#include "manifest.hpp"

#include <array>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <memory>

#include <openssl/evp.h>

#include "mmts/errors.hpp"

#ifndef MMTS_VERSION
#define MMTS_VERSION "0.0.0"
#endif

namespace mmts::cli {
namespace fs = std::filesystem;

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for hashing");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
    throw Error("sha256 initialization failed");
  std::array<char, 1 << 16> buffer{};
  while (in) {
    in.read(buffer.data(), buffer.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buffer.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &length);
  std::string hex;
  hex.reserve(length * 2);
  char byte[3];
  for (unsigned int i = 0; i < length; ++i) {
    std::snprintf(byte, sizeof(byte), "%02x", digest[i]);
    hex += byte;
  }
  return hex;
}

void to_json(nlohmann::json& j, const FileDigest& digest) {
  j = nlohmann::json{{"path", digest.path}, {"sha256", digest.sha256}};
}

void from_json(const nlohmann::json& j, FileDigest& digest) {
  digest.path = j.at("path").get<std::string>();
  digest.sha256 = j.at("sha256").get<std::string>();
}

void to_json(nlohmann::json& j, const RunManifest& m) {
  j = nlohmann::json{{"command", m.command},   {"config", m.config},
                     {"seed", m.seed},         {"inputs", m.inputs},
                     {"outputs", m.outputs},   {"tool_version", m.tool_version},
                     {"created_at", m.created_at}};
}

void from_json(const nlohmann::json& j, RunManifest& m) {
  m.command = j.at("command").get<std::string>();
  m.config = j.at("config");
  m.seed = j.at("seed").get<std::int64_t>();
  m.inputs = j.at("inputs").get<std::vector<FileDigest>>();
  m.outputs = j.at("outputs").get<std::vector<FileDigest>>();
  m.tool_version = j.at("tool_version").get<std::string>();
  m.created_at = j.at("created_at").get<std::string>();
}

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

void write_manifest(const fs::path& manifest_path, RunManifest manifest,
                    const std::vector<fs::path>& inputs, const std::vector<fs::path>& outputs) {
  const fs::path base = fs::absolute(manifest_path).parent_path();
  for (const auto& p : inputs) manifest.inputs.push_back({fs::absolute(p).lexically_normal().string(), sha256_file(p)});
  for (const auto& p : outputs)
    manifest.outputs.push_back({fs::absolute(p).lexically_normal().lexically_relative(base).string(), sha256_file(p)});
  manifest.tool_version = MMTS_VERSION;
  manifest.created_at = utc_now();
  std::ofstream out(manifest_path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + manifest_path.string());
  out << nlohmann::json(manifest).dump(2) << '\n';
}

RunManifest read_manifest(const fs::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw IoError("cannot open manifest " + manifest_path.string());
  try {
    return nlohmann::json::parse(in).get<RunManifest>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("malformed manifest " + manifest_path.string() + ": " + e.what());
  }
}

VerifyResult verify_manifest(const fs::path& manifest_path) {
  const RunManifest m = read_manifest(manifest_path);
  const fs::path base = fs::absolute(manifest_path).parent_path();
  VerifyResult result;
  auto check = [&](const fs::path& p, const std::string& expected) {
    if (!fs::exists(p)) {
      result.mismatches.push_back(p.string() + ": missing");
    } else if (sha256_file(p) != expected) {
      result.mismatches.push_back(p.string() + ": digest mismatch");
    }
  };
  for (const auto& d : m.inputs) check(d.path, d.sha256);
  for (const auto& d : m.outputs) check(base / d.path, d.sha256);
  result.ok = result.mismatches.empty();
  return result;
}

fs::path sidecar_manifest_path(const fs::path& output) {
  fs::path p = output;
  p += ".manifest.json";
  return p;
}

}  // namespace mmts::cli
