#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace mmts::cli {

std::string sha256_file(const std::filesystem::path& path);

struct FileDigest {
  std::string path;  // absolute for inputs, relative to the manifest for outputs
  std::string sha256;
};

// Provenance record written next to every command's outputs.
struct RunManifest {
  std::string command;
  nlohmann::json config;
  std::int64_t seed = 0;
  std::vector<FileDigest> inputs;
  std::vector<FileDigest> outputs;
  std::string tool_version;
  std::string created_at;
};

void to_json(nlohmann::json& j, const FileDigest& digest);
void from_json(const nlohmann::json& j, FileDigest& digest);
void to_json(nlohmann::json& j, const RunManifest& manifest);
void from_json(const nlohmann::json& j, RunManifest& manifest);

// Digests `inputs` (stored absolute) and `outputs` (stored relative to the
// manifest's directory), stamps version and time, and writes the file.
void write_manifest(const std::filesystem::path& manifest_path, RunManifest manifest,
                    const std::vector<std::filesystem::path>& inputs,
                    const std::vector<std::filesystem::path>& outputs);

RunManifest read_manifest(const std::filesystem::path& manifest_path);

struct VerifyResult {
  bool ok = true;
  std::vector<std::string> mismatches;
};

// Recomputes every recorded digest.
VerifyResult verify_manifest(const std::filesystem::path& manifest_path);

std::filesystem::path sidecar_manifest_path(const std::filesystem::path& output);

}  // namespace mmts::cli
