#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace rcx::cli {

inline constexpr int kManifestSchemaVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";

// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

struct Manifest {
  std::string command;
  std::map<std::string, std::string> flags;
  std::map<std::string, std::uint64_t> seeds;
  std::vector<std::filesystem::path> inputs;
  std::vector<std::filesystem::path> outputs;
  nlohmann::json extra = nlohmann::json::object();

  nlohmann::json to_json() const;
};

// Writes `<primary output>.manifest.json`. Paths are recorded as given, so
// runs from different directories with relative paths produce equal bytes.
void write_manifest(const Manifest& manifest, const std::filesystem::path& primary_output);

}  // namespace rcx::cli
