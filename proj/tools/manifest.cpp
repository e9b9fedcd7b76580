#include "manifest.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <fstream>
#include <memory>

#include "rcx/error.hpp"
#include "rcx/json_util.hpp"

namespace rcx::cli {

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for hashing");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw IoError("SHA-256 initialisation failed");
  }
  char buf[1 << 15];
  while (in) {
    in.read(buf, sizeof buf);
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  std::string hex;
  char byte[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(byte, sizeof byte, "%02x", digest[i]);
    hex += byte;
  }
  return hex;
}

nlohmann::json Manifest::to_json() const {
  nlohmann::json in = nlohmann::json::array();
  for (const auto& p : inputs) in.push_back({{"path", p.generic_string()}, {"sha256", sha256_file(p)}});
  nlohmann::json out = nlohmann::json::array();
  for (const auto& p : outputs) out.push_back(p.generic_string());
  nlohmann::json j{{"schema_version", kManifestSchemaVersion},
                   {"tool", "rcx"},
                   {"tool_version", kToolVersion},
                   {"command", command},
                   {"flags", flags},
                   {"seeds", seeds},
                   {"inputs", std::move(in)},
                   {"outputs", std::move(out)}};
  for (const auto& [key, value] : extra.items()) j[key] = value;
  return j;
}

void write_manifest(const Manifest& manifest, const std::filesystem::path& primary_output) {
  std::filesystem::path path = primary_output;
  path += ".manifest.json";
  write_text_file(path, manifest.to_json().dump(1) + "\n");
}

}  // namespace rcx::cli
