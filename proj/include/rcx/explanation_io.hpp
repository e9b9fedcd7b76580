#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "rcx/explanation.hpp"

namespace rcx {

struct GraphExplanation {
  std::string graph_id;
  int target_class = 0;
  RankedEdges ranked;
  // Size of the reported explanatory subgraph (the first k ranked edges).
  std::size_t k = 0;

  friend bool operator==(const GraphExplanation&, const GraphExplanation&) = default;
};

struct ExplanationFile {
  std::string method;
  double ratio = 1.0;
  std::vector<GraphExplanation> graphs;

  const GraphExplanation& find(const std::string& graph_id) const;

  friend bool operator==(const ExplanationFile&, const ExplanationFile&) = default;
};

inline constexpr int kExplanationSchemaVersion = 1;

nlohmann::json explanations_to_json(const ExplanationFile& file);
ExplanationFile explanations_from_json(const nlohmann::json& j);
void write_explanations(const ExplanationFile& file, const std::filesystem::path& path);
ExplanationFile read_explanations(const std::filesystem::path& path);

}  // namespace rcx
