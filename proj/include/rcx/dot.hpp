#pragma once

#include <filesystem>
#include <string>

#include "rcx/explanation.hpp"
#include "rcx/graph.hpp"

namespace rcx {

// Undirected DOT rendering. Ranked edges get pen width and red saturation
// monotone in their min-max normalized score; unranked edges are drawn thin
// and dashed. A ranking with a single distinct score styles every ranked
// edge at full weight.
std::string to_dot(const Graph& graph, const RankedEdges& ranked);

void export_dot(const Graph& graph, const RankedEdges& ranked, const std::filesystem::path& path);

}  // namespace rcx
