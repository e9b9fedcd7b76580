#pragma once

#include <cstddef>

#include "rcx/attribution.hpp"
#include "rcx/explanation.hpp"

namespace rcx {

// Greedy sequential exhaustive search: starting from the empty selection,
// each step evaluates the ICE of every remaining edge given the current
// selection and keeps the argmax (ties to the lowest edge index). Step
// scores are the ICE values; rewards follow `mode`. Runs to exactly k steps
// even when every remaining ICE is negative.
//
// Cost: one forward for the empty graph, then |remaining| forwards per step
// (p(target | selection) is carried over from the previous step's winner).
Trajectory greedy_screening(const AttributionContext& ctx, std::size_t k,
                            RewardMode mode = RewardMode::kMutualInformation, int threads = 1);

inline constexpr std::size_t kDefaultBruteForceMaxEdges = 16;

// Exact argmax of ice_subgraph over all k-subsets, lexicographically smallest
// subset on ties. Refuses graphs with more than max_edges edges.
EdgeSet brute_force_best_subgraph(const AttributionContext& ctx, std::size_t k,
                                  std::size_t max_edges = kDefaultBruteForceMaxEdges);

// Full greedy ranking with position-derived scores.
Explainer make_greedy_explainer(double prob_floor = kDefaultProbFloor, int threads = 1);

}  // namespace rcx
