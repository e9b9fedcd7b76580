#pragma once

#include <cstdint>

#include "rcx/attribution.hpp"
#include "rcx/explanation.hpp"

namespace rcx {

// Uniform permutation of the edges from Rng(seed); position-derived scores.
RankedEdges random_ranking(const Graph& graph, std::uint64_t seed);

// Ignores the model and class: the permutation depends only on the seed and
// the graph id.
Explainer make_random_explainer(std::uint64_t seed);

// score(e) = p(target | G) - p(target | G without e), one forward per edge
// with every other edge intact. Descending score, ties to the lowest index.
RankedEdges occlusion_ranking(const AttributionContext& ctx, int threads = 1);

Explainer make_occlusion_explainer(double prob_floor = kDefaultProbFloor, int threads = 1);

}  // namespace rcx
