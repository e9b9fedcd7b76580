#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rcx/graph.hpp"

namespace rcx {

class ModelParams;

// Total (or prefix) order over a graph's edges with one attribution score per
// ranked edge. Scores need not be monotone: sequential attributions may dip.
struct RankedEdges {
  std::vector<std::size_t> order;
  std::vector<double> scores;

  std::size_t size() const noexcept { return order.size(); }
  // Distinct in-range indices, one finite score per entry.
  void validate(std::size_t num_edges) const;
  bool is_full(std::size_t num_edges) const { return order.size() == num_edges; }
  // Score of every edge in edge-index order; requires a full ranking.
  std::vector<double> scores_by_edge(std::size_t num_edges) const;
  // First k ranked edges in rank order.
  EdgeSet top(std::size_t k) const;

  friend bool operator==(const RankedEdges&, const RankedEdges&) = default;
};

// K = ceil(ratio * num_edges), guarded against products such as 0.3 * 10
// landing one ulp above an integer.
std::size_t selection_size(double ratio, std::size_t num_edges);

// Edge at position k (1-based) scores (num_edges - k + 1) / num_edges.
RankedEdges rank_by_position(std::vector<std::size_t> order, std::size_t num_edges);

// Descending score, ties broken by lowest edge index.
RankedEdges rank_by_score(const std::vector<double>& scores_by_edge);

struct TrajectoryStep {
  std::size_t edge = 0;
  double score = 0.0;          // individual causal effect of the step
  double reward = 0.0;
  double subgraph_prob = 0.0;  // clamped p(target | selection after the step)
  std::optional<double> log_prob;

  friend bool operator==(const TrajectoryStep&, const TrajectoryStep&) = default;
};

struct Trajectory {
  std::string graph_id;
  int target_class = 0;
  std::vector<TrajectoryStep> steps;

  EdgeSet selected() const;
  std::vector<std::size_t> edge_order() const;
  double total_reward() const;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

// Class-conditioned attribution Phi(G, s) under a given model.
using Explainer =
    std::function<RankedEdges(const ModelParams& model, const Graph& graph, int target_class)>;

}  // namespace rcx
