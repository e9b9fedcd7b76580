#include "rcx/explanation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rcx/error.hpp"

namespace rcx {

void RankedEdges::validate(std::size_t num_edges) const {
  if (scores.size() != order.size()) {
    throw ValidationError("ranking has " + std::to_string(order.size()) + " edges but " +
                          std::to_string(scores.size()) + " scores");
  }
  std::vector<bool> seen(num_edges, false);
  for (std::size_t i = 0; i < order.size(); ++i) {
    const std::size_t e = order[i];
    if (e >= num_edges) {
      throw ValidationError("ranking references edge " + std::to_string(e) + " of " +
                            std::to_string(num_edges));
    }
    if (seen[e]) throw ValidationError("ranking lists edge " + std::to_string(e) + " twice");
    seen[e] = true;
    if (!std::isfinite(scores[i])) throw ValidationError("ranking has a non-finite score");
  }
}

std::vector<double> RankedEdges::scores_by_edge(std::size_t num_edges) const {
  validate(num_edges);
  if (!is_full(num_edges)) {
    throw ValidationError("ranking covers " + std::to_string(order.size()) + " of " +
                          std::to_string(num_edges) + " edges; a full ranking is required");
  }
  std::vector<double> out(num_edges, 0.0);
  for (std::size_t i = 0; i < order.size(); ++i) out[order[i]] = scores[i];
  return out;
}

EdgeSet RankedEdges::top(std::size_t k) const {
  if (k > order.size()) {
    throw ValidationError("ranking too short: need " + std::to_string(k) + " edges, have " +
                          std::to_string(order.size()));
  }
  return EdgeSet(std::vector<std::size_t>(order.begin(), order.begin() + static_cast<long>(k)));
}

std::size_t selection_size(double ratio, std::size_t num_edges) {
  if (!(ratio > 0.0 && ratio <= 1.0)) {
    throw ValidationError("selection ratio must lie in (0, 1]");
  }
  const double raw = ratio * static_cast<double>(num_edges);
  const auto k = static_cast<std::size_t>(std::ceil(raw - 1e-9));
  return std::min(k, num_edges);
}

RankedEdges rank_by_position(std::vector<std::size_t> order, std::size_t num_edges) {
  RankedEdges ranked;
  ranked.scores.reserve(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    ranked.scores.push_back(static_cast<double>(num_edges - k) / static_cast<double>(num_edges));
  }
  ranked.order = std::move(order);
  ranked.validate(num_edges);
  return ranked;
}

RankedEdges rank_by_score(const std::vector<double>& scores_by_edge) {
  std::vector<std::size_t> order(scores_by_edge.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores_by_edge[a] > scores_by_edge[b];
  });
  RankedEdges ranked;
  ranked.order = order;
  for (std::size_t e : order) ranked.scores.push_back(scores_by_edge[e]);
  return ranked;
}

EdgeSet Trajectory::selected() const { return EdgeSet(edge_order()); }

std::vector<std::size_t> Trajectory::edge_order() const {
  std::vector<std::size_t> out;
  out.reserve(steps.size());
  for (const auto& s : steps) out.push_back(s.edge);
  return out;
}

double Trajectory::total_reward() const {
  double total = 0.0;
  for (const auto& s : steps) total += s.reward;
  return total;
}

}  // namespace rcx
