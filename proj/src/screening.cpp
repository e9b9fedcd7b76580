#include "rcx/screening.hpp"

#include <vector>

#include "rcx/error.hpp"
#include "rcx/parallel.hpp"

namespace rcx {

Trajectory greedy_screening(const AttributionContext& ctx, std::size_t k, RewardMode mode,
                            int threads) {
  const Graph& graph = ctx.graph();
  if (k < 1 || k > graph.num_edges()) {
    throw ValidationError("K = " + std::to_string(k) + " outside [1, " +
                          std::to_string(graph.num_edges()) + "]");
  }
  Trajectory traj{graph.id(), ctx.target_class(), {}};
  EdgeSet selected;
  double p_prev = predict_prob(ctx, selected);
  for (std::size_t step = 0; step < k; ++step) {
    const EdgeSet candidates = edge_complement(graph, selected);
    const auto& cand = candidates.indices();
    std::vector<SubgraphPrediction> preds(cand.size());
    parallel_for(cand.size(), threads, [&](std::size_t i) {
      EdgeSet next = selected;
      next.insert(cand[i]);
      preds[i] = ctx.evaluate(next);
    });
    std::size_t best = 0;
    double best_ice = ice_from_probs(ctx.full_prob(), p_prev, preds[0].target_prob);
    for (std::size_t i = 1; i < cand.size(); ++i) {
      const double ice = ice_from_probs(ctx.full_prob(), p_prev, preds[i].target_prob);
      if (ice > best_ice) {
        best_ice = ice;
        best = i;
      }
    }
    const SubgraphPrediction& winner = preds[best];
    traj.steps.push_back({cand[best], best_ice,
                          reward_from_probs(mode, ctx.full_prob(), p_prev, winner.target_prob,
                                            winner.predicted_class == ctx.target_class()),
                          winner.target_prob, std::nullopt});
    selected.insert(cand[best]);
    p_prev = winner.target_prob;
  }
  return traj;
}

EdgeSet brute_force_best_subgraph(const AttributionContext& ctx, std::size_t k,
                                  std::size_t max_edges) {
  const std::size_t n = ctx.graph().num_edges();
  if (n > max_edges) {
    throw ComplexityError("exhaustive subgraph search refused: " + std::to_string(n) +
                          " edges exceeds the limit of " + std::to_string(max_edges) +
                          " (the number of candidate subsets grows combinatorially)");
  }
  if (k < 1 || k > n) {
    throw ValidationError("K = " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
  }
  const double p_empty = predict_prob(ctx, EdgeSet{});
  std::vector<std::size_t> combo(k);
  for (std::size_t i = 0; i < k; ++i) combo[i] = i;
  std::vector<std::size_t> best_combo;
  double best_value = 0.0;
  while (true) {
    const double value =
        ice_from_probs(ctx.full_prob(), p_empty, predict_prob(ctx, EdgeSet(combo)));
    if (best_combo.empty() || value > best_value) {
      best_value = value;
      best_combo = combo;
    }
    // Next combination in lexicographic order.
    std::size_t i = k;
    while (i > 0 && combo[i - 1] == n - k + (i - 1)) --i;
    if (i == 0) break;
    ++combo[i - 1];
    for (std::size_t j = i; j < k; ++j) combo[j] = combo[j - 1] + 1;
  }
  return EdgeSet(best_combo);
}

Explainer make_greedy_explainer(double prob_floor, int threads) {
  return [prob_floor, threads](const ModelParams& model, const Graph& graph, int target_class) {
    if (graph.num_edges() == 0) return RankedEdges{};
    const AttributionContext ctx(model, graph, target_class, prob_floor);
    const Trajectory traj = greedy_screening(ctx, graph.num_edges(),
                                             RewardMode::kMutualInformation, threads);
    return rank_by_position(traj.edge_order(), graph.num_edges());
  };
}

}  // namespace rcx
