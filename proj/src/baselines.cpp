#include "rcx/baselines.hpp"

#include <numeric>
#include <vector>

#include "rcx/parallel.hpp"
#include "rcx/rng.hpp"

namespace rcx {

RankedEdges random_ranking(const Graph& graph, std::uint64_t seed) {
  std::vector<std::size_t> order(graph.num_edges());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);
  return rank_by_position(std::move(order), graph.num_edges());
}

Explainer make_random_explainer(std::uint64_t seed) {
  return [seed](const ModelParams&, const Graph& graph, int) {
    return random_ranking(graph, mix_seed(seed, hash_string(graph.id())));
  };
}

RankedEdges occlusion_ranking(const AttributionContext& ctx, int threads) {
  const Graph& graph = ctx.graph();
  const std::size_t n = graph.num_edges();
  std::vector<double> scores(n);
  parallel_for(n, threads, [&](std::size_t e) {
    std::vector<std::size_t> keep;
    keep.reserve(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
      if (i != e) keep.push_back(i);
    }
    scores[e] = ctx.full_prob() - predict_prob(ctx, EdgeSet(std::move(keep)));
  });
  return rank_by_score(scores);
}

Explainer make_occlusion_explainer(double prob_floor, int threads) {
  return [prob_floor, threads](const ModelParams& model, const Graph& graph, int target_class) {
    const AttributionContext ctx(model, graph, target_class, prob_floor);
    return occlusion_ranking(ctx, threads);
  };
}

}  // namespace rcx
