#pragma once

#include <atomic>
#include <cstddef>
#include <string>

#include "rcx/gnn.hpp"
#include "rcx/graph.hpp"

namespace rcx {

// How the reward of one screening step is formed. Each mode adds the +/-1
// state-validity term (+1 when the enlarged subgraph is still classified as
// the target class).
//   kMutualInformation: edge ICE + validity
//   kBinary:            validity only
//   kCrossEntropy:      log p(target | prev + e) - log p(target | prev) + validity
enum class RewardMode { kMutualInformation, kBinary, kCrossEntropy };

const char* reward_mode_name(RewardMode mode);
RewardMode parse_reward_mode(const std::string& name);

inline constexpr double kDefaultProbFloor = 1e-12;

struct SubgraphPrediction {
  double target_prob = 0.0;  // clamped to [floor, 1]
  int predicted_class = 0;
};

// A frozen target model, one graph, and the class being explained. Holds
// references: the model and graph must outlive the context.
class AttributionContext {
 public:
  AttributionContext(const ModelParams& model, const Graph& graph, int target_class,
                     double prob_floor = kDefaultProbFloor);
  AttributionContext(const AttributionContext&) = delete;
  AttributionContext& operator=(const AttributionContext&) = delete;

  // Context explaining the model's own prediction f(G).
  static int predicted_class(const ModelParams& model, const Graph& graph);

  const ModelParams& model() const noexcept { return *model_; }
  const Graph& graph() const noexcept { return *graph_; }
  int target_class() const noexcept { return target_class_; }
  double full_prob() const noexcept { return full_prob_; }
  double prob_floor() const noexcept { return prob_floor_; }
  double clamp(double p) const;

  // Forward pass of the target model on induce_subgraph(G, selected).
  SubgraphPrediction evaluate(const EdgeSet& selected) const;

  // Target-model forward passes issued through this context so far.
  std::size_t forward_count() const noexcept { return forwards_.load(); }

 private:
  const ModelParams* model_;
  const Graph* graph_;
  int target_class_;
  double prob_floor_;
  double full_prob_ = 1.0;
  mutable std::atomic<std::size_t> forwards_{0};
};

// Clamped p(target | induce_subgraph(G, selected)).
double predict_prob(const AttributionContext& ctx, const EdgeSet& selected);

// p_full * log(p_next / p_prev), evaluated as a difference of logs.
double ice_from_probs(double full_prob, double prev_prob, double next_prob);

// Effect of adding `edge` on top of `prev`: treatment prev + {edge}, control prev.
double ice_edge(const AttributionContext& ctx, const EdgeSet& prev, std::size_t edge);

// Effect of the whole selection against the empty graph. Telescopes:
// summing ice_edge along any insertion order of `selected` gives this value.
double ice_subgraph(const AttributionContext& ctx, const EdgeSet& selected);

// Reward assembled from already-computed probabilities.
double reward_from_probs(RewardMode mode, double full_prob, double prev_prob, double next_prob,
                         bool still_target);

double reward(const AttributionContext& ctx, const EdgeSet& prev, std::size_t edge,
              RewardMode mode);

}  // namespace rcx
