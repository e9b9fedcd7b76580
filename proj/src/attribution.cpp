#include "rcx/attribution.hpp"

#include <algorithm>
#include <cmath>

#include "rcx/error.hpp"

namespace rcx {

namespace {

void check_action(const AttributionContext& ctx, const EdgeSet& prev, std::size_t edge) {
  validate_edge_set(ctx.graph(), prev);
  if (edge >= ctx.graph().num_edges()) {
    throw InvalidActionError("edge " + std::to_string(edge) + " out of range for graph '" +
                             ctx.graph().id() + "'");
  }
  if (prev.contains(edge)) {
    throw InvalidActionError("edge " + std::to_string(edge) + " is already selected");
  }
}

EdgeSet with_edge(const EdgeSet& prev, std::size_t edge) {
  EdgeSet next = prev;
  next.insert(edge);
  return next;
}

}  // namespace

const char* reward_mode_name(RewardMode mode) {
  switch (mode) {
    case RewardMode::kMutualInformation:
      return "mi";
    case RewardMode::kBinary:
      return "binary";
    case RewardMode::kCrossEntropy:
      return "ce";
  }
  return "?";
}

RewardMode parse_reward_mode(const std::string& name) {
  if (name == "mi" || name == "MI") return RewardMode::kMutualInformation;
  if (name == "binary" || name == "Binary") return RewardMode::kBinary;
  if (name == "ce" || name == "CE") return RewardMode::kCrossEntropy;
  throw ValidationError("unknown reward mode '" + name + "' (expected mi|binary|ce)");
}

AttributionContext::AttributionContext(const ModelParams& model, const Graph& graph,
                                       int target_class, double prob_floor)
    : model_(&model), graph_(&graph), target_class_(target_class), prob_floor_(prob_floor) {
  if (target_class < 0 || target_class >= model.spec().num_classes) {
    throw ValidationError("target class " + std::to_string(target_class) + " outside [0, " +
                          std::to_string(model.spec().num_classes) + ")");
  }
  if (!(prob_floor > 0.0 && prob_floor < 1.0)) {
    throw ValidationError("probability floor must lie in (0, 1)");
  }
  full_prob_ = clamp(forward(model, graph).probs(target_class));
  ++forwards_;
}

int AttributionContext::predicted_class(const ModelParams& model, const Graph& graph) {
  return argmax(forward(model, graph).probs);
}

double AttributionContext::clamp(double p) const { return std::clamp(p, prob_floor_, 1.0); }

SubgraphPrediction AttributionContext::evaluate(const EdgeSet& selected) const {
  const ForwardTrace trace = forward(*model_, induce_subgraph(*graph_, selected));
  ++forwards_;
  return {clamp(trace.probs(target_class_)), argmax(trace.probs)};
}

double predict_prob(const AttributionContext& ctx, const EdgeSet& selected) {
  return ctx.evaluate(selected).target_prob;
}

double ice_from_probs(double full_prob, double prev_prob, double next_prob) {
  return full_prob * (std::log(next_prob) - std::log(prev_prob));
}

double ice_edge(const AttributionContext& ctx, const EdgeSet& prev, std::size_t edge) {
  check_action(ctx, prev, edge);
  const double p_prev = predict_prob(ctx, prev);
  const double p_next = predict_prob(ctx, with_edge(prev, edge));
  return ice_from_probs(ctx.full_prob(), p_prev, p_next);
}

double ice_subgraph(const AttributionContext& ctx, const EdgeSet& selected) {
  validate_edge_set(ctx.graph(), selected);
  const double p_empty = predict_prob(ctx, EdgeSet{});
  const double p_selected = predict_prob(ctx, selected);
  return ice_from_probs(ctx.full_prob(), p_empty, p_selected);
}

double reward_from_probs(RewardMode mode, double full_prob, double prev_prob, double next_prob,
                         bool still_target) {
  const double validity = still_target ? 1.0 : -1.0;
  switch (mode) {
    case RewardMode::kMutualInformation:
      return ice_from_probs(full_prob, prev_prob, next_prob) + validity;
    case RewardMode::kBinary:
      return validity;
    case RewardMode::kCrossEntropy:
      return std::log(next_prob) - std::log(prev_prob) + validity;
  }
  return validity;
}

double reward(const AttributionContext& ctx, const EdgeSet& prev, std::size_t edge,
              RewardMode mode) {
  check_action(ctx, prev, edge);
  const double p_prev = predict_prob(ctx, prev);
  const SubgraphPrediction next = ctx.evaluate(with_edge(prev, edge));
  return reward_from_probs(mode, ctx.full_prob(), p_prev, next.target_prob,
                           next.predicted_class == ctx.target_class());
}

}  // namespace rcx
