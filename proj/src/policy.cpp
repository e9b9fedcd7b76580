#include "rcx/policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numeric>
#include <sstream>

#include "rcx/error.hpp"
#include "rcx/json_util.hpp"
#include "rcx/metrics.hpp"
#include "rcx/parallel.hpp"
#include "rcx/rng.hpp"

namespace rcx {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using nlohmann::json;

namespace {

Index idx(std::size_t i) { return static_cast<Index>(i); }

MatrixXd relu(const MatrixXd& x) { return x.cwiseMax(0.0); }
MatrixXd relu_mask(const MatrixXd& pre) { return (pre.array() > 0.0).cast<double>().matrix(); }

void expect_shape(const MatrixXd& m, int rows, int cols, const std::string& what) {
  if (m.rows() != rows || m.cols() != cols) {
    throw ShapeError("policy " + what + " has shape " + std::to_string(m.rows()) + "x" +
                     std::to_string(m.cols()) + ", expected " + std::to_string(rows) + "x" +
                     std::to_string(cols));
  }
}

void expect_size(const VectorXd& v, int n, const std::string& what) {
  if (v.size() != n) {
    throw ShapeError("policy " + what + " has length " + std::to_string(v.size()) +
                     ", expected " + std::to_string(n));
  }
}

void check_head(const PolicySpec& spec, const PolicyHead& h) {
  expect_shape(h.edge.w1, spec.edge_hidden, spec.edge_input_dim(), "edge w1");
  expect_size(h.edge.b1, spec.edge_hidden, "edge b1");
  expect_shape(h.edge.w2, spec.edge_dim, spec.edge_hidden, "edge w2");
  expect_size(h.edge.b2, spec.edge_dim, "edge b2");
  expect_shape(h.score.w3, spec.score_hidden, spec.edge_dim + spec.state_dim(), "score w3");
  expect_size(h.score.b3, spec.score_hidden, "score b3");
  expect_shape(h.score.heads, spec.num_classes, spec.score_hidden, "class heads");
}

// Selection-dependent part of the scorer for one step.
struct StepScores {
  std::vector<std::size_t> candidates;
  std::vector<std::size_t> state_nodes;
  MatrixXd inputs;  // m x (d'' + d'): [z_e | z_state]
  MatrixXd pre;     // m x score_hidden
  VectorXd logits;
};

StepScores score_step(const PolicyParams& policy, const EncodedGraph& enc,
                      const EdgeSet& selected, int target_class) {
  const PolicySpec& spec = policy.spec();
  if (target_class < 0 || target_class >= spec.num_classes) {
    throw ValidationError("target class " + std::to_string(target_class) + " outside [0, " +
                          std::to_string(spec.num_classes) + ")");
  }
  const Graph& graph = *enc.graph;
  StepScores s;
  s.candidates = edge_complement(graph, selected).indices();
  if (s.candidates.empty()) {
    throw InvalidActionError("no action available: every edge of graph '" + graph.id() +
                             "' is already selected");
  }
  s.state_nodes = incident_nodes(graph, selected);
  const VectorXd state = state_representation(enc, selected);
  const Index m = idx(s.candidates.size());
  s.inputs.resize(m, spec.edge_dim + spec.state_dim());
  for (Index i = 0; i < m; ++i) {
    s.inputs.row(i).head(spec.edge_dim) = enc.edge_repr.row(idx(s.candidates[i]));
    s.inputs.row(i).tail(spec.state_dim()) = state.transpose();
  }
  const ScoreMlp& sc = policy.head().score;
  s.pre = (s.inputs * sc.w3.transpose()).rowwise() + sc.b3.transpose();
  s.logits = relu(s.pre) * sc.heads.row(target_class).transpose();
  return s;
}

ActionDistribution to_distribution(StepScores&& s) {
  ActionDistribution d;
  d.candidates = std::move(s.candidates);
  d.logits = std::move(s.logits);
  softmax_into(d.logits, d.probs, d.log_probs);
  return d;
}

std::size_t greedy_choice(const ActionDistribution& d) {
  // Candidates are ascending, so the first maximum is the lowest edge index.
  std::size_t best = 0;
  for (std::size_t i = 1; i < d.candidates.size(); ++i) {
    if (d.log_probs(idx(i)) > d.log_probs(idx(best))) best = i;
  }
  return best;
}

std::size_t sample_choice(const ActionDistribution& d, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < d.candidates.size(); ++i) {
    acc += d.probs(idx(i));
    if (u < acc) return i;
  }
  // Rounding left u above the final cumulative sum: take the last candidate
  // with non-zero probability.
  std::size_t last = d.candidates.size() - 1;
  while (last > 0 && d.probs(idx(last)) == 0.0) --last;
  return last;
}

void check_batch(std::span<const Episode> batch) {
  if (batch.empty()) throw ValidationError("REINFORCE batch is empty");
  for (const Episode& ep : batch) {
    if (ep.graph == nullptr) throw ContractError("episode without a graph");
  }
}

// Adds one episode's contribution to the loss and (optionally) gradients.
double accumulate_episode(const PolicyParams& policy, const Episode& ep, double scale,
                          double baseline, PolicyGrads* grads) {
  const PolicySpec& spec = policy.spec();
  const EncodedGraph enc = encode_graph(policy, *ep.graph);
  const int c = ep.trajectory.target_class;
  const Index num_nodes = idx(ep.graph->num_nodes());
  const Index num_edges = idx(ep.graph->num_edges());
  MatrixXd d_nodes = MatrixXd::Zero(num_nodes, spec.state_dim());
  MatrixXd d_edge_repr = MatrixXd::Zero(num_edges, spec.edge_dim);
  const ScoreMlp& sc = policy.head().score;

  double loss = 0.0;
  EdgeSet selected;
  for (const TrajectoryStep& step : ep.trajectory.steps) {
    StepScores s = score_step(policy, enc, selected, c);
    VectorXd probs;
    VectorXd log_probs;
    softmax_into(s.logits, probs, log_probs);
    const auto it = std::find(s.candidates.begin(), s.candidates.end(), step.edge);
    if (it == s.candidates.end()) {
      throw InvalidActionError("trajectory step picks edge " + std::to_string(step.edge) +
                               ", which is not a candidate");
    }
    const Index taken = it - s.candidates.begin();
    const double advantage = step.reward - baseline;
    loss -= scale * advantage * log_probs(taken);
    if (grads != nullptr && advantage != 0.0) {
      // dL/dlogits = -scale * A * (onehot - p)
      VectorXd g = probs * (scale * advantage);
      g(taken) -= scale * advantage;
      const MatrixXd hidden = relu(s.pre);
      grads->head.score.heads.row(c) += g.transpose() * hidden;
      const MatrixXd d_pre = (g * sc.heads.row(c)).cwiseProduct(relu_mask(s.pre));
      grads->head.score.w3 += d_pre.transpose() * s.inputs;
      grads->head.score.b3 += d_pre.colwise().sum().transpose();
      const MatrixXd d_inputs = d_pre * sc.w3;
      for (std::size_t i = 0; i < s.candidates.size(); ++i) {
        d_edge_repr.row(idx(s.candidates[i])) += d_inputs.row(idx(i)).head(spec.edge_dim);
      }
      if (!s.state_nodes.empty()) {
        const VectorXd d_state = d_inputs.rightCols(spec.state_dim()).colwise().sum().transpose() /
                                 static_cast<double>(s.state_nodes.size());
        for (std::size_t v : s.state_nodes) d_nodes.row(idx(v)) += d_state.transpose();
      }
    }
    selected.insert(step.edge);
  }
  if (grads == nullptr) return loss;

  const EdgeMlp& em = policy.head().edge;
  grads->head.edge.w2 += d_edge_repr.transpose() * relu(enc.edge_pre_hidden);
  grads->head.edge.b2 += d_edge_repr.colwise().sum().transpose();
  const MatrixXd d_hidden = (d_edge_repr * em.w2).cwiseProduct(relu_mask(enc.edge_pre_hidden));
  grads->head.edge.w1 += d_hidden.transpose() * enc.edge_inputs;
  grads->head.edge.b1 += d_hidden.colwise().sum().transpose();
  const MatrixXd d_edge_inputs = d_hidden * em.w1;
  const Index d = spec.state_dim();
  for (std::size_t e = 0; e < ep.graph->num_edges(); ++e) {
    const Edge& edge = ep.graph->edge(e);
    d_nodes.row(idx(edge.u)) += d_edge_inputs.row(idx(e)).segment(0, d);
    d_nodes.row(idx(edge.v)) += d_edge_inputs.row(idx(e)).segment(d, d);
  }
  const VectorXd no_logit_grad = VectorXd::Zero(spec.encoder.num_classes);
  const ParamGrads enc_grads =
      backward(enc.encoder_trace, policy.encoder(), no_logit_grad, d_nodes);
  std::vector<double> acc = flatten(grads->encoder);
  const std::vector<double> add = flatten(enc_grads);
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += add[i];
  unflatten(grads->encoder, acc);
  return loss;
}

double mean_reward(std::span<const Episode> batch) {
  double sum = 0.0;
  std::size_t steps = 0;
  for (const Episode& ep : batch) {
    for (const TrajectoryStep& s : ep.trajectory.steps) {
      sum += s.reward;
      ++steps;
    }
  }
  return steps == 0 ? 0.0 : sum / static_cast<double>(steps);
}

bool beam_order(const BeamEntry& a, const BeamEntry& b) {
  if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
  return a.sequence < b.sequence;
}

bool final_order(const BeamEntry& a, const BeamEntry& b) {
  if (a.reward != b.reward) return a.reward > b.reward;
  return beam_order(a, b);
}

json edge_mlp_to_json(const EdgeMlp& m) {
  return {{"w1", matrix_to_json(m.w1, "edge w1")},
          {"b1", vector_to_json(m.b1, "edge b1")},
          {"w2", matrix_to_json(m.w2, "edge w2")},
          {"b2", vector_to_json(m.b2, "edge b2")}};
}

json score_mlp_to_json(const ScoreMlp& m) {
  return {{"w3", matrix_to_json(m.w3, "score w3")},
          {"b3", vector_to_json(m.b3, "score b3")},
          {"heads", matrix_to_json(m.heads, "class heads")}};
}

}  // namespace

void PolicySpec::validate() const {
  encoder.validate();
  if (edge_feature_dim < 0) throw ValidationError("edge_feature_dim must be >= 0");
  if (edge_hidden < 1 || edge_dim < 1 || score_hidden < 1) {
    throw ValidationError("policy widths must be positive");
  }
  if (num_classes < 1) throw ValidationError("policy needs at least one class head");
}

PolicySpec default_policy_spec(const ModelSpec& target, int edge_feature_dim, int width) {
  PolicySpec spec;
  spec.encoder.layer_dims.assign(static_cast<std::size_t>(target.num_layers()) + 1, width);
  spec.encoder.layer_dims.front() = target.input_dim();
  spec.encoder.num_classes = target.num_classes;
  spec.encoder.readout = Readout::kMean;
  // The encoder's predictor is never evaluated; keep it minimal.
  spec.encoder.predictor_hidden = 1;
  spec.edge_feature_dim = edge_feature_dim;
  spec.num_classes = target.num_classes;
  spec.validate();
  return spec;
}

PolicyHead PolicyHead::zeros(const PolicySpec& spec) {
  PolicyHead h;
  h.edge.w1 = MatrixXd::Zero(spec.edge_hidden, spec.edge_input_dim());
  h.edge.b1 = VectorXd::Zero(spec.edge_hidden);
  h.edge.w2 = MatrixXd::Zero(spec.edge_dim, spec.edge_hidden);
  h.edge.b2 = VectorXd::Zero(spec.edge_dim);
  h.score.w3 = MatrixXd::Zero(spec.score_hidden, spec.edge_dim + spec.state_dim());
  h.score.b3 = VectorXd::Zero(spec.score_hidden);
  h.score.heads = MatrixXd::Zero(spec.num_classes, spec.score_hidden);
  return h;
}

PolicyGrads PolicyGrads::zeros(const PolicySpec& spec) {
  return {GnnWeights::zeros(spec.encoder), PolicyHead::zeros(spec)};
}

std::vector<double> PolicyGrads::flat() const {
  std::vector<double> out = flatten(encoder);
  const std::vector<double> h = flatten(head);
  out.insert(out.end(), h.begin(), h.end());
  return out;
}

PolicyParams::PolicyParams(PolicySpec spec, ModelParams encoder, PolicyHead head)
    : spec_(std::move(spec)), encoder_(std::move(encoder)), head_(std::move(head)) {
  spec_.validate();
  if (!(encoder_.spec() == spec_.encoder)) {
    throw ShapeError("policy encoder spec does not match the policy spec");
  }
  check_head(spec_, head_);
}

std::size_t PolicyParams::num_parameters() const {
  std::size_t n = encoder_.num_parameters();
  visit_tensors(head_, [&](const auto& t) { n += static_cast<std::size_t>(t.size()); });
  return n;
}

std::vector<double> PolicyParams::flat() const {
  std::vector<double> out = flatten(encoder_.weights());
  const std::vector<double> h = flatten(head_);
  out.insert(out.end(), h.begin(), h.end());
  return out;
}

void PolicyParams::assign(std::span<const double> flat) {
  if (flat.size() != num_parameters()) {
    throw ShapeError("policy assign: " + std::to_string(flat.size()) + " values for " +
                     std::to_string(num_parameters()) + " parameters");
  }
  const std::size_t n_enc = encoder_.num_parameters();
  unflatten(encoder_.mutable_weights(), flat.first(n_enc));
  unflatten(head_, flat.subspan(n_enc));
}

bool operator==(const PolicyParams& a, const PolicyParams& b) {
  return a.spec_ == b.spec_ && a.flat() == b.flat();
}

PolicyParams init_policy(const PolicySpec& spec, std::uint64_t seed) {
  spec.validate();
  ModelParams encoder = init_params(spec.encoder, mix_seed(seed, 0));
  PolicyHead head = PolicyHead::zeros(spec);
  Rng rng(mix_seed(seed, 1));
  glorot_uniform(head.edge.w1, rng);
  glorot_uniform(head.edge.w2, rng);
  glorot_uniform(head.score.w3, rng);
  glorot_uniform(head.score.heads, rng);
  return PolicyParams(spec, std::move(encoder), std::move(head));
}

EncodedGraph encode_graph(const PolicyParams& policy, const Graph& graph) {
  const PolicySpec& spec = policy.spec();
  if (static_cast<int>(graph.edge_feature_dim()) != spec.edge_feature_dim) {
    throw ShapeError("graph '" + graph.id() + "' has " + std::to_string(graph.edge_feature_dim()) +
                     " edge features, policy expects " + std::to_string(spec.edge_feature_dim));
  }
  EncodedGraph enc;
  enc.graph = &graph;
  enc.encoder_trace = forward(policy.encoder(), graph);
  const MatrixXd& z = enc.node_repr();
  const Index d = spec.state_dim();
  const Index num_edges = idx(graph.num_edges());
  enc.edge_inputs.resize(num_edges, spec.edge_input_dim());
  for (Index e = 0; e < num_edges; ++e) {
    const Edge& edge = graph.edge(static_cast<std::size_t>(e));
    enc.edge_inputs.row(e).segment(0, d) = z.row(idx(edge.u));
    enc.edge_inputs.row(e).segment(d, d) = z.row(idx(edge.v));
    if (spec.edge_feature_dim > 0) {
      enc.edge_inputs.row(e).tail(spec.edge_feature_dim) = graph.edge_features()->row(e);
    }
  }
  const EdgeMlp& m = policy.head().edge;
  enc.edge_pre_hidden = (enc.edge_inputs * m.w1.transpose()).rowwise() + m.b1.transpose();
  enc.edge_repr = (relu(enc.edge_pre_hidden) * m.w2.transpose()).rowwise() + m.b2.transpose();
  return enc;
}

VectorXd action_representation(const PolicyParams& policy, const Graph& graph, std::size_t edge) {
  if (edge >= graph.num_edges()) {
    throw InvalidEdgeSetError("edge index " + std::to_string(edge) + " out of range for graph '" +
                              graph.id() + "'");
  }
  return encode_graph(policy, graph).edge_repr.row(idx(edge)).transpose();
}

std::vector<std::size_t> incident_nodes(const Graph& graph, const EdgeSet& selected) {
  validate_edge_set(graph, selected);
  std::vector<std::size_t> nodes;
  for (std::size_t e : selected) {
    nodes.push_back(graph.edge(e).u);
    nodes.push_back(graph.edge(e).v);
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  return nodes;
}

VectorXd state_representation(const EncodedGraph& encoded, const EdgeSet& selected) {
  const MatrixXd& z = encoded.node_repr();
  VectorXd state = VectorXd::Zero(z.cols());
  const std::vector<std::size_t> nodes = incident_nodes(*encoded.graph, selected);
  if (nodes.empty()) return state;
  for (std::size_t v : nodes) state += z.row(idx(v)).transpose();
  return state / static_cast<double>(nodes.size());
}

VectorXd state_representation(const PolicyParams& policy, const Graph& graph,
                              const EdgeSet& selected) {
  return state_representation(encode_graph(policy, graph), selected);
}

std::size_t ActionDistribution::index_of(std::size_t edge) const {
  const auto it = std::find(candidates.begin(), candidates.end(), edge);
  if (it == candidates.end()) {
    throw InvalidActionError("edge " + std::to_string(edge) + " is not a candidate action");
  }
  return static_cast<std::size_t>(it - candidates.begin());
}

void softmax_into(const VectorXd& logits, VectorXd& probs, VectorXd& log_probs) {
  if (logits.size() == 0) throw InvalidActionError("softmax over an empty candidate set");
  if (!logits.allFinite()) throw NumericError("non-finite policy logit");
  const double shift = logits.maxCoeff();
  const VectorXd shifted = logits.array() - shift;
  const VectorXd e = shifted.array().exp();
  const double total = e.sum();
  probs = e / total;
  log_probs = shifted.array() - std::log(total);
}

ActionDistribution action_distribution(const PolicyParams& policy, const EncodedGraph& encoded,
                                       const EdgeSet& selected, int target_class) {
  return to_distribution(score_step(policy, encoded, selected, target_class));
}

ActionDistribution action_distribution(const PolicyParams& policy, const Graph& graph,
                                       const EdgeSet& selected, int target_class) {
  return action_distribution(policy, encode_graph(policy, graph), selected, target_class);
}

const char* rollout_mode_name(RolloutMode mode) {
  return mode == RolloutMode::kSample ? "sample" : "greedy";
}

RolloutMode parse_rollout_mode(const std::string& name) {
  if (name == "sample") return RolloutMode::kSample;
  if (name == "greedy") return RolloutMode::kGreedy;
  throw ValidationError("unknown rollout mode '" + name + "' (expected sample|greedy)");
}

Trajectory rollout(const PolicyParams& policy, const AttributionContext& ctx, std::size_t k,
                   RolloutMode mode, std::uint64_t seed, RewardMode reward_mode) {
  const Graph& graph = ctx.graph();
  if (k < 1 || k > graph.num_edges()) {
    throw ValidationError("K = " + std::to_string(k) + " outside [1, " +
                          std::to_string(graph.num_edges()) + "]");
  }
  const EncodedGraph enc = encode_graph(policy, graph);
  Rng rng(seed);
  Trajectory traj{graph.id(), ctx.target_class(), {}};
  EdgeSet selected;
  double p_prev = predict_prob(ctx, selected);
  for (std::size_t step = 0; step < k; ++step) {
    const ActionDistribution dist = action_distribution(policy, enc, selected, ctx.target_class());
    const std::size_t choice =
        mode == RolloutMode::kGreedy ? greedy_choice(dist) : sample_choice(dist, rng);
    const std::size_t edge = dist.candidates[choice];
    selected.insert(edge);
    const SubgraphPrediction next = ctx.evaluate(selected);
    traj.steps.push_back(
        {edge, ice_from_probs(ctx.full_prob(), p_prev, next.target_prob),
         reward_from_probs(reward_mode, ctx.full_prob(), p_prev, next.target_prob,
                           next.predicted_class == ctx.target_class()),
         next.target_prob, dist.log_probs(idx(choice))});
    p_prev = next.target_prob;
  }
  return traj;
}

double reinforce_loss(const PolicyParams& policy, std::span<const Episode> batch,
                      double baseline) {
  check_batch(batch);
  const double scale = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  for (const Episode& ep : batch) loss += accumulate_episode(policy, ep, scale, baseline, nullptr);
  return loss;
}

ReinforceGradient reinforce_gradient(const PolicyParams& policy, std::span<const Episode> batch,
                                     double baseline) {
  check_batch(batch);
  const double scale = 1.0 / static_cast<double>(batch.size());
  ReinforceGradient out{0.0, PolicyGrads::zeros(policy.spec())};
  for (const Episode& ep : batch) {
    out.loss += accumulate_episode(policy, ep, scale, baseline, &out.grads);
  }
  return out;
}

double reinforce_update(PolicyParams& policy, std::span<const Episode> batch, Adam& optimizer,
                        double baseline) {
  const ReinforceGradient g = reinforce_gradient(policy, batch, baseline);
  if (!std::isfinite(g.loss)) throw NumericError("REINFORCE loss is not finite");
  std::vector<double> params = policy.flat();
  optimizer.step(params, g.grads.flat());
  policy.assign(params);
  return g.loss;
}

ExplainerTrainResult train_explainer(const PolicyParams& initial, const ModelParams& target,
                                     const Dataset& dataset, const ExplainerHyper& hyper) {
  if (hyper.epochs < 0) throw ValidationError("epochs must be >= 0");
  if (hyper.batch_size < 1) throw ValidationError("batch_size must be >= 1");
  if (!(hyper.train_ratio > 0.0 && hyper.train_ratio <= 1.0)) {
    throw ValidationError("train_ratio must lie in (0, 1]");
  }
  if (dataset.split(Split::kTrain).empty() || dataset.split(Split::kValid).empty()) {
    throw ValidationError("explainer training needs non-empty train and valid splits");
  }
  if (initial.spec().num_classes != target.spec().num_classes) {
    throw ValidationError("policy has " + std::to_string(initial.spec().num_classes) +
                          " class heads, target model has " +
                          std::to_string(target.spec().num_classes) + " classes");
  }

  // Graphs without edges have nothing to select.
  std::vector<const Graph*> train;
  for (const Graph* g : split_graphs(dataset, Split::kTrain)) {
    if (g->num_edges() > 0) train.push_back(g);
  }
  if (train.empty()) throw ValidationError("no training graph has any edge");
  const std::vector<const Graph*> valid = split_graphs(dataset, Split::kValid);
  std::vector<std::unique_ptr<AttributionContext>> contexts;
  contexts.reserve(train.size());
  for (const Graph* g : train) {
    contexts.push_back(std::make_unique<AttributionContext>(
        target, *g, AttributionContext::predicted_class(target, *g), hyper.prob_floor));
  }

  const std::vector<double> frozen = flatten(target.weights());
  auto validate_score = [&](const PolicyParams& p) {
    return acc_curve(target, valid, make_rc_explainer(p, hyper.prob_floor), hyper.threads).auc;
  };

  PolicyParams policy = initial;
  ExplainerTrainResult result{initial, {}, 0};
  double best_score = validate_score(policy);
  result.log.push_back({0, 0.0, 0.0, best_score});

  Adam optimizer({hyper.learning_rate, 0.9, 0.999, 1e-8, hyper.weight_decay},
                 policy.num_parameters());
  Rng order_rng(mix_seed(hyper.seed, 0));
  std::uint64_t rollout_counter = 0;
  double running_baseline = 0.0;
  bool baseline_ready = false;
  for (int epoch = 1; epoch <= hyper.epochs; ++epoch) {
    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), 0);
    order_rng.shuffle(order);
    double loss_sum = 0.0;
    double reward_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += hyper.batch_size) {
      const std::size_t end = std::min(order.size(), start + hyper.batch_size);
      std::vector<Episode> batch(end - start);
      const std::uint64_t first_seed = rollout_counter;
      rollout_counter += batch.size();
      parallel_for(batch.size(), hyper.threads, [&](std::size_t b) {
        const std::size_t gi = order[start + b];
        const Graph& g = *train[gi];
        const std::size_t k = std::max<std::size_t>(1, selection_size(hyper.train_ratio,
                                                                      g.num_edges()));
        batch[b] = {&g, rollout(policy, *contexts[gi], k, hyper.rollout_mode,
                                mix_seed(hyper.seed, 1 + first_seed + b), hyper.reward_mode)};
      });
      // Reduce in graph-id order so the float sums do not depend on the shuffle.
      std::sort(batch.begin(), batch.end(),
                [](const Episode& a, const Episode& b) { return a.graph->id() < b.graph->id(); });
      const double batch_reward = mean_reward(batch);
      const double baseline = hyper.use_baseline && baseline_ready ? running_baseline : 0.0;
      loss_sum += reinforce_update(policy, batch, optimizer, baseline);
      reward_sum += batch_reward;
      ++batches;
      if (hyper.use_baseline) {
        running_baseline = baseline_ready ? hyper.baseline_decay * running_baseline +
                                                (1.0 - hyper.baseline_decay) * batch_reward
                                          : batch_reward;
        baseline_ready = true;
      }
    }
    if (flatten(target.weights()) != frozen) {
      throw ContractError("target model parameters changed during explainer training");
    }
    const double score = validate_score(policy);
    result.log.push_back({epoch, loss_sum / static_cast<double>(batches),
                          reward_sum / static_cast<double>(batches), score});
    if (score > best_score) {
      best_score = score;
      result.policy = policy;
      result.best_epoch = epoch;
    }
  }
  return result;
}

void write_explainer_log(const std::vector<ExplainerLogRow>& log,
                         const std::filesystem::path& path) {
  std::ostringstream out;
  out << "epoch,loss,mean_reward,valid_acc_auc\n";
  char line[128];
  for (const ExplainerLogRow& r : log) {
    std::snprintf(line, sizeof line, "%d,%.10g,%.10g,%.10g\n", r.epoch, r.loss, r.mean_reward,
                  r.valid_acc_auc);
    out << line;
  }
  write_text_file(path, out.str());
}

BeamResult beam_search(const PolicyParams& policy, const AttributionContext& ctx, std::size_t k,
                       std::size_t width, RewardMode reward_mode) {
  const Graph& graph = ctx.graph();
  if (width < 1) throw ValidationError("beam width must be >= 1");
  if (k < 1 || k > graph.num_edges()) {
    throw ValidationError("K = " + std::to_string(k) + " outside [1, " +
                          std::to_string(graph.num_edges()) + "]");
  }
  const EncodedGraph enc = encode_graph(policy, graph);
  std::vector<BeamEntry> beams{{{}, 0.0, 0.0, predict_prob(ctx, EdgeSet{})}};
  for (std::size_t step = 0; step < k; ++step) {
    std::vector<BeamEntry> expansions;
    for (const BeamEntry& beam : beams) {
      const ActionDistribution dist =
          action_distribution(policy, enc, EdgeSet(beam.sequence), ctx.target_class());
      for (std::size_t i = 0; i < dist.candidates.size(); ++i) {
        BeamEntry next = beam;
        next.sequence.push_back(dist.candidates[i]);
        next.log_prob += dist.log_probs(idx(i));
        expansions.push_back(std::move(next));
      }
    }
    const std::size_t keep = std::min(width, expansions.size());
    std::partial_sort(expansions.begin(), expansions.begin() + static_cast<long>(keep),
                      expansions.end(), beam_order);
    expansions.resize(keep);
    // Rewards only for the survivors; subgraph_prob still holds the parent's value.
    for (BeamEntry& b : expansions) {
      const SubgraphPrediction pred = ctx.evaluate(EdgeSet(b.sequence));
      b.reward += reward_from_probs(reward_mode, ctx.full_prob(), b.subgraph_prob,
                                    pred.target_prob,
                                    pred.predicted_class == ctx.target_class());
      b.subgraph_prob = pred.target_prob;
    }
    beams = std::move(expansions);
  }
  BeamResult result;
  result.finalists = beams;
  std::sort(result.finalists.begin(), result.finalists.end(), final_order);
  result.best = result.finalists.front();
  return result;
}

RankedEdges beam_explain(const PolicyParams& policy, const AttributionContext& ctx, std::size_t k,
                         std::size_t width, RewardMode reward_mode) {
  return rank_by_position(beam_search(policy, ctx, k, width, reward_mode).best.sequence,
                          ctx.graph().num_edges());
}

RankedEdges full_ranking(const PolicyParams& policy, const AttributionContext& ctx) {
  const std::size_t n = ctx.graph().num_edges();
  if (n == 0) return {};
  const Trajectory traj = rollout(policy, ctx, n, RolloutMode::kGreedy, 0);
  return rank_by_position(traj.edge_order(), n);
}

Explainer make_rc_explainer(const PolicyParams& policy, double prob_floor) {
  return [policy, prob_floor](const ModelParams& model, const Graph& graph, int target_class) {
    if (graph.num_edges() == 0) return RankedEdges{};
    const AttributionContext ctx(model, graph, target_class, prob_floor);
    return full_ranking(policy, ctx);
  };
}

json policy_to_json(const PolicyParams& policy) {
  const PolicySpec& spec = policy.spec();
  return json{{"schema_version", kPolicySchemaVersion},
              {"spec",
               {{"encoder", spec_to_json(spec.encoder)},
                {"edge_feature_dim", spec.edge_feature_dim},
                {"edge_hidden", spec.edge_hidden},
                {"edge_dim", spec.edge_dim},
                {"score_hidden", spec.score_hidden},
                {"num_classes", spec.num_classes}}},
              {"encoder", params_to_json(policy.encoder())},
              {"edge_mlp", edge_mlp_to_json(policy.head().edge)},
              {"score_mlp", score_mlp_to_json(policy.head().score)}};
}

PolicyParams policy_from_json(const json& j) {
  if (!j.is_object() || j.value("schema_version", -1) != kPolicySchemaVersion) {
    throw ParseError("policy: missing or unsupported schema_version");
  }
  PolicySpec spec;
  try {
    const json& s = j.at("spec");
    spec.encoder = spec_from_json(s.at("encoder"));
    spec.edge_feature_dim = s.at("edge_feature_dim").get<int>();
    spec.edge_hidden = s.at("edge_hidden").get<int>();
    spec.edge_dim = s.at("edge_dim").get<int>();
    spec.score_hidden = s.at("score_hidden").get<int>();
    spec.num_classes = s.at("num_classes").get<int>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("policy spec: ") + e.what());
  }
  ModelParams encoder = params_from_json(j.at("encoder"));
  PolicyHead head;
  try {
    const json& em = j.at("edge_mlp");
    head.edge = {matrix_from_json(em.at("w1")), vector_from_json(em.at("b1")),
                 matrix_from_json(em.at("w2")), vector_from_json(em.at("b2"))};
    const json& sm = j.at("score_mlp");
    head.score = {matrix_from_json(sm.at("w3")), vector_from_json(sm.at("b3")),
                  matrix_from_json(sm.at("heads"))};
  } catch (const json::exception& e) {
    throw ParseError(std::string("policy weights: ") + e.what());
  }
  return PolicyParams(std::move(spec), std::move(encoder), std::move(head));
}

void write_policy(const PolicyParams& policy, const std::filesystem::path& path) {
  write_text_file(path, policy_to_json(policy).dump(1) + "\n");
}

PolicyParams read_policy(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("policy file '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return policy_from_json(j);
}

}  // namespace rcx
