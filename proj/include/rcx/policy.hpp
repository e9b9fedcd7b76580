#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <json.hpp>

#include "rcx/attribution.hpp"
#include "rcx/explanation.hpp"
#include "rcx/gnn.hpp"
#include "rcx/graph.hpp"
#include "rcx/optim.hpp"

namespace rcx {

struct PolicySpec {
  // Encoder g; its output width is d'. The predictor head is never used.
  ModelSpec encoder;
  int edge_feature_dim = 0;
  int edge_hidden = 64;
  int edge_dim = 32;  // d''
  int score_hidden = 32;
  int num_classes = 2;

  int state_dim() const { return encoder.output_dim(); }
  int edge_input_dim() const { return 2 * state_dim() + edge_feature_dim; }
  void validate() const;

  friend bool operator==(const PolicySpec&, const PolicySpec&) = default;
};

// g mirrors the depth of the target model with its own width.
PolicySpec default_policy_spec(const ModelSpec& target, int edge_feature_dim = 0, int width = 32);

// z_e = W2 relu(W1 [z_u | z_v | x_e] + b1) + b2
struct EdgeMlp {
  Eigen::MatrixXd w1;
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;
  Eigen::VectorXd b2;
};

// logit_c(e) = heads.row(c) . relu(W3 [z_e | z_state] + b3). The shared first
// layer feeds one linear head per class; a head bias would cancel in the
// softmax, so there is none.
struct ScoreMlp {
  Eigen::MatrixXd w3;
  Eigen::VectorXd b3;
  Eigen::MatrixXd heads;  // C x score_hidden
};

struct PolicyHead {
  EdgeMlp edge;
  ScoreMlp score;

  static PolicyHead zeros(const PolicySpec& spec);
};

template <typename Head, typename F>
  requires std::same_as<std::remove_const_t<Head>, PolicyHead>
void visit_tensors(Head& h, F&& f) {
  f(h.edge.w1);
  f(h.edge.b1);
  f(h.edge.w2);
  f(h.edge.b2);
  f(h.score.w3);
  f(h.score.b3);
  f(h.score.heads);
}

struct PolicyGrads {
  GnnWeights encoder;
  PolicyHead head;

  static PolicyGrads zeros(const PolicySpec& spec);
  // Encoder tensors first, then the head, matching PolicyParams::flat().
  std::vector<double> flat() const;
};

class PolicyParams {
 public:
  PolicyParams(PolicySpec spec, ModelParams encoder, PolicyHead head);

  const PolicySpec& spec() const noexcept { return spec_; }
  const ModelParams& encoder() const noexcept { return encoder_; }
  const PolicyHead& head() const noexcept { return head_; }
  std::size_t num_parameters() const;

  std::vector<double> flat() const;
  void assign(std::span<const double> flat);

  friend bool operator==(const PolicyParams& a, const PolicyParams& b);

 private:
  PolicySpec spec_;
  ModelParams encoder_;
  PolicyHead head_;
};

// Glorot-uniform weights, zero biases; encoder and head use derived seeds.
PolicyParams init_policy(const PolicySpec& spec, std::uint64_t seed);

// Per-graph quantities that do not depend on the selection: g's pass over the
// full graph and every edge's representation.
struct EncodedGraph {
  const Graph* graph = nullptr;
  ForwardTrace encoder_trace;
  Eigen::MatrixXd edge_inputs;      // |E| x (2d' + d2)
  Eigen::MatrixXd edge_pre_hidden;  // |E| x edge_hidden
  Eigen::MatrixXd edge_repr;        // |E| x d''

  const Eigen::MatrixXd& node_repr() const { return encoder_trace.node_representations(); }
};

EncodedGraph encode_graph(const PolicyParams& policy, const Graph& graph);

Eigen::VectorXd action_representation(const PolicyParams& policy, const Graph& graph,
                                      std::size_t edge);

// Sorted unique endpoints of the selected edges.
std::vector<std::size_t> incident_nodes(const Graph& graph, const EdgeSet& selected);

// Mean of g's node representations over incident nodes; zero when empty.
Eigen::VectorXd state_representation(const EncodedGraph& encoded, const EdgeSet& selected);
Eigen::VectorXd state_representation(const PolicyParams& policy, const Graph& graph,
                                     const EdgeSet& selected);

struct ActionDistribution {
  std::vector<std::size_t> candidates;  // edge_complement, ascending
  Eigen::VectorXd logits;
  Eigen::VectorXd probs;
  Eigen::VectorXd log_probs;

  // Position of `edge` among the candidates; throws InvalidActionError.
  std::size_t index_of(std::size_t edge) const;
};

// Max-shifted softmax / log-softmax of arbitrary logits.
void softmax_into(const Eigen::VectorXd& logits, Eigen::VectorXd& probs,
                  Eigen::VectorXd& log_probs);

ActionDistribution action_distribution(const PolicyParams& policy, const EncodedGraph& encoded,
                                       const EdgeSet& selected, int target_class);
ActionDistribution action_distribution(const PolicyParams& policy, const Graph& graph,
                                       const EdgeSet& selected, int target_class);

enum class RolloutMode { kSample, kGreedy };

const char* rollout_mode_name(RolloutMode mode);
RolloutMode parse_rollout_mode(const std::string& name);

// K policy steps from the empty selection. Greedy takes the most probable
// candidate (lowest edge index on ties); sample draws with Rng(seed). Step
// scores are edge ICEs, rewards follow `reward_mode`.
Trajectory rollout(const PolicyParams& policy, const AttributionContext& ctx, std::size_t k,
                   RolloutMode mode, std::uint64_t seed,
                   RewardMode reward_mode = RewardMode::kMutualInformation);

struct Episode {
  const Graph* graph = nullptr;
  Trajectory trajectory;
};

// -(1/B) sum_episodes sum_k (R_k - baseline) log P(e_k | selection, class).
double reinforce_loss(const PolicyParams& policy, std::span<const Episode> batch,
                      double baseline = 0.0);

struct ReinforceGradient {
  double loss = 0.0;
  PolicyGrads grads;
};

ReinforceGradient reinforce_gradient(const PolicyParams& policy, std::span<const Episode> batch,
                                     double baseline = 0.0);

// One Adam step on the policy. Returns the pre-step loss; throws NumericError
// if it is not finite.
double reinforce_update(PolicyParams& policy, std::span<const Episode> batch, Adam& optimizer,
                        double baseline = 0.0);

struct ExplainerHyper {
  int epochs = 50;
  double learning_rate = 1e-3;
  double weight_decay = 1e-5;
  // Training trajectories have K = max(1, ceil(train_ratio * |E|)) steps.
  double train_ratio = 0.25;
  std::size_t batch_size = 16;
  RewardMode reward_mode = RewardMode::kMutualInformation;
  RolloutMode rollout_mode = RolloutMode::kSample;
  // Extension, off by default: subtract a moving average of past rewards.
  bool use_baseline = false;
  double baseline_decay = 0.9;
  double prob_floor = kDefaultProbFloor;
  int threads = 1;
  std::uint64_t seed = 0;
};

struct ExplainerLogRow {
  int epoch = 0;
  double loss = 0.0;
  double mean_reward = 0.0;
  double valid_acc_auc = 0.0;
};

struct ExplainerTrainResult {
  PolicyParams policy;
  std::vector<ExplainerLogRow> log;
  int best_epoch = 0;  // 0 = initial policy
};

// REINFORCE over the training split, explaining f's own predictions. Keeps
// the checkpoint with the best validation ACC-AUC (earliest on ties). Throws
// ContractError if f changes during training.
ExplainerTrainResult train_explainer(const PolicyParams& initial, const ModelParams& target,
                                     const Dataset& dataset, const ExplainerHyper& hyper);

void write_explainer_log(const std::vector<ExplainerLogRow>& log,
                         const std::filesystem::path& path);

struct BeamEntry {
  std::vector<std::size_t> sequence;
  double log_prob = 0.0;
  double reward = 0.0;
  double subgraph_prob = 0.0;
};

struct BeamResult {
  BeamEntry best;
  std::vector<BeamEntry> finalists;
};

// Keeps the `width` partial sequences with the highest cumulative
// log-probability (lexicographic sequence on ties). The answer is the
// finalist with the highest cumulative reward, then log-probability, then
// lexicographic sequence.
BeamResult beam_search(const PolicyParams& policy, const AttributionContext& ctx, std::size_t k,
                       std::size_t width, RewardMode reward_mode = RewardMode::kMutualInformation);

RankedEdges beam_explain(const PolicyParams& policy, const AttributionContext& ctx, std::size_t k,
                         std::size_t width,
                         RewardMode reward_mode = RewardMode::kMutualInformation);

// Greedy rollout over every edge with position-derived scores.
RankedEdges full_ranking(const PolicyParams& policy, const AttributionContext& ctx);

Explainer make_rc_explainer(const PolicyParams& policy, double prob_floor = kDefaultProbFloor);

inline constexpr int kPolicySchemaVersion = 1;

nlohmann::json policy_to_json(const PolicyParams& policy);
PolicyParams policy_from_json(const nlohmann::json& j);
void write_policy(const PolicyParams& policy, const std::filesystem::path& path);
PolicyParams read_policy(const std::filesystem::path& path);

}  // namespace rcx
