#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <concepts>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "rcx/graph.hpp"

namespace rcx {

enum class Readout { kSum, kMean };

const char* readout_name(Readout r);
Readout parse_readout(const std::string& name);

struct ModelSpec {
  // d_0 .. d_L; d_0 is the node feature dimension.
  std::vector<int> layer_dims;
  int num_classes = 2;
  Readout readout = Readout::kSum;
  int predictor_hidden = 32;

  int num_layers() const { return static_cast<int>(layer_dims.size()) - 1; }
  int input_dim() const { return layer_dims.front(); }
  int output_dim() const { return layer_dims.back(); }
  void validate() const;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

// GIN-style update: z' = relu(W2 relu(W1 (z + sum_{u in N(v)} z_u) + b1) + b2).
// Weights are stored (out x in).
struct GinLayer {
  Eigen::MatrixXd w1;
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;
  Eigen::VectorXd b2;
};

// logits = W2 relu(W1 z_G + b1) + b2
struct PredictorHead {
  Eigen::MatrixXd w1;
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;
  Eigen::VectorXd b2;
};

struct GnnWeights {
  std::vector<GinLayer> layers;
  PredictorHead predictor;

  // Zero tensors with the shapes `spec` implies.
  static GnnWeights zeros(const ModelSpec& spec);
};

// Gradients share the parameter layout.
using ParamGrads = GnnWeights;

// Calls f on every tensor in a fixed canonical order.
template <typename Weights, typename F>
  requires std::same_as<std::remove_const_t<Weights>, GnnWeights>
void visit_tensors(Weights& w, F&& f) {
  for (auto& layer : w.layers) {
    f(layer.w1);
    f(layer.b1);
    f(layer.w2);
    f(layer.b2);
  }
  f(w.predictor.w1);
  f(w.predictor.b1);
  f(w.predictor.w2);
  f(w.predictor.b2);
}

// Concatenation of every tensor (column-major within a tensor), in visit order.
template <typename Weights>
std::vector<double> flatten(const Weights& w) {
  std::vector<double> out;
  visit_tensors(w, [&](const auto& t) { out.insert(out.end(), t.data(), t.data() + t.size()); });
  return out;
}

template <typename Weights>
void unflatten(Weights& w, std::span<const double> flat) {
  std::size_t offset = 0;
  visit_tensors(w, [&](auto& t) {
    std::copy_n(flat.begin() + static_cast<long>(offset), t.size(), t.data());
    offset += static_cast<std::size_t>(t.size());
  });
}

// Parameters of a message-passing classifier. Every mutable access bumps
// `version()`, which forward traces record so stale traces are rejected.
class ModelParams {
 public:
  ModelParams(ModelSpec spec, GnnWeights weights);

  const ModelSpec& spec() const noexcept { return spec_; }
  const GnnWeights& weights() const noexcept { return weights_; }
  GnnWeights& mutable_weights();
  std::uint64_t version() const noexcept { return version_; }
  std::size_t num_parameters() const;

  // Same spec and bit-identical weights.
  friend bool operator==(const ModelParams& a, const ModelParams& b);

 private:
  ModelSpec spec_;
  GnnWeights weights_;
  std::uint64_t version_;
};

class Rng;

// Fills m with U(-sqrt(6/(rows+cols)), +sqrt(...)) in column-major order.
void glorot_uniform(Eigen::MatrixXd& m, Rng& rng);

// Glorot-uniform weights, U(-sqrt(6/(fan_in+fan_out)), +sqrt(...)); zero biases.
ModelParams init_params(const ModelSpec& spec, std::uint64_t seed);

struct LayerTrace {
  Eigen::MatrixXd input;       // z^(l-1), one row per node
  Eigen::MatrixXd aggregated;  // a^(l) = sum of neighbor rows
  Eigen::MatrixXd pre_hidden;  // W1 (z + a) + b1
  Eigen::MatrixXd pre_output;  // W2 relu(pre_hidden) + b2
  Eigen::MatrixXd output;      // z^(l)
};

struct ForwardTrace {
  std::uint64_t param_version = 0;
  std::size_t num_nodes = 0;
  std::vector<Edge> edges;
  std::vector<LayerTrace> layers;
  Eigen::VectorXd readout;  // z_G
  Eigen::VectorXd predictor_pre;
  Eigen::VectorXd logits;
  Eigen::VectorXd probs;

  // Final-layer node states, used as z_v.
  const Eigen::MatrixXd& node_representations() const { return layers.back().output; }
};

ForwardTrace forward(const ModelParams& params, const Graph& graph);

// Reverse-mode gradient of a scalar loss given dL/dlogits.
ParamGrads backward(const ForwardTrace& trace, const ModelParams& params,
                    const Eigen::VectorXd& logit_grad);

// As above, plus a direct gradient on the final node representations
// (|V| x d_L). Either seed may be zero.
ParamGrads backward(const ForwardTrace& trace, const ModelParams& params,
                    const Eigen::VectorXd& logit_grad, const Eigen::MatrixXd& node_grad);

Eigen::VectorXd softmax(const Eigen::VectorXd& logits);
// Index of the largest entry; ties go to the lowest index.
int argmax(const Eigen::VectorXd& values);

// -log p[label] and its gradient w.r.t. the logits (p - onehot).
double cross_entropy(const Eigen::VectorXd& probs, int label);
Eigen::VectorXd cross_entropy_logit_grad(const Eigen::VectorXd& probs, int label);

inline constexpr int kParamsSchemaVersion = 1;

nlohmann::json spec_to_json(const ModelSpec& spec);
ModelSpec spec_from_json(const nlohmann::json& j);
nlohmann::json params_to_json(const ModelParams& params);
ModelParams params_from_json(const nlohmann::json& j);

void write_params(const ModelParams& params, const std::filesystem::path& path);
ModelParams read_params(const std::filesystem::path& path);
// Rejects files whose embedded spec differs from `expected`.
ModelParams read_params(const std::filesystem::path& path, const ModelSpec& expected);

}  // namespace rcx
