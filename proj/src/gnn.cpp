#include "rcx/gnn.hpp"

#include <atomic>
#include <cmath>

#include "rcx/error.hpp"
#include "rcx/json_util.hpp"
#include "rcx/rng.hpp"

namespace rcx {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using nlohmann::json;

namespace {

std::uint64_t next_version() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1, std::memory_order_relaxed);
}

MatrixXd relu(const MatrixXd& x) { return x.cwiseMax(0.0); }
VectorXd relu(const VectorXd& x) { return x.cwiseMax(0.0); }

MatrixXd relu_mask(const MatrixXd& pre) { return (pre.array() > 0.0).cast<double>().matrix(); }
VectorXd relu_mask(const VectorXd& pre) { return (pre.array() > 0.0).cast<double>().matrix(); }

// Row v of the result is the sum of rows u over the neighbors of v; each
// undirected edge contributes in both directions.
MatrixXd aggregate(const MatrixXd& z, const std::vector<Edge>& edges) {
  MatrixXd out = MatrixXd::Zero(z.rows(), z.cols());
  for (const Edge& e : edges) {
    const auto u = static_cast<Eigen::Index>(e.u);
    const auto v = static_cast<Eigen::Index>(e.v);
    out.row(u) += z.row(v);
    out.row(v) += z.row(u);
  }
  return out;
}

std::string shape(Eigen::Index r, Eigen::Index c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

void expect_shape(const MatrixXd& m, Eigen::Index rows, Eigen::Index cols, const std::string& what) {
  if (m.rows() != rows || m.cols() != cols) {
    throw ValidationError(what + " has shape " + shape(m.rows(), m.cols()) + ", expected " +
                          shape(rows, cols));
  }
}

void expect_size(const VectorXd& v, Eigen::Index n, const std::string& what) {
  if (v.size() != n) {
    throw ValidationError(what + " has length " + std::to_string(v.size()) + ", expected " +
                          std::to_string(n));
  }
}

void check_weights(const ModelSpec& spec, const GnnWeights& w) {
  if (static_cast<int>(w.layers.size()) != spec.num_layers()) {
    throw ValidationError("expected " + std::to_string(spec.num_layers()) + " layers, found " +
                          std::to_string(w.layers.size()));
  }
  for (int l = 0; l < spec.num_layers(); ++l) {
    const std::string name = "layer " + std::to_string(l + 1);
    const GinLayer& layer = w.layers[static_cast<std::size_t>(l)];
    const int in = spec.layer_dims[static_cast<std::size_t>(l)];
    const int out = spec.layer_dims[static_cast<std::size_t>(l) + 1];
    expect_shape(layer.w1, out, in, name + " w1");
    expect_size(layer.b1, out, name + " b1");
    expect_shape(layer.w2, out, out, name + " w2");
    expect_size(layer.b2, out, name + " b2");
  }
  expect_shape(w.predictor.w1, spec.predictor_hidden, spec.output_dim(), "predictor w1");
  expect_size(w.predictor.b1, spec.predictor_hidden, "predictor b1");
  expect_shape(w.predictor.w2, spec.num_classes, spec.predictor_hidden, "predictor w2");
  expect_size(w.predictor.b2, spec.num_classes, "predictor b2");
  visit_tensors(w, [](const auto& t) {
    if (!t.allFinite()) throw ValidationError("parameters contain non-finite values");
  });
}

}  // namespace

void glorot_uniform(MatrixXd& m, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
  // Column-major fill order is part of the determinism contract.
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-bound, bound);
}

const char* readout_name(Readout r) { return r == Readout::kSum ? "sum" : "mean"; }

Readout parse_readout(const std::string& name) {
  if (name == "sum") return Readout::kSum;
  if (name == "mean") return Readout::kMean;
  throw ValidationError("unknown readout '" + name + "' (expected sum|mean)");
}

void ModelSpec::validate() const {
  if (layer_dims.size() < 2) throw ValidationError("model spec needs at least one layer");
  for (int d : layer_dims) {
    if (d < 1) throw ValidationError("model spec layer dimensions must be >= 1");
  }
  if (num_classes < 1) throw ValidationError("model spec num_classes must be >= 1");
  if (predictor_hidden < 1) throw ValidationError("model spec predictor_hidden must be >= 1");
}

GnnWeights GnnWeights::zeros(const ModelSpec& spec) {
  spec.validate();
  GnnWeights w;
  for (int l = 0; l < spec.num_layers(); ++l) {
    const int in = spec.layer_dims[static_cast<std::size_t>(l)];
    const int out = spec.layer_dims[static_cast<std::size_t>(l) + 1];
    w.layers.push_back({MatrixXd::Zero(out, in), VectorXd::Zero(out), MatrixXd::Zero(out, out),
                        VectorXd::Zero(out)});
  }
  w.predictor = {MatrixXd::Zero(spec.predictor_hidden, spec.output_dim()),
                 VectorXd::Zero(spec.predictor_hidden),
                 MatrixXd::Zero(spec.num_classes, spec.predictor_hidden),
                 VectorXd::Zero(spec.num_classes)};
  return w;
}

ModelParams::ModelParams(ModelSpec spec, GnnWeights weights)
    : spec_(std::move(spec)), weights_(std::move(weights)), version_(next_version()) {
  spec_.validate();
  check_weights(spec_, weights_);
}

GnnWeights& ModelParams::mutable_weights() {
  version_ = next_version();
  return weights_;
}

std::size_t ModelParams::num_parameters() const {
  std::size_t n = 0;
  visit_tensors(weights_, [&](const auto& t) { n += static_cast<std::size_t>(t.size()); });
  return n;
}

bool operator==(const ModelParams& a, const ModelParams& b) {
  return a.spec_ == b.spec_ && flatten(a.weights_) == flatten(b.weights_);
}

ModelParams init_params(const ModelSpec& spec, std::uint64_t seed) {
  GnnWeights w = GnnWeights::zeros(spec);
  Rng rng(seed);
  for (GinLayer& layer : w.layers) {
    glorot_uniform(layer.w1, rng);
    glorot_uniform(layer.w2, rng);
  }
  glorot_uniform(w.predictor.w1, rng);
  glorot_uniform(w.predictor.w2, rng);
  return ModelParams(spec, std::move(w));
}

ForwardTrace forward(const ModelParams& params, const Graph& graph) {
  const ModelSpec& spec = params.spec();
  const GnnWeights& w = params.weights();
  if (static_cast<int>(graph.feature_dim()) != spec.input_dim()) {
    throw ShapeError("layer 1: graph '" + graph.id() + "' has feature dimension " +
                     std::to_string(graph.feature_dim()) + " but the model expects " +
                     std::to_string(spec.input_dim()));
  }
  if (graph.num_nodes() == 0) throw ShapeError("graph '" + graph.id() + "' has no nodes");

  ForwardTrace trace;
  trace.param_version = params.version();
  trace.num_nodes = graph.num_nodes();
  trace.edges = graph.edges();
  MatrixXd z = graph.node_features();
  for (const GinLayer& layer : w.layers) {
    LayerTrace lt;
    lt.aggregated = aggregate(z, trace.edges);
    lt.pre_hidden = ((z + lt.aggregated) * layer.w1.transpose()).rowwise() + layer.b1.transpose();
    lt.pre_output = (relu(lt.pre_hidden) * layer.w2.transpose()).rowwise() + layer.b2.transpose();
    lt.output = relu(lt.pre_output);
    lt.input = std::move(z);
    z = lt.output;
    trace.layers.push_back(std::move(lt));
  }
  trace.readout = z.colwise().sum().transpose();
  if (spec.readout == Readout::kMean) trace.readout /= static_cast<double>(graph.num_nodes());
  trace.predictor_pre = w.predictor.w1 * trace.readout + w.predictor.b1;
  trace.logits = w.predictor.w2 * relu(trace.predictor_pre) + w.predictor.b2;
  trace.probs = softmax(trace.logits);
  return trace;
}

ParamGrads backward(const ForwardTrace& trace, const ModelParams& params,
                    const VectorXd& logit_grad) {
  return backward(trace, params, logit_grad, MatrixXd());
}

ParamGrads backward(const ForwardTrace& trace, const ModelParams& params,
                    const VectorXd& logit_grad, const MatrixXd& node_grad) {
  if (trace.param_version != params.version()) {
    throw ContractError("forward trace was produced by a different parameter version (" +
                        std::to_string(trace.param_version) + " vs " +
                        std::to_string(params.version()) + ")");
  }
  const ModelSpec& spec = params.spec();
  const GnnWeights& w = params.weights();
  const auto n = static_cast<Eigen::Index>(trace.num_nodes);
  if (logit_grad.size() != spec.num_classes) {
    throw ShapeError("logit gradient has length " + std::to_string(logit_grad.size()) +
                     ", expected " + std::to_string(spec.num_classes));
  }
  const bool has_node_grad = node_grad.size() > 0;
  if (has_node_grad && (node_grad.rows() != n || node_grad.cols() != spec.output_dim())) {
    throw ShapeError("node gradient has shape " + shape(node_grad.rows(), node_grad.cols()) +
                     ", expected " + shape(n, spec.output_dim()));
  }

  ParamGrads g = GnnWeights::zeros(spec);
  const VectorXd hidden = relu(trace.predictor_pre);
  g.predictor.w2 = logit_grad * hidden.transpose();
  g.predictor.b2 = logit_grad;
  const VectorXd d_pre = (w.predictor.w2.transpose() * logit_grad).cwiseProduct(relu_mask(trace.predictor_pre));
  g.predictor.w1 = d_pre * trace.readout.transpose();
  g.predictor.b1 = d_pre;
  VectorXd d_readout = w.predictor.w1.transpose() * d_pre;
  if (spec.readout == Readout::kMean) d_readout /= static_cast<double>(n);

  MatrixXd d_z = d_readout.transpose().replicate(n, 1);
  if (has_node_grad) d_z += node_grad;

  for (int l = spec.num_layers() - 1; l >= 0; --l) {
    const LayerTrace& lt = trace.layers[static_cast<std::size_t>(l)];
    const GinLayer& layer = w.layers[static_cast<std::size_t>(l)];
    GinLayer& gl = g.layers[static_cast<std::size_t>(l)];
    const MatrixXd d_pre_out = d_z.cwiseProduct(relu_mask(lt.pre_output));
    gl.w2 = d_pre_out.transpose() * relu(lt.pre_hidden);
    gl.b2 = d_pre_out.colwise().sum().transpose();
    const MatrixXd d_pre_hidden = (d_pre_out * layer.w2).cwiseProduct(relu_mask(lt.pre_hidden));
    gl.w1 = d_pre_hidden.transpose() * (lt.input + lt.aggregated);
    gl.b1 = d_pre_hidden.colwise().sum().transpose();
    if (l > 0) {
      const MatrixXd d_h = d_pre_hidden * layer.w1;
      // Aggregation is symmetric, so its adjoint is itself.
      d_z = d_h + aggregate(d_h, trace.edges);
    }
  }
  return g;
}

VectorXd softmax(const VectorXd& logits) {
  const VectorXd shifted = logits.array() - logits.maxCoeff();
  VectorXd e = shifted.array().exp();
  return e / e.sum();
}

int argmax(const VectorXd& values) {
  int best = 0;
  for (int i = 1; i < values.size(); ++i) {
    if (values(i) > values(best)) best = i;
  }
  return best;
}

double cross_entropy(const VectorXd& probs, int label) {
  return -std::log(std::max(probs(label), 1e-300));
}

VectorXd cross_entropy_logit_grad(const VectorXd& probs, int label) {
  VectorXd g = probs;
  g(label) -= 1.0;
  return g;
}

json spec_to_json(const ModelSpec& spec) {
  return json{{"layer_dims", spec.layer_dims},
              {"num_classes", spec.num_classes},
              {"readout", readout_name(spec.readout)},
              {"predictor_hidden", spec.predictor_hidden}};
}

ModelSpec spec_from_json(const json& j) {
  ModelSpec spec;
  try {
    spec.layer_dims = j.at("layer_dims").get<std::vector<int>>();
    spec.num_classes = j.at("num_classes").get<int>();
    spec.readout = parse_readout(j.at("readout").get<std::string>());
    spec.predictor_hidden = j.at("predictor_hidden").get<int>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("model spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

json params_to_json(const ModelParams& params) {
  const GnnWeights& w = params.weights();
  json layers = json::array();
  for (std::size_t l = 0; l < w.layers.size(); ++l) {
    const std::string name = "layer " + std::to_string(l + 1);
    const GinLayer& layer = w.layers[l];
    layers.push_back({{"w1", matrix_to_json(layer.w1, name)},
                      {"b1", vector_to_json(layer.b1, name)},
                      {"w2", matrix_to_json(layer.w2, name)},
                      {"b2", vector_to_json(layer.b2, name)}});
  }
  return json{{"schema_version", kParamsSchemaVersion},
              {"spec", spec_to_json(params.spec())},
              {"layers", std::move(layers)},
              {"predictor",
               {{"w1", matrix_to_json(w.predictor.w1, "predictor")},
                {"b1", vector_to_json(w.predictor.b1, "predictor")},
                {"w2", matrix_to_json(w.predictor.w2, "predictor")},
                {"b2", vector_to_json(w.predictor.b2, "predictor")}}}};
}

ModelParams params_from_json(const json& j) {
  if (!j.is_object() || j.value("schema_version", -1) != kParamsSchemaVersion) {
    throw ParseError("model parameters: missing or unsupported schema_version");
  }
  ModelSpec spec = spec_from_json(j.at("spec"));
  GnnWeights w;
  const json& layers = j.at("layers");
  if (!layers.is_array() || static_cast<int>(layers.size()) != spec.num_layers()) {
    throw ValidationError("model parameters: expected " + std::to_string(spec.num_layers()) +
                          " layers");
  }
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const std::string name = "layer " + std::to_string(l + 1);
    try {
      const json& jl = layers[l];
      w.layers.push_back({matrix_from_json(jl.at("w1")), vector_from_json(jl.at("b1")),
                          matrix_from_json(jl.at("w2")), vector_from_json(jl.at("b2"))});
    } catch (const std::exception& e) {
      throw ValidationError(name + ": " + e.what());
    }
  }
  try {
    const json& p = j.at("predictor");
    w.predictor = {matrix_from_json(p.at("w1")), vector_from_json(p.at("b1")),
                   matrix_from_json(p.at("w2")), vector_from_json(p.at("b2"))};
  } catch (const std::exception& e) {
    throw ValidationError(std::string("predictor: ") + e.what());
  }
  return ModelParams(std::move(spec), std::move(w));
}

void write_params(const ModelParams& params, const std::filesystem::path& path) {
  write_text_file(path, params_to_json(params).dump(1) + "\n");
}

ModelParams read_params(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
  return params_from_json(j);
}

ModelParams read_params(const std::filesystem::path& path, const ModelSpec& expected) {
  ModelParams params = read_params(path);
  if (!(params.spec() == expected)) {
    throw ValidationError("'" + path.string() + "' was saved under a different model spec");
  }
  return params;
}

}  // namespace rcx
