#include "rcx/model_zoo.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "rcx/error.hpp"
#include "rcx/json_util.hpp"
#include "rcx/optim.hpp"
#include "rcx/rng.hpp"

namespace rcx {

namespace {

struct SplitScore {
  double accuracy = 0.0;
  double loss = 0.0;
};

SplitScore score_split(const ModelParams& params, const Dataset& dataset, Split split) {
  const auto& indices = dataset.split(split);
  SplitScore s;
  for (std::size_t idx : indices) {
    const Graph& g = dataset.graphs[idx];
    const ForwardTrace trace = forward(params, g);
    s.loss += cross_entropy(trace.probs, g.label());
    if (argmax(trace.probs) == g.label()) s.accuracy += 1.0;
  }
  if (!indices.empty()) {
    s.accuracy /= static_cast<double>(indices.size());
    s.loss /= static_cast<double>(indices.size());
  }
  return s;
}

}  // namespace

ModelSpec default_target_spec(const Dataset& dataset) {
  if (dataset.graphs.empty()) throw ValidationError("dataset has no graphs");
  ModelSpec spec;
  spec.layer_dims = {static_cast<int>(dataset.graphs.front().feature_dim()), 32, 32};
  spec.num_classes = dataset.num_classes;
  spec.readout = Readout::kSum;
  spec.predictor_hidden = 32;
  return spec;
}

TargetTrainResult train_target(const Dataset& dataset, const ModelSpec& spec,
                               const TrainHyper& hyper) {
  spec.validate();
  if (dataset.split(Split::kTrain).empty() || dataset.split(Split::kValid).empty()) {
    throw ValidationError("target training needs non-empty train and valid splits");
  }
  if (spec.num_classes != dataset.num_classes) {
    throw ValidationError("model spec has " + std::to_string(spec.num_classes) +
                          " classes, dataset has " + std::to_string(dataset.num_classes));
  }
  if (!dataset.graphs.empty() &&
      static_cast<int>(dataset.graphs.front().feature_dim()) != spec.input_dim()) {
    throw ShapeError("layer 1: dataset feature dimension " +
                     std::to_string(dataset.graphs.front().feature_dim()) +
                     " does not match model input dimension " + std::to_string(spec.input_dim()));
  }

  ModelParams params = init_params(spec, hyper.seed);
  TargetTrainResult result{params, {}, 0};
  if (hyper.epochs <= 0) return result;

  Adam adam({.learning_rate = hyper.learning_rate, .weight_decay = hyper.weight_decay},
            params.num_parameters());
  Rng rng(mix_seed(hyper.seed, 1));
  std::vector<std::size_t> order = dataset.split(Split::kTrain);
  const std::size_t batch = hyper.batch_size == 0 ? order.size() : hyper.batch_size;

  SplitScore best = score_split(params, dataset, Split::kValid);
  int since_best = 0;
  for (int epoch = 1; epoch <= hyper.epochs; ++epoch) {
    if (hyper.batch_size != 0) rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t stop = std::min(order.size(), start + batch);
      std::vector<double> grad(params.num_parameters(), 0.0);
      const double scale = 1.0 / static_cast<double>(stop - start);
      for (std::size_t i = start; i < stop; ++i) {
        const Graph& g = dataset.graphs[order[i]];
        const ForwardTrace trace = forward(params, g);
        const double loss = cross_entropy(trace.probs, g.label());
        if (!std::isfinite(loss)) {
          throw NumericError("non-finite training loss at epoch " + std::to_string(epoch) +
                             " on graph '" + g.id() + "'");
        }
        epoch_loss += loss;
        const std::vector<double> g_flat =
            flatten(backward(trace, params, cross_entropy_logit_grad(trace.probs, g.label())));
        for (std::size_t k = 0; k < grad.size(); ++k) grad[k] += scale * g_flat[k];
      }
      std::vector<double> flat = flatten(params.weights());
      adam.step(flat, grad);
      unflatten(params.mutable_weights(), flat);
    }
    epoch_loss /= static_cast<double>(order.size());

    const SplitScore train = score_split(params, dataset, Split::kTrain);
    const SplitScore valid = score_split(params, dataset, Split::kValid);
    result.log.push_back({epoch, epoch_loss, train.accuracy, valid.accuracy});
    if (valid.accuracy > best.accuracy ||
        (valid.accuracy == best.accuracy && valid.loss < best.loss)) {
      best = valid;
      result.params = params;
      result.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= hyper.patience) {
      break;
    }
  }
  return result;
}

int predict_class(const ModelParams& params, const Graph& graph) {
  return argmax(forward(params, graph).probs);
}

double evaluate_accuracy(const ModelParams& params, const Dataset& dataset, Split split) {
  if (dataset.split(split).empty()) {
    throw UndefinedMetricError(std::string("accuracy undefined on empty split '") +
                               split_name(split) + "'");
  }
  return score_split(params, dataset, split).accuracy;
}

ModelParams randomized_clone(const ModelParams& params, std::uint64_t seed) {
  return init_params(params.spec(), seed);
}

void write_target_log(const std::vector<TargetLogRow>& log, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "epoch,loss,train_acc,valid_acc\n";
  char buf[128];
  for (const auto& row : log) {
    std::snprintf(buf, sizeof buf, "%d,%.10g,%.10g,%.10g\n", row.epoch, row.loss,
                  row.train_accuracy, row.valid_accuracy);
    out << buf;
  }
  write_text_file(path, out.str());
}

}  // namespace rcx
