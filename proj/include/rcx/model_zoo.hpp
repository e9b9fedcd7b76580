#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "rcx/gnn.hpp"
#include "rcx/graph.hpp"

namespace rcx {

struct TrainHyper {
  int epochs = 300;
  double learning_rate = 1e-3;
  double weight_decay = 1e-5;
  // Epochs without validation improvement before stopping.
  int patience = 100;
  // 0 = full training split per step.
  std::size_t batch_size = 0;
  std::uint64_t seed = 0;
};

struct TargetLogRow {
  int epoch = 0;
  double loss = 0.0;
  double train_accuracy = 0.0;
  double valid_accuracy = 0.0;
};

struct TargetTrainResult {
  ModelParams params;
  std::vector<TargetLogRow> log;
  int best_epoch = 0;  // 0 = initial parameters
};

// Default architecture for a dataset: two 32-wide GIN layers, sum readout.
ModelSpec default_target_spec(const Dataset& dataset);

// Cross-entropy training with Adam; keeps the parameters with the best
// validation accuracy (ties: lower validation loss, then earlier epoch).
TargetTrainResult train_target(const Dataset& dataset, const ModelSpec& spec,
                               const TrainHyper& hyper);

int predict_class(const ModelParams& params, const Graph& graph);

// Fraction of split graphs whose argmax class equals the label.
double evaluate_accuracy(const ModelParams& params, const Dataset& dataset, Split split);

// Same spec, fresh init_params(spec, seed) weights.
ModelParams randomized_clone(const ModelParams& params, std::uint64_t seed);

void write_target_log(const std::vector<TargetLogRow>& log, const std::filesystem::path& path);

}  // namespace rcx
