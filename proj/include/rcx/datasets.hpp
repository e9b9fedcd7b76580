#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

#include "rcx/graph.hpp"

namespace rcx {

enum class Motif { kTriangle = 0, kSquare = 1, kStar = 2 };

struct MotifConfig {
  std::size_t num_graphs = 300;
  int num_classes = 3;
  // Base graph size is drawn from [base_nodes, base_nodes + base_nodes / 2].
  std::size_t base_nodes = 24;
  // One-hot width; degrees >= width - 1 share the last slot.
  std::size_t feature_width = 5;
  // Extra (cycle-closing) base edges per base node, on average.
  double extra_edge_ratio = 0.2;
  std::uint64_t seed = 0;
};

// Random tree-plus-extra-edges graphs, each with one class motif attached by
// a single bridge edge: class 0 a triangle, class 1 a 4-cycle, class 2 a
// star with 5 leaves. Base graphs have girth >= 5 and maximum degree 3, so
// the motif is the only triangle, 4-cycle or degree >= 5 node. Labels cycle
// through the classes; ground truth is the motif's edges (not the bridge).
Dataset generate_planted_motif(const MotifConfig& config);

inline constexpr std::array<double, 3> kDefaultSplitRatios{0.8, 0.1, 0.1};

// Seeded per-class shuffle into train/valid/test. Global split sizes follow
// largest remainder; every class lands within one graph of its exact share
// in every split.
Dataset split_dataset(Dataset dataset, const std::array<double, 3>& ratios, std::uint64_t seed);

}  // namespace rcx
