#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "rcx/explanation.hpp"
#include "rcx/gnn.hpp"
#include "rcx/graph.hpp"

namespace rcx {

// 1-based ranks; tied values share the average of their positions.
std::vector<double> fractional_ranks(std::span<const double> values);

// Pearson correlation of the fractional rank vectors.
double spearman(std::span<const double> x, std::span<const double> y);

// 1 if f(G) equals f on the subgraph of the top ceil(ratio * |E|) edges.
bool acc_at_ratio(const ModelParams& model, const Graph& graph, const RankedEdges& ranked,
                  double ratio);

// 0.1, 0.2, ..., 1.0
const std::array<double, 10>& acc_ratios();

struct AccCurve {
  std::vector<double> ratios;
  std::vector<double> accuracy;  // split mean per ratio
  double auc = 0.0;              // mean of `accuracy`
};

// Explains each graph's predicted class once and scores every ratio.
AccCurve acc_curve(const ModelParams& model, const std::vector<const Graph*>& graphs,
                   const Explainer& explainer, int threads = 1);

// Same computation from precomputed rankings (one per graph).
AccCurve acc_curve(const ModelParams& model, const std::vector<const Graph*>& graphs,
                   const std::vector<RankedEdges>& rankings);

void write_acc_curve(const AccCurve& curve, const std::filesystem::path& path);

// CST and SC skip pairs where either attribution is constant (Spearman is
// undefined there); `undefined` receives the number of graphs left with no
// defined pair. Throws UndefinedMetricError when that is every graph.

// Mean over graphs and classes s != f(G) of |spearman(Phi(G, f(G)), Phi(G, s))|.
double contrastivity(const Explainer& explainer, const ModelParams& model,
                     const std::vector<const Graph*>& graphs, int threads = 1,
                     std::size_t* undefined = nullptr);

// Mean over graphs of |spearman(Phi(G, f, f(G)), Phi(G, f~, f~(G)))|.
double sanity_check(const Explainer& explainer, const ModelParams& model,
                    const ModelParams& randomized, const std::vector<const Graph*>& graphs,
                    int threads = 1, std::size_t* undefined = nullptr);

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
};

PrecisionRecall gt_precision_recall(const RankedEdges& ranked, const EdgeSet& truth,
                                    std::size_t k);

}  // namespace rcx
