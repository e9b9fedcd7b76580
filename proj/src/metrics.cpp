#include "rcx/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <optional>
#include <sstream>

#include "rcx/error.hpp"
#include "rcx/json_util.hpp"
#include "rcx/parallel.hpp"

namespace rcx {

namespace {

void require_graphs(const std::vector<const Graph*>& graphs, const char* what) {
  if (graphs.empty()) throw UndefinedMetricError(std::string(what) + " of an empty split");
}

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

bool is_constant(const std::vector<double>& v) {
  return std::adjacent_find(v.begin(), v.end(), std::not_equal_to<>()) == v.end();
}

// |spearman|, or nothing when either attribution is constant.
std::optional<double> abs_rank_correlation(const std::vector<double>& a,
                                           const std::vector<double>& b) {
  if (is_constant(a) || is_constant(b)) return std::nullopt;
  return std::abs(spearman(a, b));
}

// Mean over graphs with a defined value.
double mean_defined(const std::vector<std::optional<double>>& v, const char* what,
                    std::size_t* undefined) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& x : v) {
    if (!x) continue;
    sum += *x;
    ++count;
  }
  if (undefined != nullptr) *undefined = v.size() - count;
  if (count == 0) {
    throw UndefinedMetricError(std::string(what) + ": every graph has a constant attribution");
  }
  return sum / static_cast<double>(count);
}

}  // namespace

std::vector<double> fractional_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    // Positions i..j (0-based) share rank mean(i+1 .. j+1).
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = rank;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw ValidationError("spearman: length mismatch (" + std::to_string(x.size()) + " vs " +
                          std::to_string(y.size()) + ")");
  }
  if (x.size() < 2) throw ValidationError("spearman: need at least 2 values");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) {
      throw ValidationError("spearman: non-finite input");
    }
  }
  const std::vector<double> rx = fractional_ranks(x);
  const std::vector<double> ry = fractional_ranks(y);
  // Rank means are exactly (n + 1) / 2, so deviations are exact half-integers.
  const double m = 0.5 * static_cast<double>(x.size() + 1);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    const double dx = rx[i] - m;
    const double dy = ry[i] - m;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw UndefinedMetricError("spearman: a rank vector has zero variance");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

bool acc_at_ratio(const ModelParams& model, const Graph& graph, const RankedEdges& ranked,
                  double ratio) {
  const std::size_t k = selection_size(ratio, graph.num_edges());
  if (ranked.size() < k) {
    throw ValidationError("ranking too short: " + std::to_string(ranked.size()) +
                          " edges ranked, K = " + std::to_string(k));
  }
  const int full = argmax(forward(model, graph).probs);
  const int sub = argmax(forward(model, induce_subgraph(graph, ranked.top(k))).probs);
  return full == sub;
}

const std::array<double, 10>& acc_ratios() {
  static const std::array<double, 10> ratios = [] {
    std::array<double, 10> r{};
    for (int i = 0; i < 10; ++i) r[i] = static_cast<double>(i + 1) / 10.0;
    return r;
  }();
  return ratios;
}

AccCurve acc_curve(const ModelParams& model, const std::vector<const Graph*>& graphs,
                   const std::vector<RankedEdges>& rankings) {
  require_graphs(graphs, "ACC-AUC");
  if (rankings.size() != graphs.size()) throw ContractError("one ranking per graph required");
  AccCurve curve;
  curve.ratios.assign(acc_ratios().begin(), acc_ratios().end());
  for (double ratio : curve.ratios) {
    double hits = 0.0;
    for (std::size_t i = 0; i < graphs.size(); ++i) {
      if (acc_at_ratio(model, *graphs[i], rankings[i], ratio)) hits += 1.0;
    }
    curve.accuracy.push_back(hits / static_cast<double>(graphs.size()));
  }
  curve.auc = mean(curve.accuracy);
  return curve;
}

AccCurve acc_curve(const ModelParams& model, const std::vector<const Graph*>& graphs,
                   const Explainer& explainer, int threads) {
  require_graphs(graphs, "ACC-AUC");
  std::vector<RankedEdges> rankings(graphs.size());
  parallel_for(graphs.size(), threads, [&](std::size_t i) {
    const Graph& g = *graphs[i];
    rankings[i] = explainer(model, g, argmax(forward(model, g).probs));
  });
  return acc_curve(model, graphs, rankings);
}

void write_acc_curve(const AccCurve& curve, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "ratio,accuracy\n";
  char line[64];
  for (std::size_t i = 0; i < curve.ratios.size(); ++i) {
    std::snprintf(line, sizeof line, "%.1f,%.10g\n", curve.ratios[i], curve.accuracy[i]);
    out << line;
  }
  write_text_file(path, out.str());
}

double contrastivity(const Explainer& explainer, const ModelParams& model,
                     const std::vector<const Graph*>& graphs, int threads,
                     std::size_t* undefined) {
  require_graphs(graphs, "contrastivity");
  const int classes = model.spec().num_classes;
  if (classes < 2) throw UndefinedMetricError("contrastivity needs at least two classes");
  std::vector<std::optional<double>> per_graph(graphs.size());
  parallel_for(graphs.size(), threads, [&](std::size_t i) {
    const Graph& g = *graphs[i];
    const int predicted = argmax(forward(model, g).probs);
    const auto base = explainer(model, g, predicted).scores_by_edge(g.num_edges());
    double sum = 0.0;
    int pairs = 0;
    for (int s = 0; s < classes; ++s) {
      if (s == predicted) continue;
      const auto other = explainer(model, g, s).scores_by_edge(g.num_edges());
      if (const auto r = abs_rank_correlation(base, other)) {
        sum += *r;
        ++pairs;
      }
    }
    if (pairs > 0) per_graph[i] = sum / static_cast<double>(pairs);
  });
  return mean_defined(per_graph, "contrastivity", undefined);
}

double sanity_check(const Explainer& explainer, const ModelParams& model,
                    const ModelParams& randomized, const std::vector<const Graph*>& graphs,
                    int threads, std::size_t* undefined) {
  require_graphs(graphs, "sanity check");
  if (!(model.spec() == randomized.spec())) {
    throw ValidationError("sanity check: randomized model has a different spec");
  }
  std::vector<std::optional<double>> per_graph(graphs.size());
  parallel_for(graphs.size(), threads, [&](std::size_t i) {
    const Graph& g = *graphs[i];
    const auto trained =
        explainer(model, g, argmax(forward(model, g).probs)).scores_by_edge(g.num_edges());
    const auto random = explainer(randomized, g, argmax(forward(randomized, g).probs))
                            .scores_by_edge(g.num_edges());
    per_graph[i] = abs_rank_correlation(trained, random);
  });
  return mean_defined(per_graph, "sanity check", undefined);
}

PrecisionRecall gt_precision_recall(const RankedEdges& ranked, const EdgeSet& truth,
                                    std::size_t k) {
  if (truth.empty()) throw UndefinedMetricError("precision/recall against an empty ground truth");
  if (k == 0) throw ValidationError("precision/recall needs K >= 1");
  const EdgeSet top = ranked.top(k);
  double hits = 0.0;
  for (std::size_t e : top) {
    if (truth.contains(e)) hits += 1.0;
  }
  return {hits / static_cast<double>(k), hits / static_cast<double>(truth.size())};
}

}  // namespace rcx
