#include "rcx/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <queue>
#include <utility>
#include <vector>

#include "rcx/error.hpp"
#include "rcx/rng.hpp"

namespace rcx {

namespace {

constexpr std::size_t kMaxBaseDegree = 3;
constexpr std::size_t kMinExtraDistance = 4;
constexpr std::size_t kStarLeaves = 5;

struct Builder {
  std::vector<std::vector<std::size_t>> adj;

  std::size_t add_node() {
    adj.emplace_back();
    return adj.size() - 1;
  }
  void add_edge(std::size_t a, std::size_t b) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::size_t degree(std::size_t v) const { return adj[v].size(); }

  // BFS distance, capped at `limit` (returned when the target is farther).
  std::size_t distance(std::size_t from, std::size_t to, std::size_t limit) const {
    std::vector<std::size_t> dist(adj.size(), limit);
    std::queue<std::size_t> frontier;
    dist[from] = 0;
    frontier.push(from);
    while (!frontier.empty()) {
      const std::size_t v = frontier.front();
      frontier.pop();
      if (v == to) return dist[v];
      if (dist[v] + 1 >= limit) continue;
      for (std::size_t u : adj[v]) {
        if (dist[u] == limit) {
          dist[u] = dist[v] + 1;
          frontier.push(u);
        }
      }
    }
    return limit;
  }
};

std::vector<std::size_t> nodes_below_degree(const Builder& b, std::size_t count,
                                            std::size_t max_degree) {
  std::vector<std::size_t> out;
  for (std::size_t v = 0; v < count; ++v) {
    if (b.degree(v) < max_degree) out.push_back(v);
  }
  return out;
}

void build_base(Builder& b, std::size_t n, double extra_ratio, Rng& rng) {
  b.add_node();
  for (std::size_t v = 1; v < n; ++v) {
    const auto open = nodes_below_degree(b, v, kMaxBaseDegree);
    const std::size_t parent = open[rng.below(open.size())];
    b.add_node();
    b.add_edge(parent, v);
  }
  // A random count, so degree histograms alone do not pin down the motif.
  const auto max_extras =
      static_cast<std::size_t>(std::lround(extra_ratio * static_cast<double>(n)));
  const std::size_t extras = rng.below(max_extras + 1);
  std::size_t added = 0;
  for (std::size_t attempt = 0; attempt < 20 * extras + 20 && added < extras; ++attempt) {
    const std::size_t a = rng.below(n);
    const std::size_t c = rng.below(n);
    if (a == c || b.degree(a) >= kMaxBaseDegree || b.degree(c) >= kMaxBaseDegree) continue;
    if (b.distance(a, c, kMinExtraDistance) < kMinExtraDistance) continue;
    b.add_edge(a, c);
    ++added;
  }
}

// Adds the motif, returning its edges as node pairs. Node m0 is the anchor.
std::vector<Edge> add_motif(Builder& b, Motif motif) {
  std::vector<std::size_t> m;
  std::vector<Edge> edges;
  auto link = [&](std::size_t i, std::size_t j) {
    b.add_edge(m[i], m[j]);
    edges.push_back({m[i], m[j]});
  };
  switch (motif) {
    case Motif::kTriangle:
      for (int i = 0; i < 3; ++i) m.push_back(b.add_node());
      link(0, 1);
      link(1, 2);
      link(0, 2);
      break;
    case Motif::kSquare:
      for (int i = 0; i < 4; ++i) m.push_back(b.add_node());
      link(0, 1);
      link(1, 2);
      link(2, 3);
      link(0, 3);
      break;
    case Motif::kStar:
      for (std::size_t i = 0; i <= kStarLeaves; ++i) m.push_back(b.add_node());
      for (std::size_t i = 1; i <= kStarLeaves; ++i) link(0, i);
      break;
  }
  return edges;
}

Graph finish_graph(const Builder& b, const std::vector<Edge>& motif_edges, std::string id,
                   int label, std::size_t feature_width, Rng& rng, EdgeSet& truth) {
  const std::size_t n = b.adj.size();
  std::vector<std::size_t> relabel(n);
  std::iota(relabel.begin(), relabel.end(), 0);
  rng.shuffle(relabel);

  auto canonical = [&](std::size_t a, std::size_t c) {
    Edge e{relabel[a], relabel[c]};
    if (e.u > e.v) std::swap(e.u, e.v);
    return e;
  };
  std::vector<Edge> edges;
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t u : b.adj[v]) {
      if (v < u) edges.push_back(canonical(v, u));
    }
  }
  std::sort(edges.begin(), edges.end());

  std::vector<std::size_t> truth_idx;
  for (const Edge& me : motif_edges) {
    const Edge e = canonical(me.u, me.v);
    const auto it = std::lower_bound(edges.begin(), edges.end(), e);
    truth_idx.push_back(static_cast<std::size_t>(it - edges.begin()));
  }
  std::sort(truth_idx.begin(), truth_idx.end());
  truth = EdgeSet(std::move(truth_idx));

  Eigen::MatrixXd features = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                                   static_cast<Eigen::Index>(feature_width));
  for (std::size_t v = 0; v < n; ++v) {
    const std::size_t slot = std::min(b.degree(v), feature_width - 1);
    features(static_cast<Eigen::Index>(relabel[v]), static_cast<Eigen::Index>(slot)) = 1.0;
  }
  return Graph(std::move(id), std::move(features), std::move(edges), label);
}

// Largest-remainder apportionment of `total` by `ratios`; ties to the lower index.
std::array<std::size_t, 3> apportion(std::size_t total, const std::array<double, 3>& ratios) {
  std::array<std::size_t, 3> out{};
  std::array<double, 3> frac{};
  std::size_t used = 0;
  for (int s = 0; s < 3; ++s) {
    const double exact = ratios[s] * static_cast<double>(total);
    out[s] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    frac[s] = exact - static_cast<double>(out[s]);
    used += out[s];
  }
  while (used < total) {
    int best = 0;
    for (int s = 1; s < 3; ++s) {
      if (frac[s] > frac[best]) best = s;
    }
    ++out[best];
    frac[best] = -1.0;
    ++used;
  }
  return out;
}

// Chooses which splits each class rounds up in, so that column totals hit
// `need`. Prefers splits where the class's exact share is fractional.
bool assign_extras(std::size_t c, const std::vector<std::size_t>& extra_per_class,
                   const std::vector<std::array<bool, 3>>& fractional, bool strict,
                   std::array<std::size_t, 3>& need,
                   std::vector<std::array<std::size_t, 3>>& counts) {
  if (c == extra_per_class.size()) return need == std::array<std::size_t, 3>{};
  const std::size_t want = extra_per_class[c];
  for (unsigned mask = 0; mask < 8; ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) != want) continue;
    bool ok = true;
    for (int s = 0; s < 3 && ok; ++s) {
      if ((mask >> s) & 1U) ok = need[s] > 0 && (!strict || fractional[c][s]);
    }
    if (!ok) continue;
    for (int s = 0; s < 3; ++s) {
      if ((mask >> s) & 1U) {
        --need[s];
        ++counts[c][s];
      }
    }
    if (assign_extras(c + 1, extra_per_class, fractional, strict, need, counts)) return true;
    for (int s = 0; s < 3; ++s) {
      if ((mask >> s) & 1U) {
        ++need[s];
        --counts[c][s];
      }
    }
  }
  return false;
}

}  // namespace

Dataset generate_planted_motif(const MotifConfig& config) {
  if (config.num_graphs < 30) {
    throw ValidationError("planted-motif generation needs at least 30 graphs, got " +
                          std::to_string(config.num_graphs));
  }
  if (config.base_nodes < 8) {
    throw ValidationError("base_nodes must be >= 8, got " + std::to_string(config.base_nodes));
  }
  if (config.num_classes < 2 || config.num_classes > 3) {
    throw ValidationError("num_classes must be 2 or 3, got " +
                          std::to_string(config.num_classes));
  }
  if (config.feature_width < 2) throw ValidationError("feature_width must be >= 2");
  if (!(config.extra_edge_ratio >= 0.0 && config.extra_edge_ratio <= 1.0)) {
    throw ValidationError("extra_edge_ratio must lie in [0, 1]");
  }

  Dataset dataset;
  dataset.num_classes = config.num_classes;
  dataset.graphs.reserve(config.num_graphs);
  dataset.ground_truth.reserve(config.num_graphs);
  for (std::size_t i = 0; i < config.num_graphs; ++i) {
    Rng rng(mix_seed(config.seed, i));
    const int label = static_cast<int>(i % static_cast<std::size_t>(config.num_classes));
    const std::size_t base = config.base_nodes + rng.below(config.base_nodes / 2 + 1);
    Builder b;
    build_base(b, base, config.extra_edge_ratio, rng);
    const auto open = nodes_below_degree(b, base, kMaxBaseDegree);
    const std::size_t anchor = open[rng.below(open.size())];
    const std::size_t first_motif_node = b.adj.size();
    const std::vector<Edge> motif = add_motif(b, static_cast<Motif>(label));
    b.add_edge(anchor, first_motif_node);

    char id[32];
    std::snprintf(id, sizeof id, "g%04zu", i);
    EdgeSet truth;
    dataset.graphs.push_back(finish_graph(b, motif, id, label, config.feature_width, rng, truth));
    dataset.ground_truth.emplace_back(std::move(truth));
  }
  dataset.validate();
  return dataset;
}

Dataset split_dataset(Dataset dataset, const std::array<double, 3>& ratios, std::uint64_t seed) {
  double sum = 0.0;
  for (double r : ratios) {
    if (!(r >= 0.0)) throw ValidationError("split ratios must be non-negative");
    sum += r;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ValidationError("split ratios must sum to 1");

  const auto num_classes = static_cast<std::size_t>(dataset.num_classes);
  std::vector<std::vector<std::size_t>> by_class(num_classes);
  for (std::size_t i = 0; i < dataset.graphs.size(); ++i) {
    by_class.at(static_cast<std::size_t>(dataset.graphs[i].label())).push_back(i);
  }
  for (std::size_t c = 0; c < num_classes; ++c) {
    if (by_class[c].size() < 3) {
      throw ValidationError("cannot stratify: class " + std::to_string(c) + " has " +
                            std::to_string(by_class[c].size()) + " graphs (need >= 3)");
    }
  }

  const auto totals = apportion(dataset.graphs.size(), ratios);
  std::vector<std::array<std::size_t, 3>> counts(num_classes);
  std::vector<std::size_t> extra(num_classes, 0);
  std::vector<std::array<bool, 3>> fractional(num_classes);
  std::array<std::size_t, 3> need = totals;
  for (std::size_t c = 0; c < num_classes; ++c) {
    std::size_t used = 0;
    for (int s = 0; s < 3; ++s) {
      const double exact = ratios[s] * static_cast<double>(by_class[c].size());
      counts[c][s] = static_cast<std::size_t>(std::floor(exact + 1e-9));
      fractional[c][s] = exact - static_cast<double>(counts[c][s]) > 1e-9;
      used += counts[c][s];
      if (counts[c][s] > need[s]) throw ContractError("split apportionment overflow");
      need[s] -= counts[c][s];
    }
    extra[c] = by_class[c].size() - used;
  }
  const auto saved_counts = counts;
  const auto saved_need = need;
  if (!assign_extras(0, extra, fractional, true, need, counts)) {
    counts = saved_counts;
    need = saved_need;
    if (!assign_extras(0, extra, fractional, false, need, counts)) {
      throw ContractError("no stratified split satisfies the per-class bounds");
    }
  }

  for (auto& s : dataset.splits) s.clear();
  for (std::size_t c = 0; c < num_classes; ++c) {
    std::vector<std::size_t> members = by_class[c];
    Rng rng(mix_seed(seed, c));
    rng.shuffle(members);
    std::size_t pos = 0;
    for (int s = 0; s < 3; ++s) {
      for (std::size_t j = 0; j < counts[c][s]; ++j) dataset.splits[s].push_back(members[pos++]);
    }
  }
  for (auto& s : dataset.splits) std::sort(s.begin(), s.end());
  dataset.split_ratios = ratios;
  dataset.validate();
  return dataset;
}

}  // namespace rcx
