#include "rcx/graph.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "rcx/error.hpp"

namespace rcx {

Graph::Graph(std::string id, Eigen::MatrixXd node_features, std::vector<Edge> edges, int label,
             std::optional<Eigen::MatrixXd> edge_features)
    : id_(std::move(id)),
      node_features_(std::move(node_features)),
      edges_(std::move(edges)),
      edge_features_(std::move(edge_features)),
      label_(label) {
  const std::size_t n = num_nodes();
  std::set<Edge> seen;
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    Edge& e = edges_[i];
    if (e.u >= n || e.v >= n) {
      std::ostringstream msg;
      msg << "graph '" << id_ << "': edge " << i << " (" << e.u << "," << e.v
          << ") references a node >= " << n;
      throw ValidationError(msg.str());
    }
    if (e.u == e.v) {
      throw ValidationError("graph '" + id_ + "': self-loop at edge " + std::to_string(i));
    }
    if (e.u > e.v) std::swap(e.u, e.v);
    if (!seen.insert(e).second) {
      throw ValidationError("graph '" + id_ + "': duplicate edge " + std::to_string(i));
    }
  }
  if (edge_features_ && static_cast<std::size_t>(edge_features_->rows()) != edges_.size()) {
    throw ValidationError("graph '" + id_ + "': edge_features has " +
                          std::to_string(edge_features_->rows()) + " rows for " +
                          std::to_string(edges_.size()) + " edges");
  }
  if (label_ < 0) throw ValidationError("graph '" + id_ + "': negative label");
}

bool operator==(const Graph& a, const Graph& b) {
  if (a.id_ != b.id_ || a.label_ != b.label_ || a.edges_ != b.edges_) return false;
  if (a.node_features_.rows() != b.node_features_.rows() ||
      a.node_features_.cols() != b.node_features_.cols() ||
      a.node_features_ != b.node_features_) {
    return false;
  }
  if (a.edge_features_.has_value() != b.edge_features_.has_value()) return false;
  if (!a.edge_features_) return true;
  return a.edge_features_->rows() == b.edge_features_->rows() &&
         a.edge_features_->cols() == b.edge_features_->cols() &&
         *a.edge_features_ == *b.edge_features_;
}

EdgeSet::EdgeSet(std::vector<std::size_t> order) {
  order_.reserve(order.size());
  for (std::size_t e : order) insert(e);
}

bool EdgeSet::contains(std::size_t edge) const noexcept {
  return std::find(order_.begin(), order_.end(), edge) != order_.end();
}

void EdgeSet::insert(std::size_t edge) {
  if (contains(edge)) {
    throw InvalidEdgeSetError("edge " + std::to_string(edge) + " already in set");
  }
  order_.push_back(edge);
}

void validate_edge_set(const Graph& graph, const EdgeSet& selected) {
  for (std::size_t e : selected) {
    if (e >= graph.num_edges()) {
      throw InvalidEdgeSetError("edge index " + std::to_string(e) + " out of range for graph '" +
                                graph.id() + "' with " + std::to_string(graph.num_edges()) +
                                " edges");
    }
  }
}

Graph induce_subgraph(const Graph& graph, const EdgeSet& selected) {
  validate_edge_set(graph, selected);
  std::vector<std::size_t> keep(selected.begin(), selected.end());
  std::sort(keep.begin(), keep.end());
  std::vector<Edge> edges;
  edges.reserve(keep.size());
  for (std::size_t e : keep) edges.push_back(graph.edge(e));
  std::optional<Eigen::MatrixXd> edge_features;
  if (graph.edge_features()) {
    const Eigen::MatrixXd& src = *graph.edge_features();
    Eigen::MatrixXd dst(static_cast<Eigen::Index>(keep.size()), src.cols());
    for (std::size_t i = 0; i < keep.size(); ++i) {
      dst.row(static_cast<Eigen::Index>(i)) = src.row(static_cast<Eigen::Index>(keep[i]));
    }
    edge_features = std::move(dst);
  }
  return Graph(graph.id(), graph.node_features(), std::move(edges), graph.label(),
               std::move(edge_features));
}

EdgeSet edge_complement(const Graph& graph, const EdgeSet& selected) {
  validate_edge_set(graph, selected);
  std::vector<bool> taken(graph.num_edges(), false);
  for (std::size_t e : selected) taken[e] = true;
  std::vector<std::size_t> rest;
  rest.reserve(graph.num_edges() - selected.size());
  for (std::size_t e = 0; e < graph.num_edges(); ++e) {
    if (!taken[e]) rest.push_back(e);
  }
  return EdgeSet(std::move(rest));
}

EdgeSet all_edges(const Graph& graph) {
  std::vector<std::size_t> order(graph.num_edges());
  for (std::size_t e = 0; e < order.size(); ++e) order[e] = e;
  return EdgeSet(std::move(order));
}

const char* split_name(Split split) {
  switch (split) {
    case Split::kTrain:
      return "train";
    case Split::kValid:
      return "valid";
    case Split::kTest:
      return "test";
  }
  return "?";
}

Split parse_split(const std::string& name) {
  if (name == "train") return Split::kTrain;
  if (name == "valid") return Split::kValid;
  if (name == "test") return Split::kTest;
  throw ValidationError("unknown split '" + name + "' (expected train|valid|test)");
}

bool Dataset::is_split() const {
  return std::any_of(splits.begin(), splits.end(), [](const auto& s) { return !s.empty(); });
}

void Dataset::validate() const {
  if (num_classes < 1) throw ValidationError("num_classes must be >= 1");
  std::size_t dim = graphs.empty() ? 0 : graphs.front().feature_dim();
  for (const Graph& g : graphs) {
    if (g.feature_dim() != dim) {
      throw ValidationError("graph '" + g.id() + "': feature dimension " +
                            std::to_string(g.feature_dim()) + " differs from " +
                            std::to_string(dim));
    }
    if (g.label() >= num_classes) {
      throw ValidationError("graph '" + g.id() + "': label " + std::to_string(g.label()) +
                            " >= num_classes " + std::to_string(num_classes));
    }
  }
  if (is_split()) {
    std::vector<int> owner(graphs.size(), -1);
    for (int s = 0; s < 3; ++s) {
      for (std::size_t idx : splits[s]) {
        if (idx >= graphs.size()) {
          throw ValidationError(std::string("split '") + split_name(static_cast<Split>(s)) +
                                "': index " + std::to_string(idx) + " out of range");
        }
        if (owner[idx] != -1) {
          throw ValidationError("graph index " + std::to_string(idx) +
                                " appears in more than one split");
        }
        owner[idx] = s;
      }
    }
    for (std::size_t i = 0; i < owner.size(); ++i) {
      if (owner[i] == -1) {
        throw ValidationError("graph index " + std::to_string(i) + " belongs to no split");
      }
    }
  }
  if (!ground_truth.empty()) {
    if (ground_truth.size() != graphs.size()) {
      throw ValidationError("ground_truth has " + std::to_string(ground_truth.size()) +
                            " entries for " + std::to_string(graphs.size()) + " graphs");
    }
    for (std::size_t i = 0; i < graphs.size(); ++i) {
      if (!ground_truth[i]) continue;
      try {
        validate_edge_set(graphs[i], *ground_truth[i]);
      } catch (const InvalidEdgeSetError& e) {
        throw ValidationError("graph '" + graphs[i].id() + "': ground_truth_edges: " + e.what());
      }
    }
  }
}

std::vector<const Graph*> split_graphs(const Dataset& dataset, Split split) {
  std::vector<const Graph*> out;
  for (std::size_t idx : dataset.split(split)) out.push_back(&dataset.graphs.at(idx));
  return out;
}

}  // namespace rcx
