#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace rcx {

// Undirected edge stored once with u < v.
struct Edge {
  std::size_t u = 0;
  std::size_t v = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

// Simple undirected graph with dense node features. Immutable after
// construction; the constructor canonicalizes endpoint order and rejects
// self-loops, duplicate pairs and out-of-range endpoints.
class Graph {
 public:
  Graph(std::string id, Eigen::MatrixXd node_features, std::vector<Edge> edges, int label,
        std::optional<Eigen::MatrixXd> edge_features = std::nullopt);

  const std::string& id() const noexcept { return id_; }
  std::size_t num_nodes() const noexcept { return static_cast<std::size_t>(node_features_.rows()); }
  std::size_t num_edges() const noexcept { return edges_.size(); }
  std::size_t feature_dim() const noexcept { return static_cast<std::size_t>(node_features_.cols()); }
  const Eigen::MatrixXd& node_features() const noexcept { return node_features_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const Edge& edge(std::size_t index) const { return edges_.at(index); }
  const std::optional<Eigen::MatrixXd>& edge_features() const noexcept { return edge_features_; }
  std::size_t edge_feature_dim() const noexcept {
    return edge_features_ ? static_cast<std::size_t>(edge_features_->cols()) : 0;
  }
  int label() const noexcept { return label_; }

  friend bool operator==(const Graph& a, const Graph& b);

 private:
  std::string id_;
  Eigen::MatrixXd node_features_;
  std::vector<Edge> edges_;
  std::optional<Eigen::MatrixXd> edge_features_;
  int label_ = 0;
};

// Ordered set of edge indices into a parent graph. Insertion order is the
// selection order of a sequential explainer.
class EdgeSet {
 public:
  EdgeSet() = default;
  explicit EdgeSet(std::vector<std::size_t> order);

  bool contains(std::size_t edge) const noexcept;
  void insert(std::size_t edge);
  std::size_t size() const noexcept { return order_.size(); }
  bool empty() const noexcept { return order_.empty(); }
  const std::vector<std::size_t>& indices() const noexcept { return order_; }
  auto begin() const noexcept { return order_.begin(); }
  auto end() const noexcept { return order_.end(); }

  friend bool operator==(const EdgeSet&, const EdgeSet&) = default;

 private:
  std::vector<std::size_t> order_;
};

// Throws InvalidEdgeSetError if any index is >= |E|.
void validate_edge_set(const Graph& graph, const EdgeSet& selected);

// do(G = selected): every node and node feature is kept, only the selected
// edges survive (in the parent's edge order).
Graph induce_subgraph(const Graph& graph, const EdgeSet& selected);

// Indices not in `selected`, ascending.
EdgeSet edge_complement(const Graph& graph, const EdgeSet& selected);

EdgeSet all_edges(const Graph& graph);

enum class Split { kTrain = 0, kValid = 1, kTest = 2 };

const char* split_name(Split split);
Split parse_split(const std::string& name);

struct Dataset {
  std::vector<Graph> graphs;
  // Empty for all three means "not yet split".
  std::array<std::vector<std::size_t>, 3> splits;
  std::array<double, 3> split_ratios{0.0, 0.0, 0.0};
  // Either empty or one entry per graph.
  std::vector<std::optional<EdgeSet>> ground_truth;
  int num_classes = 0;

  const std::vector<std::size_t>& split(Split s) const { return splits[static_cast<int>(s)]; }
  bool is_split() const;
  // Throws ValidationError on the first broken invariant.
  void validate() const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

std::vector<const Graph*> split_graphs(const Dataset& dataset, Split split);

inline constexpr int kDatasetSchemaVersion = 1;

std::string dataset_to_json(const Dataset& dataset);
Dataset dataset_from_json(const std::string& text);
void write_dataset(const Dataset& dataset, const std::filesystem::path& path);
Dataset read_dataset(const std::filesystem::path& path);

}  // namespace rcx
