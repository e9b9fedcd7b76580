#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rcx/error.hpp"
#include "rcx/graph.hpp"
#include "rcx/json_util.hpp"

namespace rcx {

using nlohmann::json;

namespace {

json graph_to_json(const Graph& g, const std::optional<EdgeSet>* truth) {
  json out = json::object();
  out["graph_id"] = g.id();
  out["num_nodes"] = g.num_nodes();
  out["node_features"] = matrix_to_json(g.node_features(), "node_features of '" + g.id() + "'");
  json edges = json::array();
  for (const Edge& e : g.edges()) edges.push_back({e.u, e.v});
  out["edges"] = std::move(edges);
  if (g.edge_features()) {
    out["edge_features"] = matrix_to_json(*g.edge_features(), "edge_features of '" + g.id() + "'");
    // Keeps the width of an edgeless graph's empty matrix.
    out["edge_feature_dim"] = g.edge_feature_dim();
  }
  out["label"] = g.label();
  if (truth != nullptr && truth->has_value()) {
    out["ground_truth_edges"] = (*truth)->indices();
  }
  return out;
}

// Wraps any failure while reading one field with the graph id and field name.
template <typename F>
auto field(const std::string& graph_id, const char* name, F&& read) -> decltype(read()) {
  try {
    return read();
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError("graph '" + graph_id + "': field '" + name + "': " + e.what());
  }
}

struct ParsedGraph {
  Graph graph;
  std::optional<EdgeSet> truth;
};

ParsedGraph graph_from_json(const json& j, std::size_t position) {
  if (!j.is_object()) {
    throw ParseError("graphs[" + std::to_string(position) + "]: expected an object");
  }
  std::string id = "#" + std::to_string(position);
  id = field(id, "graph_id", [&] { return j.at("graph_id").get<std::string>(); });
  const auto num_nodes = field(id, "num_nodes", [&] { return j.at("num_nodes").get<std::size_t>(); });
  Eigen::MatrixXd features =
      field(id, "node_features", [&] { return matrix_from_json(j.at("node_features")); });
  if (static_cast<std::size_t>(features.rows()) != num_nodes) {
    throw ParseError("graph '" + id + "': field 'node_features': " +
                     std::to_string(features.rows()) + " rows for num_nodes " +
                     std::to_string(num_nodes));
  }
  std::vector<Edge> edges = field(id, "edges", [&] {
    std::vector<Edge> out;
    for (const json& pair : j.at("edges")) {
      if (!pair.is_array() || pair.size() != 2) throw ParseError("expected [u, v] pairs");
      out.push_back({pair[0].get<std::size_t>(), pair[1].get<std::size_t>()});
    }
    return out;
  });
  std::optional<Eigen::MatrixXd> edge_features;
  if (j.contains("edge_features")) {
    edge_features = field(id, "edge_features", [&] { return matrix_from_json(j.at("edge_features")); });
    if (j.contains("edge_feature_dim")) {
      const auto dim =
          field(id, "edge_feature_dim", [&] { return j.at("edge_feature_dim").get<Eigen::Index>(); });
      if (edge_features->rows() == 0) {
        edge_features = Eigen::MatrixXd(0, dim);
      } else if (edge_features->cols() != dim) {
        throw ParseError("graph '" + id + "': field 'edge_feature_dim': " + std::to_string(dim) +
                         " does not match " + std::to_string(edge_features->cols()) + " columns");
      }
    }
  }
  const int label = field(id, "label", [&] { return j.at("label").get<int>(); });
  std::optional<EdgeSet> truth;
  if (j.contains("ground_truth_edges")) {
    truth = field(id, "ground_truth_edges", [&] {
      return EdgeSet(j.at("ground_truth_edges").get<std::vector<std::size_t>>());
    });
  }
  return {Graph(id, std::move(features), std::move(edges), label, std::move(edge_features)),
          std::move(truth)};
}

}  // namespace

std::string dataset_to_json(const Dataset& dataset) {
  dataset.validate();
  json out = json::object();
  out["schema_version"] = kDatasetSchemaVersion;
  out["num_classes"] = dataset.num_classes;
  json graphs = json::array();
  for (std::size_t i = 0; i < dataset.graphs.size(); ++i) {
    const std::optional<EdgeSet>* truth =
        dataset.ground_truth.empty() ? nullptr : &dataset.ground_truth[i];
    graphs.push_back(graph_to_json(dataset.graphs[i], truth));
  }
  out["graphs"] = std::move(graphs);
  json splits = json::object();
  for (int s = 0; s < 3; ++s) splits[split_name(static_cast<Split>(s))] = dataset.splits[s];
  out["splits"] = std::move(splits);
  out["split_ratios"] = dataset.split_ratios;
  return out.dump(1) + "\n";
}

Dataset dataset_from_json(const std::string& text) {
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw ParseError("dataset file is empty");
  }
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("dataset is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ParseError("dataset root must be a JSON object");
  const int version = root.value("schema_version", -1);
  if (version != kDatasetSchemaVersion) {
    throw ParseError("unsupported dataset schema_version " + std::to_string(version));
  }
  Dataset dataset;
  try {
    dataset.num_classes = root.at("num_classes").get<int>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("field 'num_classes': ") + e.what());
  }
  if (!root.contains("graphs") || !root.at("graphs").is_array()) {
    throw ParseError("field 'graphs' must be an array");
  }
  bool any_truth = false;
  std::size_t position = 0;
  for (const json& g : root.at("graphs")) {
    ParsedGraph parsed = graph_from_json(g, position++);
    any_truth = any_truth || parsed.truth.has_value();
    dataset.graphs.push_back(std::move(parsed.graph));
    dataset.ground_truth.push_back(std::move(parsed.truth));
  }
  if (!any_truth) dataset.ground_truth.clear();
  if (root.contains("splits")) {
    const json& splits = root.at("splits");
    for (int s = 0; s < 3; ++s) {
      const char* name = split_name(static_cast<Split>(s));
      try {
        dataset.splits[s] = splits.value(name, std::vector<std::size_t>{});
      } catch (const json::exception& e) {
        throw ParseError(std::string("splits.") + name + ": " + e.what());
      }
    }
  }
  if (root.contains("split_ratios")) {
    try {
      dataset.split_ratios = root.at("split_ratios").get<std::array<double, 3>>();
    } catch (const json::exception& e) {
      throw ParseError(std::string("field 'split_ratios': ") + e.what());
    }
  }
  dataset.validate();
  return dataset;
}

void write_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  write_text_file(path, dataset_to_json(dataset));
}

Dataset read_dataset(const std::filesystem::path& path) {
  return dataset_from_json(read_text_file(path));
}

}  // namespace rcx
