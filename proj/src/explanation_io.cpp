#include "rcx/explanation_io.hpp"

#include "rcx/error.hpp"
#include "rcx/json_util.hpp"

namespace rcx {

using nlohmann::json;

const GraphExplanation& ExplanationFile::find(const std::string& graph_id) const {
  for (const GraphExplanation& g : graphs) {
    if (g.graph_id == graph_id) return g;
  }
  throw ValidationError("no explanation for graph '" + graph_id + "'");
}

json explanations_to_json(const ExplanationFile& file) {
  json graphs = json::array();
  for (const GraphExplanation& g : file.graphs) {
    std::vector<std::size_t> selected(g.ranked.order.begin(),
                                      g.ranked.order.begin() + static_cast<long>(g.k));
    graphs.push_back({{"graph_id", g.graph_id},
                      {"target_class", g.target_class},
                      {"order", g.ranked.order},
                      {"scores", g.ranked.scores},
                      {"selected", selected}});
  }
  return json{{"schema_version", kExplanationSchemaVersion},
              {"method", file.method},
              {"ratio", file.ratio},
              {"graphs", std::move(graphs)}};
}

ExplanationFile explanations_from_json(const json& j) {
  if (!j.is_object() || j.value("schema_version", -1) != kExplanationSchemaVersion) {
    throw ParseError("explanations: missing or unsupported schema_version");
  }
  ExplanationFile file;
  try {
    file.method = j.at("method").get<std::string>();
    file.ratio = j.at("ratio").get<double>();
    for (const json& g : j.at("graphs")) {
      GraphExplanation e;
      e.graph_id = g.at("graph_id").get<std::string>();
      e.target_class = g.at("target_class").get<int>();
      e.ranked.order = g.at("order").get<std::vector<std::size_t>>();
      e.ranked.scores = g.at("scores").get<std::vector<double>>();
      e.k = g.at("selected").size();
      if (e.k > e.ranked.order.size()) {
        throw ParseError("graph '" + e.graph_id + "': more selected edges than ranked edges");
      }
      file.graphs.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("explanations: ") + e.what());
  }
  return file;
}

void write_explanations(const ExplanationFile& file, const std::filesystem::path& path) {
  write_text_file(path, explanations_to_json(file).dump(1) + "\n");
}

ExplanationFile read_explanations(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError("explanations file '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return explanations_from_json(j);
}

}  // namespace rcx
