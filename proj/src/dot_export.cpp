#include "rcx/dot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "rcx/error.hpp"
#include "rcx/json_util.hpp"

namespace rcx {

namespace {

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

std::string fixed3(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", x);
  return buf;
}

// Red hue, value 0.85, saturation = weight.
std::string color_for(double weight) {
  const double value = 0.85;
  const auto hi = static_cast<int>(std::lround(255.0 * value));
  const auto lo = static_cast<int>(std::lround(255.0 * value * (1.0 - weight)));
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", hi, lo, lo);
  return buf;
}

}  // namespace

std::string to_dot(const Graph& graph, const RankedEdges& ranked) {
  ranked.validate(graph.num_edges());
  std::vector<double> score(graph.num_edges(), 0.0);
  std::vector<bool> has_score(graph.num_edges(), false);
  for (std::size_t i = 0; i < ranked.order.size(); ++i) {
    score[ranked.order[i]] = ranked.scores[i];
    has_score[ranked.order[i]] = true;
  }
  double lo = 0.0;
  double hi = 0.0;
  if (!ranked.scores.empty()) {
    const auto [mn, mx] = std::minmax_element(ranked.scores.begin(), ranked.scores.end());
    lo = *mn;
    hi = *mx;
  }

  std::ostringstream out;
  out << "graph " << quote(graph.id()) << " {\n";
  out << "  node [shape=circle, fontsize=10];\n";
  for (std::size_t v = 0; v < graph.num_nodes(); ++v) {
    out << "  n" << v << " [label=\"" << v << "\"];\n";
  }
  for (std::size_t e = 0; e < graph.num_edges(); ++e) {
    const Edge& edge = graph.edge(e);
    out << "  n" << edge.u << " -- n" << edge.v << " [";
    if (has_score[e]) {
      const double weight = hi > lo ? (score[e] - lo) / (hi - lo) : 1.0;
      out << "penwidth=" << fixed3(1.0 + 4.0 * weight) << ", color=\"" << color_for(weight)
          << "\", label=\"" << fixed3(score[e]) << "\"";
    } else {
      out << "penwidth=0.500, color=\"#bbbbbb\", style=dashed";
    }
    out << "];\n";
  }
  out << "}\n";
  return out.str();
}

void export_dot(const Graph& graph, const RankedEdges& ranked, const std::filesystem::path& path) {
  write_text_file(path, to_dot(graph, ranked));
}

}  // namespace rcx
