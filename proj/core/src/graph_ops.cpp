#include "fcc/graph_ops.hpp"

#include <algorithm>

namespace fcc {

ComponentLabeling connected_components(const MatchGraph& graph) {
  const Index n = graph.keypoint_count();
  const CsrMatrix& adj = graph.adjacency();
  ComponentLabeling out;
  out.labels.assign(static_cast<std::size_t>(n), -1);
  std::vector<Index> stack;
  for (Index seed = 0; seed < n; ++seed) {
    if (out.labels[static_cast<std::size_t>(seed)] >= 0) continue;
    const Index label = out.component_count++;
    out.labels[static_cast<std::size_t>(seed)] = label;
    stack.push_back(seed);
    while (!stack.empty()) {
      const Index v = stack.back();
      stack.pop_back();
      const auto cols = adj.row_cols(v);
      const auto vals = adj.row_values(v);
      for (std::size_t p = 0; p < cols.size(); ++p) {
        auto& l = out.labels[static_cast<std::size_t>(cols[p])];
        if (vals[p] > 0.0 && l < 0) {
          l = label;
          stack.push_back(cols[p]);
        }
      }
    }
  }
  return out;
}

MatchGraph cycle_consistent_completion(const MatchGraph& graph) {
  const ComponentLabeling comps = connected_components(graph);
  const ImagePartition& part = graph.partition();

  std::vector<std::vector<Index>> members(static_cast<std::size_t>(comps.component_count));
  for (Index k = 0; k < graph.keypoint_count(); ++k) {
    members[static_cast<std::size_t>(comps.labels[static_cast<std::size_t>(k)])].push_back(k);
  }
  std::vector<Edge> edges;
  for (const auto& nodes : members) {
    for (std::size_t a = 0; a < nodes.size(); ++a) {
      for (std::size_t b = a + 1; b < nodes.size(); ++b) {
        if (part.image_of(nodes[a]) != part.image_of(nodes[b])) edges.push_back({nodes[a], nodes[b]});
      }
    }
  }
  std::sort(edges.begin(), edges.end());
  return MatchGraph::from_upper_edges(part, edges);
}

}  // namespace fcc
