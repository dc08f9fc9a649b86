#include "fcc/match_graph.hpp"

#include <algorithm>
#include <string>

#include "fcc/errors.hpp"

namespace fcc {

MatchGraph::MatchGraph(ImagePartition partition, CsrMatrix adjacency)
    : partition_(std::move(partition)), adjacency_(std::move(adjacency)) {
  if (adjacency_.dim() != partition_.total_keypoints()) {
    throw InvalidStructureError("adjacency dimension does not match the partition");
  }
  for (Index i = 0; i < adjacency_.dim(); ++i) {
    const auto cols = adjacency_.row_cols(i);
    const auto vals = adjacency_.row_values(i);
    for (std::size_t p = 0; p < cols.size(); ++p) {
      if (partition_.image_of(cols[p]) == partition_.image_of(i)) {
        throw WithinImageEdgeError("entry (" + std::to_string(i) + "," + std::to_string(cols[p]) +
                                   ") lies in a diagonal block");
      }
      if (!(vals[p] >= 0.0)) throw InvalidStructureError("negative or NaN weight");
    }
  }
  if (!adjacency_.is_symmetric()) throw InvalidStructureError("adjacency is not symmetric");
}

MatchGraph MatchGraph::from_upper_edges(ImagePartition partition, std::span<const Edge> edges,
                                        std::span<const double> weights) {
  if (edges.size() != weights.size()) throw InvalidStructureError("edge/weight length mismatch");
  const Index n = partition.total_keypoints();
  const auto dim = static_cast<std::size_t>(n);

  std::vector<std::size_t> row_ptr(dim + 1, 0);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const Edge& edge = edges[e];
    if (edge.i < 0 || edge.j >= n || edge.i >= edge.j) {
      throw InvalidStructureError("edges must satisfy 0 <= i < j < N");
    }
    if (e > 0 && !(edges[e - 1] < edge)) throw InvalidStructureError("edges must be sorted and unique");
    if (weights[e] == 0.0) continue;
    ++row_ptr[static_cast<std::size_t>(edge.i) + 1];
    ++row_ptr[static_cast<std::size_t>(edge.j) + 1];
  }
  for (std::size_t r = 0; r < dim; ++r) row_ptr[r + 1] += row_ptr[r];

  // Lower-triangle entries of row r come from edges (c, r) with c < r and are
  // emitted first, in increasing c; upper entries follow in increasing j.
  std::vector<std::size_t> cursor(row_ptr.begin(), row_ptr.end() - 1);
  std::vector<Index> cols(row_ptr.back());
  std::vector<double> values(row_ptr.back());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (weights[e] == 0.0) continue;
    const auto p = cursor[static_cast<std::size_t>(edges[e].j)]++;
    cols[p] = edges[e].i;
    values[p] = weights[e];
  }
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (weights[e] == 0.0) continue;
    const auto lo = static_cast<std::size_t>(edges[e].i);
    const auto p = cursor[lo]++;
    cols[p] = edges[e].j;
    values[p] = weights[e];
  }
  return MatchGraph(std::move(partition),
                    CsrMatrix(n, std::move(row_ptr), std::move(cols), std::move(values)));
}

MatchGraph MatchGraph::from_upper_edges(ImagePartition partition, std::span<const Edge> edges) {
  const std::vector<double> ones(edges.size(), 1.0);
  return from_upper_edges(std::move(partition), edges, ones);
}

std::vector<Edge> MatchGraph::upper_edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count());
  for (Index i = 0; i < adjacency_.dim(); ++i) {
    for (const Index j : adjacency_.row_cols(i)) {
      if (j > i) out.push_back({i, j});
    }
  }
  return out;
}

std::vector<double> MatchGraph::upper_weights() const {
  std::vector<double> out;
  out.reserve(edge_count());
  for (Index i = 0; i < adjacency_.dim(); ++i) {
    const auto cols = adjacency_.row_cols(i);
    const auto vals = adjacency_.row_values(i);
    for (std::size_t p = 0; p < cols.size(); ++p) {
      if (cols[p] > i) out.push_back(vals[p]);
    }
  }
  return out;
}

bool MatchGraph::is_binary() const {
  return std::all_of(adjacency_.values().begin(), adjacency_.values().end(),
                     [](double w) { return w == 1.0; });
}

MatchGraph build_graph(const ImagePartition& partition, std::span<const KeypointMatch> matches) {
  std::vector<Edge> edges;
  edges.reserve(matches.size());
  for (const auto& m : matches) {
    if (m.image_a == m.image_b) {
      throw WithinImageEdgeError("match inside image " + std::to_string(m.image_a));
    }
    const Index a = partition.global_index(m.image_a, m.keypoint_a);
    const Index b = partition.global_index(m.image_b, m.keypoint_b);
    edges.push_back(canonical(a, b));
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return MatchGraph::from_upper_edges(partition, edges);
}

}  // namespace fcc
