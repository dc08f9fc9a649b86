#pragma once

#include <compare>
#include <span>
#include <vector>

#include "fcc/partition.hpp"
#include "fcc/sparse_matrix.hpp"

namespace fcc {

/// Undirected edge between two global keypoints, stored with i < j.
struct Edge {
  Index i;
  Index j;

  auto operator<=>(const Edge&) const = default;
};

inline Edge canonical(Index a, Index b) { return a < b ? Edge{a, b} : Edge{b, a}; }

/// A claimed match in image-local coordinates.
struct KeypointMatch {
  Index image_a;
  Index keypoint_a;
  Index image_b;
  Index keypoint_b;
};

/// Symmetric, nonnegatively weighted keypoint graph with an empty block
/// diagonal. Holds the observed matches X and the reweighted iterates.
class MatchGraph {
 public:
  MatchGraph() = default;

  /// Validates symmetry, nonnegative weights and the zero block diagonal.
  MatchGraph(ImagePartition partition, CsrMatrix adjacency);

  /// Builds a graph from one orientation per edge. Entries with weight 0 are
  /// dropped. Edges must be canonical (i < j), unique and sorted.
  static MatchGraph from_upper_edges(ImagePartition partition, std::span<const Edge> edges,
                                     std::span<const double> weights);
  static MatchGraph from_upper_edges(ImagePartition partition, std::span<const Edge> edges);

  const ImagePartition& partition() const { return partition_; }
  const CsrMatrix& adjacency() const { return adjacency_; }
  Index keypoint_count() const { return partition_.total_keypoints(); }

  /// Number of undirected edges (half of the stored entries).
  std::size_t edge_count() const { return adjacency_.nnz() / 2; }

  /// Edges with i < j in row-major order.
  std::vector<Edge> upper_edges() const;
  /// Weights aligned with upper_edges().
  std::vector<double> upper_weights() const;

  bool is_binary() const;
  bool has_edge(Index i, Index j) const { return adjacency_.at(i, j) != 0.0; }
  double weight(Index i, Index j) const { return adjacency_.at(i, j); }

  bool operator==(const MatchGraph& other) const = default;

 private:
  ImagePartition partition_;
  CsrMatrix adjacency_;
};

/// Binary graph from image-local matches; duplicates collapse to one edge.
/// Throws WithinImageEdgeError or IndexOutOfRangeError.
MatchGraph build_graph(const ImagePartition& partition, std::span<const KeypointMatch> matches);

}  // namespace fcc
