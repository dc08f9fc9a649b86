#include <gtest/gtest.h>

#include <map>
#include <random>
#include <set>

#include "fcc/errors.hpp"
#include "fcc/graph_ops.hpp"
#include "fcc/match_graph.hpp"
#include "support.hpp"

namespace fcc {
namespace {

using testing::small_example;

void expect_valid(const MatchGraph& g) {
  const auto& adj = g.adjacency();
  const auto& part = g.partition();
  for (Index i = 0; i < adj.dim(); ++i) {
    const auto cols = adj.row_cols(i);
    const auto vals = adj.row_values(i);
    for (std::size_t p = 0; p < cols.size(); ++p) {
      EXPECT_NE(part.image_of(i), part.image_of(cols[p]));
      EXPECT_EQ(adj.at(cols[p], i), vals[p]);
    }
  }
}

TEST(Partition, OffsetsAndLookup) {
  const ImagePartition part({3, 1, 2});
  EXPECT_EQ(part.image_count(), 3);
  EXPECT_EQ(part.total_keypoints(), 6);
  const std::vector<Index> offsets(part.offsets().begin(), part.offsets().end());
  EXPECT_EQ(offsets, (std::vector<Index>{0, 3, 4, 6}));
  const std::vector<Index> images{0, 0, 0, 1, 2, 2};
  for (Index k = 0; k < 6; ++k) EXPECT_EQ(part.image_of(k), images[k]);
  EXPECT_EQ(part.global_index(2, 1), 5);
  EXPECT_EQ(part.local_index(5), 1);
  EXPECT_THROW(part.global_index(1, 1), IndexOutOfRangeError);
  EXPECT_THROW(part.global_index(3, 0), IndexOutOfRangeError);
  EXPECT_THROW(ImagePartition({2, 0}), ConfigInvalidError);
}

TEST(BuildGraph, SmallestMatch) {
  const ImagePartition part({1, 1});
  const std::vector<KeypointMatch> m{{0, 0, 1, 0}};
  const MatchGraph g = build_graph(part, m);
  EXPECT_EQ(g.adjacency().nnz(), 2u);
  EXPECT_EQ(g.weight(0, 1), 1.0);
  EXPECT_EQ(g.weight(1, 0), 1.0);
}

TEST(BuildGraph, RejectsWithinImageAndRange) {
  const ImagePartition part({2, 2});
  const std::vector<KeypointMatch> same{{0, 0, 0, 1}};
  EXPECT_THROW(build_graph(part, same), WithinImageEdgeError);
  const std::vector<KeypointMatch> far{{0, 2, 1, 0}};
  EXPECT_THROW(build_graph(part, far), IndexOutOfRangeError);
  const std::vector<KeypointMatch> far_b{{0, 0, 1, 5}};
  EXPECT_THROW(build_graph(part, far_b), IndexOutOfRangeError);
}

TEST(BuildGraph, DuplicatesCollapse) {
  const ImagePartition part({2, 2});
  const std::vector<KeypointMatch> m{{0, 1, 1, 0}, {1, 0, 0, 1}, {0, 1, 1, 0}};
  const MatchGraph g = build_graph(part, m);
  EXPECT_EQ(g.edge_count(), 1u);
  EXPECT_EQ(g.weight(1, 2), 1.0);
  EXPECT_TRUE(g.is_binary());
}

TEST(BuildGraph, SmallExampleMatchesPrintedMatrix) {
  // Rows of the printed 8x8 adjacency.
  const int printed[8][8] = {{0, 0, 0, 1, 1, 0, 1, 0}, {0, 0, 0, 0, 0, 1, 0, 1}, {0, 0, 0, 0, 1, 0, 1, 0},
                             {1, 0, 0, 0, 0, 1, 0, 1}, {1, 0, 1, 0, 0, 0, 1, 0}, {0, 1, 0, 1, 0, 0, 0, 1},
                             {1, 0, 1, 0, 1, 0, 0, 0}, {0, 1, 0, 1, 0, 1, 0, 0}};
  const MatchGraph g = small_example();
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) EXPECT_EQ(g.weight(i, j), printed[i][j]) << i << "," << j;
  }
  expect_valid(g);
}

TEST(MatchGraphCtor, RejectsAsymmetricAndDiagonalBlock) {
  const ImagePartition part({2, 2});
  EXPECT_THROW(MatchGraph(part, CsrMatrix::from_triplets(4, {{0, 2, 1.0}})), InvalidStructureError);
  EXPECT_THROW(MatchGraph(part, CsrMatrix::from_triplets(4, {{0, 1, 1.0}, {1, 0, 1.0}})),
               WithinImageEdgeError);
  EXPECT_THROW(MatchGraph(part, CsrMatrix::from_triplets(4, {{0, 2, -1.0}, {2, 0, -1.0}})),
               InvalidStructureError);
}

TEST(MatchGraphCtor, UpperEdgesDropZeroWeights) {
  const ImagePartition part({1, 1, 1});
  const std::vector<Edge> edges{{0, 1}, {0, 2}, {1, 2}};
  const std::vector<double> w{0.5, 0.0, 1.0};
  const MatchGraph g = MatchGraph::from_upper_edges(part, edges, w);
  EXPECT_EQ(g.edge_count(), 2u);
  EXPECT_FALSE(g.has_edge(0, 2));
  EXPECT_EQ(g.weight(1, 0), 0.5);
  EXPECT_FALSE(g.is_binary());
}

TEST(Components, Edgeless) {
  const MatchGraph g(ImagePartition({1, 1, 1, 1, 1}), CsrMatrix::zeros(5));
  EXPECT_EQ(connected_components(g).component_count, 5);
}

TEST(Components, SmallExampleGoodGraph) {
  const ComponentLabeling c = connected_components(small_example(false));
  ASSERT_EQ(c.component_count, 2);
  for (int k : {0, 2, 4, 6}) EXPECT_EQ(c.labels[k], c.labels[0]);
  for (int k : {1, 3, 5, 7}) EXPECT_EQ(c.labels[k], c.labels[1]);
  EXPECT_NE(c.labels[0], c.labels[1]);
}

TEST(Components, AgreesWithUnionFind) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const ImagePartition part = testing::random_partition(rng, 6, 5);
    const MatchGraph g = testing::random_graph(rng, part, 0.08);
    testing::UnionFind uf(g.keypoint_count());
    for (const auto& e : g.upper_edges()) uf.unite(e.i, e.j);

    const ComponentLabeling c = connected_components(g);
    std::map<int, int> root_to_label;
    std::set<int> labels;
    for (Index k = 0; k < g.keypoint_count(); ++k) {
      const auto [it, fresh] = root_to_label.emplace(uf.find(k), c.labels[k]);
      EXPECT_EQ(it->second, c.labels[k]);
      labels.insert(c.labels[k]);
    }
    EXPECT_EQ(labels.size(), root_to_label.size());
    EXPECT_EQ(c.component_count, static_cast<Index>(root_to_label.size()));
  }
}

TEST(Completion, ClosesPath) {
  const ImagePartition part({1, 1, 1});
  const std::vector<Edge> path{{0, 1}, {1, 2}};
  const MatchGraph done = cycle_consistent_completion(MatchGraph::from_upper_edges(part, path));
  EXPECT_EQ(done.edge_count(), 3u);
  EXPECT_TRUE(done.has_edge(0, 2));
}

TEST(Completion, SmallExampleAddsTwoEdges) {
  const MatchGraph good = small_example(false);
  const MatchGraph done = cycle_consistent_completion(good);
  EXPECT_EQ(done.edge_count(), good.edge_count() + 2);
  EXPECT_TRUE(done.has_edge(0, 2));
  EXPECT_TRUE(done.has_edge(1, 3));
  for (const auto& e : good.upper_edges()) EXPECT_TRUE(done.has_edge(e.i, e.j));
}

TEST(Completion, CompleteInputUnchanged) {
  const MatchGraph done = cycle_consistent_completion(small_example(false));
  EXPECT_EQ(cycle_consistent_completion(done), done);
}

TEST(Completion, PropertiesOnRandomGraphs) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const ImagePartition part = testing::random_partition(rng, 5, 6);
    if (part.total_keypoints() > 30) continue;
    const MatchGraph g = testing::random_graph(rng, part, 0.07);
    const MatchGraph done = cycle_consistent_completion(g);
    expect_valid(done);
    EXPECT_EQ(cycle_consistent_completion(done), done);
    for (const auto& e : g.upper_edges()) EXPECT_TRUE(done.has_edge(e.i, e.j));

    // Every 2-path inside a component closes unless its ends share an image.
    const ComponentLabeling c = connected_components(done);
    const Index n = done.keypoint_count();
    for (Index i = 0; i < n; ++i) {
      for (Index k = 0; k < n; ++k) {
        if (!done.has_edge(i, k)) continue;
        for (Index j = 0; j < n; ++j) {
          if (j == i || !done.has_edge(k, j)) continue;
          ASSERT_EQ(c.labels[i], c.labels[j]);
          EXPECT_EQ(done.has_edge(i, j), part.image_of(i) != part.image_of(j));
        }
      }
    }
  }
}

}  // namespace
}  // namespace fcc
