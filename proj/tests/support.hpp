#pragma once

// Shared fixtures and brute-force oracles for the test binaries. Nothing in
// here calls the library kernels it is used to check.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

#include "fcc/match_graph.hpp"

namespace fcc::testing {

// Four images with two keypoints each. Nodes 1..8 (1-based) are grouped as
// {1,2}, {3,4}, {5,6}, {7,8}; edge 1-4 is the single bad match.
inline ImagePartition small_example_partition() { return ImagePartition({2, 2, 2, 2}); }

inline std::vector<std::pair<int, int>> small_example_pairs() {
  return {{1, 4}, {1, 5}, {1, 7}, {2, 6}, {2, 8}, {3, 5}, {3, 7}, {4, 6}, {4, 8}, {5, 7}, {6, 8}};
}

inline std::vector<KeypointMatch> small_example_matches(bool include_bad = true) {
  std::vector<KeypointMatch> out;
  for (auto [a, b] : small_example_pairs()) {
    if (!include_bad && a == 1 && b == 4) continue;
    const int ga = a - 1;
    const int gb = b - 1;
    out.push_back({ga / 2, ga % 2, gb / 2, gb % 2});
  }
  return out;
}

inline MatchGraph small_example(bool include_bad = true) {
  const auto m = small_example_matches(include_bad);
  return build_graph(small_example_partition(), m);
}

// Row-major dense matrix.
struct Dense {
  int n = 0;
  std::vector<double> a;

  explicit Dense(int dim = 0) : n(dim), a(static_cast<std::size_t>(dim) * dim, 0.0) {}
  double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
  double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }
};

inline Dense dense_of(const MatchGraph& g) {
  Dense d(g.keypoint_count());
  for (int i = 0; i < d.n; ++i) {
    for (int j = 0; j < d.n; ++j) d(i, j) = g.weight(i, j);
  }
  return d;
}

inline Dense matmul(const Dense& x, const Dense& y) {
  Dense out(x.n);
  for (int i = 0; i < x.n; ++i) {
    for (int j = 0; j < x.n; ++j) {
      double acc = 0.0;
      for (int k = 0; k < x.n; ++k) acc += x(i, k) * y(k, j);
      out(i, j) = acc;
    }
  }
  return out;
}

inline Dense matpow(const Dense& x, int p) {
  Dense out = x;
  for (int k = 1; k < p; ++k) out = matmul(out, x);
  return out;
}

inline Dense within_image(const ImagePartition& part) {
  Dense d(part.total_keypoints());
  for (int i = 0; i < d.n; ++i) {
    for (int j = 0; j < d.n; ++j) d(i, j) = (i != j && part.image_of(i) == part.image_of(j)) ? 1.0 : 0.0;
  }
  return d;
}

// Union-find with path halving.
class UnionFind {
 public:
  explicit UnionFind(int n) : parent_(static_cast<std::size_t>(n)) { std::iota(parent_.begin(), parent_.end(), 0); }
  int find(int v) {
    while (parent_[v] != v) {
      parent_[v] = parent_[parent_[v]];
      v = parent_[v];
    }
    return v;
  }
  void unite(int a, int b) { parent_[find(a)] = find(b); }

 private:
  std::vector<int> parent_;
};

inline ImagePartition random_partition(std::mt19937_64& rng, int images, int max_per_image) {
  std::uniform_int_distribution<int> size(1, max_per_image);
  std::vector<Index> sizes(static_cast<std::size_t>(images));
  for (auto& s : sizes) s = size(rng);
  return ImagePartition(sizes);
}

// Each cross-image pair independently with probability p.
inline MatchGraph random_graph(std::mt19937_64& rng, const ImagePartition& part, double p) {
  std::bernoulli_distribution coin(p);
  std::vector<Edge> edges;
  for (Index i = 0; i < part.total_keypoints(); ++i) {
    for (Index j = i + 1; j < part.total_keypoints(); ++j) {
      if (part.image_of(i) != part.image_of(j) && coin(rng)) edges.push_back({i, j});
    }
  }
  return MatchGraph::from_upper_edges(part, edges);
}

// Scene layout: image a shows the listed point ids (distinct, any order).
// Returns the partition and the point id of every global keypoint.
struct Layout {
  ImagePartition partition;
  std::vector<int> point_of;
};

inline Layout random_layout(std::mt19937_64& rng, int images, int points, double visible) {
  std::bernoulli_distribution coin(visible);
  std::vector<Index> sizes;
  std::vector<int> point_of;
  for (int a = 0; a < images; ++a) {
    std::vector<int> shown;
    for (int p = 0; p < points; ++p) {
      if (coin(rng)) shown.push_back(p);
    }
    if (shown.empty()) shown.push_back(static_cast<int>(rng() % static_cast<unsigned>(points)));
    std::shuffle(shown.begin(), shown.end(), rng);
    sizes.push_back(static_cast<Index>(shown.size()));
    point_of.insert(point_of.end(), shown.begin(), shown.end());
  }
  return {ImagePartition(sizes), point_of};
}

// Every cross-image pair showing the same point.
inline MatchGraph truth_graph(const Layout& layout) {
  std::vector<Edge> edges;
  const auto& part = layout.partition;
  for (Index i = 0; i < part.total_keypoints(); ++i) {
    for (Index j = i + 1; j < part.total_keypoints(); ++j) {
      if (part.image_of(i) != part.image_of(j) && layout.point_of[i] == layout.point_of[j]) edges.push_back({i, j});
    }
  }
  return MatchGraph::from_upper_edges(part, edges);
}

inline MatchGraph random_subgraph(std::mt19937_64& rng, const MatchGraph& g, double keep) {
  std::bernoulli_distribution coin(keep);
  std::vector<Edge> kept;
  for (const auto& e : g.upper_edges()) {
    if (coin(rng)) kept.push_back(e);
  }
  return MatchGraph::from_upper_edges(g.partition(), kept);
}

}  // namespace fcc::testing
