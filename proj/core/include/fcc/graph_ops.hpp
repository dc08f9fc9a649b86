#pragma once

#include <vector>

#include "fcc/match_graph.hpp"

namespace fcc {

struct ComponentLabeling {
  /// labels[k] in [0, component_count); components are numbered in order of
  /// their smallest keypoint.
  std::vector<Index> labels;
  Index component_count = 0;
};

/// Connected components over positive-weight entries.
ComponentLabeling connected_components(const MatchGraph& graph);

/// Smallest cycle-consistent supergraph: every connected component becomes a
/// clique, except that pairs of keypoints sharing an image stay unconnected.
/// Such pairs only arise when the input contains corrupted matches.
MatchGraph cycle_consistent_completion(const MatchGraph& graph);

}  // namespace fcc
