#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fcc/match_graph.hpp"
#include "fcc/parallel.hpp"
#include "fcc/statistics.hpp"

namespace fcc {

/// Sorted, duplicate-free canonical (i < j) edges.
using EdgeSet = std::vector<Edge>;

EdgeSet make_edge_set(std::span<const Edge> edges);

struct EvalReport {
  double jd = 0.0;
  double pr = 0.0;
  double retention = 0.0;
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
  std::size_t n_estimated = 0;
  std::size_t n_good = 0;
  std::size_t n_input = 0;

  double recall() const;
  double f_score() const;
};

/// Jaccard distance, precision and retention of `estimated` against
/// `truth_good`. Throws EstimateNotSubsetError when estimated is not a subset
/// of input. An empty estimate has precision 0; JD is 0 only when the truth is
/// empty too.
EvalReport evaluate(const EdgeSet& estimated, const EdgeSet& truth_good, const EdgeSet& input);

struct ScoreHistogram {
  std::vector<double> bin_edges;
  std::vector<std::size_t> good_counts;
  std::vector<std::size_t> bad_counts;

  std::size_t bins() const { return good_counts.size(); }
};

/// Uniform bins over [0, 1], each closed on the right: (lo, hi], with the
/// first bin [0, hi]. A score on a bin edge counts in the lower bin.
ScoreHistogram score_histogram(const EdgeStatistics& scores, const std::vector<bool>& good_mask, int bins);

struct WalkDensityEstimate {
  double empirical_mean = 0.0;
  double predicted = 0.0;
  /// Standard error of the empirical mean over trials.
  double standard_error = 0.0;
  int trials = 0;
};

/// Monte-Carlo mean of X^2(i, j) over ordered off-diagonal pairs of
/// Erdos-Renyi graphs G(N, p), against the prediction (N - 2) p^2. Trial t
/// uses its own stream of `seed`.
WalkDensityEstimate er_walk_density(int num_nodes, double p, int trials, std::uint64_t seed,
                                    const Parallelism& par = {});

/// Sampled G(N, p) adjacency (single image per node, so no diagonal blocks).
CsrMatrix erdos_renyi(int num_nodes, double p, std::uint64_t seed, std::uint64_t stream);

}  // namespace fcc
