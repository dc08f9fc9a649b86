#pragma once

#include <functional>
#include <vector>

#include "fcc/match_graph.hpp"
#include "fcc/parallel.hpp"
#include "fcc/statistics.hpp"

namespace fcc {

enum class ReweightMode { soft, hard };

/// Parameters of the iterative filter.
///
/// In hard mode each iteration binarizes the scores at threshold_at(t). The
/// per-iteration thresholds are either listed explicitly or follow
/// schedule_step * t (1-based t).
struct FccConfig {
  int q = 4;
  int r = 2;
  int s = 2;
  int iterations = 10;
  ReweightMode mode = ReweightMode::soft;
  std::vector<double> thresholds;
  double schedule_step = 0.05;
  double final_threshold = 0.5;
  /// Stop early once no score moves by more than this between iterations.
  double convergence_tolerance = 1e-12;

  /// Hard mode, tau_t = 0.05 t (midsize collections).
  static FccConfig hard_midsize(int iterations = 10);
  /// Hard mode, tau_t = 0.1 t with two iterations (large collections).
  static FccConfig hard_large();

  double threshold_at(int iteration) const;

  /// Throws ConfigInvalidError.
  void validate() const;
};

struct IterationTrace {
  int iteration = 0;
  std::size_t nnz_y = 0;
  std::size_t nnz_power_r = 0;
  std::size_t nnz_power_s = 0;
  double seconds_powers = 0.0;
  double seconds_statistics = 0.0;
  double max_score_change = 0.0;
};

struct FccResult {
  /// Observed edges whose final weight exceeds final_threshold.
  MatchGraph filtered;
  /// Last-iteration weights on the observed support (post-binarization in
  /// hard mode) together with the raw s1 and s1_plus_s2 of that iteration.
  EdgeStatistics scores;
  int iterations_run = 0;
  std::vector<IterationTrace> trace;
};

/// Called after each iteration with that iteration's scores.
using IterationObserver = std::function<void(int iteration, const EdgeStatistics& scores)>;

FccResult fcc_run(const MatchGraph& x, const FccConfig& cfg, const Parallelism& par = {},
                  const IterationObserver& observer = {});

/// fcc_run without the final threshold.
EdgeStatistics fcc_scores(const MatchGraph& x, const FccConfig& cfg, const Parallelism& par = {});

}  // namespace fcc
