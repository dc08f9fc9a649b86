#include "fcc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <string>

#include "fcc/errors.hpp"
#include "fcc/rng.hpp"

namespace fcc {

EdgeSet make_edge_set(std::span<const Edge> edges) {
  EdgeSet out;
  out.reserve(edges.size());
  for (const auto& e : edges) out.push_back(canonical(e.i, e.j));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double EvalReport::recall() const {
  const auto denom = true_positives + false_negatives;
  return denom == 0 ? 0.0 : static_cast<double>(true_positives) / static_cast<double>(denom);
}

double EvalReport::f_score() const {
  const auto denom = 2 * true_positives + false_positives + false_negatives;
  return denom == 0 ? 1.0 : 2.0 * static_cast<double>(true_positives) / static_cast<double>(denom);
}

EvalReport evaluate(const EdgeSet& estimated, const EdgeSet& truth_good, const EdgeSet& input) {
  if (!std::includes(input.begin(), input.end(), estimated.begin(), estimated.end())) {
    throw EstimateNotSubsetError("estimated edges are not a subset of the input edges");
  }
  EdgeSet common;
  std::set_intersection(estimated.begin(), estimated.end(), truth_good.begin(), truth_good.end(),
                        std::back_inserter(common));
  EvalReport rep;
  rep.true_positives = common.size();
  rep.false_positives = estimated.size() - common.size();
  rep.false_negatives = truth_good.size() - common.size();
  rep.n_estimated = estimated.size();
  rep.n_good = truth_good.size();
  rep.n_input = input.size();
  rep.pr = estimated.empty() ? 0.0
                             : static_cast<double>(rep.true_positives) / static_cast<double>(estimated.size());
  const auto union_size = rep.true_positives + rep.false_positives + rep.false_negatives;
  rep.jd = union_size == 0 ? 0.0
                           : 1.0 - static_cast<double>(rep.true_positives) / static_cast<double>(union_size);
  rep.retention = input.empty() ? 0.0 : static_cast<double>(rep.n_estimated) / static_cast<double>(input.size());
  return rep;
}

ScoreHistogram score_histogram(const EdgeStatistics& scores, const std::vector<bool>& good_mask, int bins) {
  if (bins < 2) throw ConfigInvalidError("histogram needs at least 2 bins");
  if (good_mask.size() != scores.s.size()) throw ConfigInvalidError("good mask length differs from scores");
  ScoreHistogram h;
  const auto nb = static_cast<std::size_t>(bins);
  h.bin_edges.resize(nb + 1);
  for (std::size_t b = 0; b <= nb; ++b) h.bin_edges[b] = static_cast<double>(b) / static_cast<double>(nb);
  h.good_counts.assign(nb, 0);
  h.bad_counts.assign(nb, 0);
  for (std::size_t e = 0; e < scores.s.size(); ++e) {
    // Bins are (lo, hi], the first one [0, hi].
    const double v = std::clamp(scores.s[e], 0.0, 1.0);
    const auto upper = std::lower_bound(h.bin_edges.begin() + 1, h.bin_edges.end(), v);
    const auto bin = std::min(nb - 1, static_cast<std::size_t>(upper - (h.bin_edges.begin() + 1)));
    (good_mask[e] ? h.good_counts : h.bad_counts)[bin] += 1;
  }
  return h;
}

CsrMatrix erdos_renyi(int num_nodes, double p, std::uint64_t seed, std::uint64_t stream) {
  Rng rng(seed, stream);
  std::vector<Triplet> entries;
  for (Index i = 0; i < num_nodes; ++i) {
    for (Index j = i + 1; j < num_nodes; ++j) {
      if (rng.bernoulli(p)) {
        entries.push_back({i, j, 1.0});
        entries.push_back({j, i, 1.0});
      }
    }
  }
  return CsrMatrix::from_triplets(num_nodes, std::move(entries));
}

WalkDensityEstimate er_walk_density(int num_nodes, double p, int trials, std::uint64_t seed,
                                    const Parallelism& par) {
  if (num_nodes < 3) throw ConfigInvalidError("need at least 3 nodes");
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigInvalidError("edge probability must lie in [0,1]");
  if (trials < 1) throw ConfigInvalidError("need at least one trial");

  std::vector<double> means(static_cast<std::size_t>(trials), 0.0);
  const double pairs = static_cast<double>(num_nodes) * (num_nodes - 1);
  parallel_for(means.size(), par, [&](std::size_t begin, std::size_t end) {
    for (std::size_t t = begin; t < end; ++t) {
      const CsrMatrix x = erdos_renyi(num_nodes, p, seed, t);
      const CsrMatrix x2 = multiply(x, x);
      double off_diagonal = 0.0;
      for (Index i = 0; i < x2.dim(); ++i) {
        const auto cols = x2.row_cols(i);
        const auto vals = x2.row_values(i);
        for (std::size_t q = 0; q < cols.size(); ++q) {
          if (cols[q] != i) off_diagonal += vals[q];
        }
      }
      means[t] = off_diagonal / pairs;
    }
  });

  WalkDensityEstimate out;
  out.trials = trials;
  out.predicted = (num_nodes - 2) * p * p;
  double sum = 0.0;
  for (const double m : means) sum += m;
  out.empirical_mean = sum / trials;
  if (trials > 1) {
    double ss = 0.0;
    for (const double m : means) ss += (m - out.empirical_mean) * (m - out.empirical_mean);
    out.standard_error = std::sqrt(ss / (trials - 1) / trials);
  }
  return out;
}

}  // namespace fcc
