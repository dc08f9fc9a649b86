#include "fcc/fcc.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "fcc/errors.hpp"

namespace fcc {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct LoopOutput {
  EdgeStatistics scores;
  int iterations_run = 0;
  std::vector<IterationTrace> trace;
};

void check_integral(std::span<const double> s1) {
  for (const double v : s1) {
    if (std::abs(v - std::round(v)) > 1e-9) {
      throw InvalidStructureError("walk count on a binary graph is not integral");
    }
  }
}

LoopOutput run_loop(const MatchGraph& x, const FccConfig& cfg, const Parallelism& par,
                    const IterationObserver& observer = {}) {
  cfg.validate();
  if (!x.is_binary()) throw ConfigInvalidError("input match graph must be binary");

  const std::vector<Edge> support = x.upper_edges();
  LoopOutput out;
  MatchGraph y = x;
  std::vector<double> previous;
  bool y_binary = true;
  PowerWorkspace powers;

  for (int t = 1; t <= cfg.iterations; ++t) {
    IterationTrace trace;
    trace.iteration = t;
    trace.nnz_y = y.adjacency().nnz();

    auto start = Clock::now();
    powers.compute(y.adjacency(), x.partition(), cfg.r, cfg.s, par);
    trace.nnz_power_r = powers.power_r().nnz();
    trace.nnz_power_s = powers.power_s().nnz();
    trace.seconds_powers = seconds_since(start);

    start = Clock::now();
    auto s1 = powers.s1(support, par);
    if (y_binary) check_integral(s1);
    auto s12 = powers.s1_plus_s2(support, par);
    EdgeStatistics stats = combine(std::move(s1), std::move(s12), support);
    if (cfg.mode == ReweightMode::hard) {
      const double tau = cfg.threshold_at(t);
      for (double& v : stats.s) v = v > tau ? 1.0 : 0.0;
    }
    trace.seconds_statistics = seconds_since(start);
    if (observer) observer(t, stats);

    double change = 0.0;
    if (!previous.empty()) {
      for (std::size_t e = 0; e < previous.size(); ++e) {
        change = std::max(change, std::abs(stats.s[e] - previous[e]));
      }
    }
    trace.max_score_change = previous.empty() ? 1.0 : change;
    out.trace.push_back(trace);
    out.iterations_run = t;

    const bool converged = !previous.empty() && change <= cfg.convergence_tolerance;
    previous = stats.s;
    out.scores = std::move(stats);
    if (converged || t == cfg.iterations) break;

    // Zero scores leave Y's support; the mask stays the observed X.
    y = MatchGraph::from_upper_edges(x.partition(), support, previous);
    y_binary = cfg.mode == ReweightMode::hard;
  }
  return out;
}

}  // namespace

FccConfig FccConfig::hard_midsize(int iterations) {
  FccConfig cfg;
  cfg.mode = ReweightMode::hard;
  cfg.iterations = iterations;
  cfg.schedule_step = 0.05;
  return cfg;
}

FccConfig FccConfig::hard_large() {
  FccConfig cfg;
  cfg.mode = ReweightMode::hard;
  cfg.iterations = 2;
  cfg.schedule_step = 0.1;
  return cfg;
}

double FccConfig::threshold_at(int iteration) const {
  if (!thresholds.empty()) return thresholds.at(static_cast<std::size_t>(iteration) - 1);
  return schedule_step * iteration;
}

void FccConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigInvalidError(msg); };
  if (r < 1 || s < 1 || q < 1) fail("powers q, r, s must be positive");
  if (r + s != q) fail("q must equal r + s");
  if (r > kMaxPower || s > kMaxPower) {
    throw PowerTooLargeError("powers r and s are limited to " + std::to_string(kMaxPower));
  }
  if (iterations < 1) fail("iterations must be positive");
  if (!(final_threshold >= 0.0 && final_threshold <= 1.0)) fail("final threshold must lie in [0,1]");
  if (!(convergence_tolerance >= 0.0)) fail("convergence tolerance must be nonnegative");
  if (mode == ReweightMode::hard) {
    if (!thresholds.empty() && thresholds.size() != static_cast<std::size_t>(iterations)) {
      fail("explicit threshold list must have one entry per iteration");
    }
    for (int t = 1; t <= iterations; ++t) {
      const double tau = threshold_at(t);
      if (!(tau >= 0.0 && tau <= 1.0)) {
        fail("threshold for iteration " + std::to_string(t) + " lies outside [0,1]");
      }
    }
  }
}

FccResult fcc_run(const MatchGraph& x, const FccConfig& cfg, const Parallelism& par,
                  const IterationObserver& observer) {
  LoopOutput loop = run_loop(x, cfg, par, observer);
  std::vector<Edge> kept;
  for (std::size_t e = 0; e < loop.scores.size(); ++e) {
    if (loop.scores.s[e] > cfg.final_threshold) kept.push_back(loop.scores.edges[e]);
  }
  FccResult result{MatchGraph::from_upper_edges(x.partition(), kept), std::move(loop.scores),
                   loop.iterations_run, std::move(loop.trace)};
  return result;
}

EdgeStatistics fcc_scores(const MatchGraph& x, const FccConfig& cfg, const Parallelism& par) {
  return run_loop(x, cfg, par).scores;
}

}  // namespace fcc
