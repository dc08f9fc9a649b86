#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "fcc/fcc.hpp"
#include "fcc/metrics.hpp"
#include "fcc/synthetic.hpp"
#include "properties.hpp"
#include "support.hpp"

#ifdef FCC_HAVE_CLI
#include "commands.hpp"
#endif

namespace {

using namespace fcc;
using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
  std::printf("criterion %d: %s (%s)\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

void small_example_scores() {
  const MatchGraph x = testing::small_example();
  FccConfig cfg;
  cfg.q = 2;
  cfg.r = 1;
  cfg.s = 1;
  cfg.iterations = 1;
  const auto start = Clock::now();
  const EdgeStatistics got = fcc_scores(x, cfg);
  const double secs = elapsed(start);

  auto want = [](Edge e) {
    const Index i = e.i + 1;
    const Index j = e.j + 1;
    if (i == 1 && j == 4) return 0.0;
    if ((i == 1 && (j == 5 || j == 7)) || (i == 4 && (j == 6 || j == 8))) return 0.5;
    return 1.0;
  };
  bool exact = got.size() == 11;
  for (std::size_t e = 0; e < got.size(); ++e) exact = exact && got.s[e] == want(got.edges[e]);
  report(1, exact && secs < 1e-3, std::string(exact ? "exact" : "mismatch") + ", " + fmt("%.3f ms", secs * 1e3));
}

std::string describe(const testing::CheckResult& r) {
  std::ostringstream os;
  os << r.instances << " instances, " << r.cases << " cases";
  if (r.failure) os << ", " << *r.failure;
  return os.str();
}

void factored_products() {
  const auto start = Clock::now();
  const auto res = testing::check_factored_products(100, 11);
  const double secs = elapsed(start);
  report(2, res.ok() && secs < 10.0, describe(res) + ", " + fmt("%.2f s", secs));
}

void structural_properties() {
  const auto a = testing::check_subgraph_s2_vanishes(100, 12);
  const auto b = testing::check_s2_characterizes_completion(100, 13);
  const auto c = testing::check_completion_cliques(100, 14);
  report(3, a.ok() && b.ok() && c.ok(),
         "vanishing: " + describe(a) + "; characterization: " + describe(b) + "; cliques: " + describe(c));
}

std::size_t mode_bin(const std::vector<std::size_t>& counts) {
  return static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

void synthetic_reproduction() {
  constexpr int kSeeds = 10;
  constexpr int kBins = 50;
  bool pass = true;
  double worst_jd = 0.0;
  double worst_pr = 1.0;
  int separated = 0;
  const auto start = Clock::now();
  for (int seed = 1; seed <= kSeeds; ++seed) {
    SyntheticConfig sc;
    sc.num_points = 100;
    sc.num_cameras = 100;
    sc.pair_prob = 0.5;
    sc.corruption = ReplaceCorruption{0.5};
    sc.seed = static_cast<std::uint64_t>(seed);
    const LabeledInstance inst = generate_instance(sc);

    FccConfig cfg;
    cfg.iterations = 5;
    cfg.final_threshold = 0.5;
    bool overlap = false;
    bool mode_ok = false;
    const FccResult res = fcc_run(inst.graph, cfg, Parallelism::hardware(), [&](int t, const EdgeStatistics& s) {
      if (t != 1) return;
      const ScoreHistogram h = score_histogram(s, inst.good, kBins);
      for (std::size_t b = 0; b < h.bins(); ++b) overlap = overlap || (h.good_counts[b] > 0 && h.bad_counts[b] > 0);
      mode_ok = mode_bin(h.good_counts) > mode_bin(h.bad_counts);
    });
    const EvalReport ev = evaluate(make_edge_set(res.filtered.upper_edges()), make_edge_set(inst.good_edges()),
                                   make_edge_set(inst.graph.upper_edges()));
    worst_jd = std::max(worst_jd, ev.jd);
    worst_pr = std::min(worst_pr, ev.pr);
    if (overlap && mode_ok) ++separated;
    pass = pass && overlap && mode_ok && ev.jd <= 0.01 && ev.pr >= 0.99;
  }
  const double secs = elapsed(start);
  report(4, pass && secs < 30.0,
         std::to_string(separated) + "/" + std::to_string(kSeeds) + " overlapping with separated modes, worst JD " +
             fmt("%.5f", worst_jd) + ", worst PR " + fmt("%.5f", worst_pr) + ", " + fmt("%.2f s", secs));
}

void walk_density() {
  const auto start = Clock::now();
  const WalkDensityEstimate est = er_walk_density(200, 0.1, 100, 15);
  const double secs = elapsed(start);
  const double rel = std::abs(est.empirical_mean - 1.98) / 1.98;
  report(5, rel <= 0.05 && secs < 10.0,
         "mean " + fmt("%.4f", est.empirical_mean) + " vs 1.98, " + fmt("%.2f%% off", rel * 100) + ", " +
             fmt("%.2f s", secs));
}

#ifdef FCC_HAVE_CLI
std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void determinism() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("fcc_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const std::vector<std::string> artifacts{"x.txt", "truth.txt", "y.txt", "scores.txt"};
  std::vector<std::vector<std::string>> runs;
  for (const unsigned threads : {1u, 1u, 4u}) {
    const fs::path run = dir / std::to_string(runs.size());
    fs::create_directories(run);
    cli::GenerateOptions gen;
    gen.config.num_points = 100;
    gen.config.num_cameras = 50;
    gen.config.seed = 21;
    gen.out = (run / "x.txt").string();
    gen.truth_out = (run / "truth.txt").string();
    cli::cmd_generate(gen);
    cli::FilterOptions filt;
    filt.input = gen.out;
    filt.out = (run / "y.txt").string();
    filt.scores_out = (run / "scores.txt").string();
    filt.report = (run / "report.json").string();
    filt.threads = threads;
    cli::cmd_filter(filt);
    std::vector<std::string> bytes;
    for (const auto& name : artifacts) bytes.push_back(slurp(run / name));
    runs.push_back(std::move(bytes));
  }
  fs::remove_all(dir);
  const bool repeat = runs[0] == runs[1];
  const bool workers = runs[0] == runs[2];
  const bool nonempty = std::all_of(runs[0].begin(), runs[0].end(), [](const std::string& s) { return !s.empty(); });
  report(6, repeat && workers && nonempty,
         std::string("repeat ") + (repeat ? "identical" : "differs") + ", 1 vs 4 workers " +
             (workers ? "identical" : "differs"));
}
#else
void determinism() { report(6, false, "built without the command-line tool"); }
#endif

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct ScalingPoint {
  double seconds = 0.0;
  double nnz = 0.0;
};

ScalingPoint per_iteration_cost(int cameras) {
  std::vector<double> times;
  double nnz = 0.0;
  constexpr int kSeeds = 3;
  for (int seed = 1; seed <= kSeeds; ++seed) {
    SyntheticConfig sc;
    sc.num_points = 100;
    sc.num_cameras = cameras;
    sc.pair_prob = std::min(1.0, 25.0 / cameras);
    sc.seed = static_cast<std::uint64_t>(100 + seed);
    const LabeledInstance inst = generate_instance(sc);
    nnz += static_cast<double>(inst.graph.adjacency().nnz()) / kSeeds;
    FccConfig cfg;
    cfg.iterations = 3;
    cfg.convergence_tolerance = 0.0;
    const FccResult res = fcc_run(inst.graph, cfg);
    for (const auto& t : res.trace) times.push_back(t.seconds_powers + t.seconds_statistics);
  }
  return {median(times), nnz};
}

void scaling() {
  const ScalingPoint small = per_iteration_cost(50);
  const ScalingPoint large = per_iteration_cost(200);
  const double ratio = large.seconds / small.seconds;
  report(7, ratio <= 8.0,
         "n=50: " + fmt("%.4f s", small.seconds) + ", n=200: " + fmt("%.4f s", large.seconds) + ", time ratio " +
             fmt("%.2f", ratio) + ", nnz ratio " + fmt("%.2f", large.nnz / small.nnz));
}

}  // namespace

int main() {
  small_example_scores();
  factored_products();
  structural_properties();
  synthetic_reproduction();
  walk_density();
  determinism();
  scaling();
  return failures == 0 ? 0 : 1;
}
