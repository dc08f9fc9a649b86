#include "commands.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "fcc/metrics.hpp"
#include "formats.hpp"

namespace fcc::cli {
namespace {

using Json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size() || !std::isfinite(v)) {
      throw ConfigInvalidError("bad number '" + item + "' in " + what);
    }
    out.push_back(v);
  }
  if (out.empty()) throw ConfigInvalidError("empty " + what);
  return out;
}

void emit_report(const Json& report, const std::string& path) {
  const std::string text = report.dump(2) + "\n";
  if (path.empty()) {
    std::cout << text;
  } else {
    save_text(path, text);
  }
}

Json eval_json(const EvalReport& r) {
  return Json{{"jd", r.jd},
              {"pr", r.pr},
              {"retention", r.retention},
              {"true_positives", r.true_positives},
              {"false_positives", r.false_positives},
              {"false_negatives", r.false_negatives},
              {"n_estimated", r.n_estimated},
              {"n_good", r.n_good},
              {"n_input", r.n_input}};
}

Json config_json(const FccConfig& c, unsigned threads) {
  Json j{{"q", c.q},
         {"r", c.r},
         {"s", c.s},
         {"iterations", c.iterations},
         {"mode", c.mode == ReweightMode::soft ? "soft" : "hard"},
         {"final_threshold", c.final_threshold},
         {"convergence_tolerance", c.convergence_tolerance},
         {"threads", threads}};
  if (c.mode == ReweightMode::hard) {
    Json taus = Json::array();
    for (int t = 1; t <= c.iterations; ++t) taus.push_back(c.threshold_at(t));
    j["thresholds"] = taus;
  }
  return j;
}

Json trace_json(const std::vector<IterationTrace>& trace) {
  Json out = Json::array();
  for (const auto& t : trace) {
    out.push_back({{"iteration", t.iteration},
                   {"nnz_y", t.nnz_y},
                   {"nnz_power_r", t.nnz_power_r},
                   {"nnz_power_s", t.nnz_power_s},
                   {"max_score_change", t.max_score_change},
                   {"seconds_powers", t.seconds_powers},
                   {"seconds_statistics", t.seconds_statistics}});
  }
  return out;
}

}  // namespace

Corruption parse_corruption(const std::string& text) {
  if (text == "none") return ReplaceCorruption{0.0};
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  const std::string args = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (kind == "replace") {
    const auto v = parse_list(args, "replace corruption");
    if (v.size() != 1) throw ConfigInvalidError("replace corruption takes one probability");
    return ReplaceCorruption{v[0]};
  }
  if (kind == "remove-add") {
    const auto v = parse_list(args, "remove-add corruption");
    if (v.size() != 2) throw ConfigInvalidError("remove-add corruption takes two probabilities");
    return RemoveAddCorruption{v[0], v[1]};
  }
  throw ConfigInvalidError("unknown corruption '" + text + "'");
}

void apply_schedule(const std::string& text, FccConfig& config) {
  config.thresholds.clear();
  if (text == "midsize") {
    config.schedule_step = 0.05;
  } else if (text == "large") {
    config.schedule_step = 0.1;
  } else if (text.rfind("linear:", 0) == 0) {
    const auto v = parse_list(text.substr(7), "threshold schedule");
    if (v.size() != 1) throw ConfigInvalidError("linear schedule takes one step");
    config.schedule_step = v[0];
  } else {
    config.thresholds = parse_list(text, "threshold schedule");
  }
}

void cmd_generate(const GenerateOptions& opt) {
  const LabeledInstance inst = generate_instance(opt.config);
  save_text(opt.out, format_match_file(inst.graph));
  if (!opt.truth_out.empty()) save_text(opt.truth_out, format_truth_file(inst.partition(), inst.good_edges()));
}

void cmd_filter(const FilterOptions& opt) {
  const auto start = Clock::now();
  opt.config.validate();
  const MatchGraph x = load_match_file(opt.input);
  EdgeFile truth;
  if (!opt.truth.empty()) {
    truth = load_truth_file(opt.truth);
    require_same_partition(x.partition(), truth.partition, "filter input and truth");
  }
  const double read_s = seconds_since(start);

  auto t = Clock::now();
  const FccResult res = fcc_run(x, opt.config, Parallelism{std::max(1u, opt.threads)});
  const double run_s = seconds_since(t);

  t = Clock::now();
  save_text(opt.out, format_match_file(res.filtered));
  if (!opt.scores_out.empty()) {
    save_text(opt.scores_out, format_scores_file(x.partition(), res.scores.edges, res.scores.s));
  }
  const double write_s = seconds_since(t);

  Json report{{"command", "filter"},
              {"config", config_json(opt.config, opt.threads)},
              {"input",
               {{"images", x.partition().image_count()},
                {"keypoints", x.keypoint_count()},
                {"edges", x.edge_count()}}},
              {"iterations_run", res.iterations_run},
              {"iterations", trace_json(res.trace)},
              {"filtered_edges", res.filtered.edge_count()}};
  if (!opt.truth.empty()) {
    report["eval"] = eval_json(
        evaluate(make_edge_set(res.filtered.upper_edges()), truth.edges, make_edge_set(x.upper_edges())));
  }
  report["seconds"] = {{"read", read_s}, {"filter", run_s}, {"write", write_s}, {"total", seconds_since(start)}};
  if (!opt.report.empty()) emit_report(report, opt.report);
}

void cmd_eval(const EvalOptions& opt) {
  const MatchGraph est = load_match_file(opt.estimate);
  const EdgeFile truth = load_truth_file(opt.truth);
  const MatchGraph input = load_match_file(opt.input);
  require_same_partition(input.partition(), est.partition(), "estimate and input");
  require_same_partition(input.partition(), truth.partition, "truth and input");
  const EvalReport r =
      evaluate(make_edge_set(est.upper_edges()), truth.edges, make_edge_set(input.upper_edges()));
  emit_report(Json{{"command", "eval"}, {"eval", eval_json(r)}}, opt.report);
}

void cmd_hist(const HistOptions& opt) {
  const ScoresFile scores = load_scores_file(opt.scores);
  const EdgeFile truth = load_truth_file(opt.truth);
  require_same_partition(scores.partition, truth.partition, "scores and truth");
  EdgeStatistics st;
  st.edges = scores.edges;
  st.s = scores.scores;
  std::vector<bool> good(st.edges.size());
  for (std::size_t e = 0; e < good.size(); ++e) {
    good[e] = std::binary_search(truth.edges.begin(), truth.edges.end(), st.edges[e]);
  }
  const ScoreHistogram h = score_histogram(st, good, opt.bins);
  std::string csv = "bin_lo,bin_hi,good,bad\n";
  for (std::size_t b = 0; b < h.bins(); ++b) {
    csv += fixed6(h.bin_edges[b]) + "," + fixed6(h.bin_edges[b + 1]) + "," + std::to_string(h.good_counts[b]) + "," +
           std::to_string(h.bad_counts[b]) + "\n";
  }
  if (opt.out.empty()) {
    std::cout << csv;
  } else {
    save_text(opt.out, csv);
  }
}

void cmd_bench(const BenchOptions& opt) {
  if (opt.sizes.empty()) throw ConfigInvalidError("need at least one size");
  for (std::size_t k = 0; k < opt.sizes.size(); ++k) {
    if (opt.sizes[k] < 2) throw ConfigInvalidError("sizes must be at least 2");
    if (k > 0 && opt.sizes[k] <= opt.sizes[k - 1]) throw ConfigInvalidError("sizes must be strictly ascending");
  }
  if (!(opt.pairs_per_camera > 0.0)) throw ConfigInvalidError("pairs per camera must be positive");
  if (opt.iterations < 1) throw ConfigInvalidError("iterations must be positive");

  Json rows = Json::array();
  for (const int n : opt.sizes) {
    SyntheticConfig sc;
    sc.num_points = opt.points;
    sc.num_cameras = n;
    sc.pair_prob = std::min(1.0, opt.pairs_per_camera / n);
    sc.seed = opt.seed;
    auto t = Clock::now();
    const LabeledInstance inst = generate_instance(sc);
    const double gen_s = seconds_since(t);

    FccConfig cfg;
    cfg.iterations = opt.iterations;
    cfg.convergence_tolerance = 0.0;
    t = Clock::now();
    const FccResult res = fcc_run(inst.graph, cfg, Parallelism{std::max(1u, opt.threads)});
    const double run_s = seconds_since(t);

    Json per_iter = Json::array();
    double sum = 0.0;
    for (const auto& tr : res.trace) {
      const double s = tr.seconds_powers + tr.seconds_statistics;
      per_iter.push_back(s);
      sum += s;
    }
    rows.push_back({{"cameras", n},
                    {"pair_prob", sc.pair_prob},
                    {"keypoints", inst.graph.keypoint_count()},
                    {"nnz_x", inst.graph.adjacency().nnz()},
                    {"nnz_x2", res.trace.empty() ? 0 : res.trace.front().nnz_power_r},
                    {"iterations_run", res.iterations_run},
                    {"seconds_generate", gen_s},
                    {"seconds_filter", run_s},
                    {"seconds_per_iteration", per_iter},
                    {"mean_seconds_per_iteration", res.trace.empty() ? 0.0 : sum / res.trace.size()}});
  }
  emit_report(Json{{"command", "bench"},
                   {"seed", opt.seed},
                   {"points", opt.points},
                   {"pairs_per_camera", opt.pairs_per_camera},
                   {"iterations", opt.iterations},
                   {"threads", opt.threads},
                   {"rows", rows}},
              opt.out);
}

int run(int argc, char** argv) {
  CLI::App app{"Filter keypoint matches by cluster consistency"};
  app.require_subcommand(1);
  const unsigned hw = Parallelism::hardware().workers;

  GenerateOptions gen;
  std::string corruption = "replace:0.5";
  auto* g = app.add_subcommand("generate", "Write a synthetic match file and its truth file");
  g->add_option("-m,--points", gen.config.num_points, "Scene points")->capture_default_str();
  g->add_option("-n,--cameras", gen.config.num_cameras, "Cameras")->capture_default_str();
  g->add_option("--pair-prob", gen.config.pair_prob, "Camera pair sampling probability")->capture_default_str();
  g->add_option("--corruption", corruption, "replace:RHO, remove-add:Q0,Q1 or none")->capture_default_str();
  g->add_option("--min-common", gen.config.min_common_points, "Minimum shared points per pair")->capture_default_str();
  g->add_option("--seed", gen.config.seed, "Random seed")->capture_default_str();
  g->add_option("-o,--out", gen.out, "Match file")->required();
  g->add_option("--truth-out", gen.truth_out, "Truth file");

  FilterOptions fil;
  fil.threads = hw;
  std::string mode = "soft";
  std::string schedule;
  auto* f = app.add_subcommand("filter", "Run the filter on a match file");
  f->add_option("-i,--input", fil.input, "Match file")->required();
  f->add_option("--q", fil.config.q, "Total walk length")->capture_default_str();
  f->add_option("--r", fil.config.r, "Walk length before the within-image hop")->capture_default_str();
  f->add_option("--s", fil.config.s, "Walk length after the within-image hop")->capture_default_str();
  f->add_option("--iters", fil.config.iterations, "Iterations")->capture_default_str();
  f->add_option("--mode", mode, "soft or hard")->check(CLI::IsMember({"soft", "hard"}))->capture_default_str();
  f->add_option("--tau", fil.config.final_threshold, "Final threshold")->capture_default_str();
  f->add_option("--tau-schedule", schedule, "Hard mode: midsize, large, linear:STEP or a list T1,T2,...");
  f->add_option("--tolerance", fil.config.convergence_tolerance, "Early-exit score change")->capture_default_str();
  f->add_option("-o,--out", fil.out, "Filtered match file")->required();
  f->add_option("--scores-out", fil.scores_out, "Scores file");
  f->add_option("--truth", fil.truth, "Truth file; adds an evaluation to the report");
  f->add_option("--report", fil.report, "JSON run report");
  f->add_option("--threads", fil.threads, "Worker threads")->capture_default_str();

  EvalOptions ev;
  auto* e = app.add_subcommand("eval", "Compare a filtered match file with the truth");
  e->add_option("--est", ev.estimate, "Filtered match file")->required();
  e->add_option("--truth", ev.truth, "Truth file")->required();
  e->add_option("--input", ev.input, "Unfiltered match file")->required();
  e->add_option("--report", ev.report, "JSON report (stdout if absent)");

  HistOptions hi;
  auto* h = app.add_subcommand("hist", "Histogram scores of good and bad edges");
  h->add_option("--scores", hi.scores, "Scores file")->required();
  h->add_option("--truth", hi.truth, "Truth file")->required();
  h->add_option("--bins", hi.bins, "Bins over [0,1]")->capture_default_str();
  h->add_option("-o,--out", hi.out, "CSV output (stdout if absent)");

  BenchOptions be;
  be.threads = hw;
  be.sizes = {50, 100, 200};
  auto* b = app.add_subcommand("bench", "Time the filter on synthetic instances of growing size");
  b->add_option("--sizes", be.sizes, "Camera counts, ascending")->delimiter(',')->capture_default_str();
  b->add_option("--seed", be.seed, "Random seed")->capture_default_str();
  b->add_option("--points", be.points, "Scene points")->capture_default_str();
  b->add_option("--pairs-per-camera", be.pairs_per_camera, "Expected sampled pairs per camera")
      ->capture_default_str();
  b->add_option("--iters", be.iterations, "Iterations per run")->capture_default_str();
  b->add_option("--threads", be.threads, "Worker threads")->capture_default_str();
  b->add_option("-o,--out", be.out, "JSON report (stdout if absent)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::CallForAllHelp& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return kConfig;
  }

  try {
    if (g->parsed()) {
      gen.config.corruption = parse_corruption(corruption);
      cmd_generate(gen);
    } else if (f->parsed()) {
      fil.config.mode = mode == "hard" ? ReweightMode::hard : ReweightMode::soft;
      if (!schedule.empty()) apply_schedule(schedule, fil.config);
      cmd_filter(fil);
    } else if (e->parsed()) {
      cmd_eval(ev);
    } else if (h->parsed()) {
      cmd_hist(hi);
    } else if (b->parsed()) {
      cmd_bench(be);
    }
  } catch (const ParseError& err) {
    std::cerr << "parse error: " << err.what() << "\n";
    return kParse;
  } catch (const HeaderMismatchError& err) {
    std::cerr << "header mismatch: " << err.what() << "\n";
    return kParse;
  } catch (const EstimateNotSubsetError& err) {
    std::cerr << "estimate not a subset of the input: " << err.what() << "\n";
    return kParse;
  } catch (const IoError& err) {
    std::cerr << "i/o error: " << err.what() << "\n";
    return kIo;
  } catch (const ConfigInvalidError& err) {
    std::cerr << "invalid configuration: " << err.what() << "\n";
    return kConfig;
  } catch (const PowerTooLargeError& err) {
    std::cerr << "invalid configuration: " << err.what() << "\n";
    return kConfig;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kFailure;
  }
  return kOk;
}

}  // namespace fcc::cli
