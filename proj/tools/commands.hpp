#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fcc/fcc.hpp"
#include "fcc/synthetic.hpp"

namespace fcc::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kParse = 2, kConfig = 3, kIo = 4 };

struct GenerateOptions {
  SyntheticConfig config;
  std::string out;
  std::string truth_out;
};

struct FilterOptions {
  std::string input;
  FccConfig config;
  std::string out;
  std::string scores_out;
  std::string truth;
  std::string report;
  unsigned threads = 1;
};

struct EvalOptions {
  std::string estimate;
  std::string truth;
  std::string input;
  std::string report;
};

struct HistOptions {
  std::string scores;
  std::string truth;
  int bins = 50;
  std::string out;
};

struct BenchOptions {
  std::vector<int> sizes;
  std::uint64_t seed = 0;
  int points = 100;
  double pairs_per_camera = 25.0;
  int iterations = 3;
  unsigned threads = 1;
  std::string out;
};

/// "replace:RHO", "remove-add:Q0,Q1" or "none". Throws ConfigInvalidError.
Corruption parse_corruption(const std::string& text);

/// Applies a hard-mode schedule: "midsize" (0.05 t), "large" (0.1 t),
/// "linear:STEP", or an explicit comma-separated list with one threshold per
/// iteration. Throws ConfigInvalidError.
void apply_schedule(const std::string& text, FccConfig& config);

// Each command writes its outputs and throws on failure. Reports go to
// stdout when no report path is given.
void cmd_generate(const GenerateOptions& opt);
void cmd_filter(const FilterOptions& opt);
void cmd_eval(const EvalOptions& opt);
void cmd_hist(const HistOptions& opt);
void cmd_bench(const BenchOptions& opt);

/// Parses the command line, runs the command and maps errors to exit codes:
/// 2 parse or header mismatch, 3 invalid configuration, 4 I/O.
int run(int argc, char** argv);

}  // namespace fcc::cli
