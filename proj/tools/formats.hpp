#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "fcc/errors.hpp"
#include "fcc/match_graph.hpp"
#include "fcc/metrics.hpp"
#include "fcc/statistics.hpp"

namespace fcc::cli {

/// Malformed file content; the message carries the line number.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Two files that must describe the same partition do not.
class HeaderMismatchError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// All three formats share a header: "n N" on line 1, the n keypoint counts on
// line 2. Each following line is one edge "a k b l" in image-local indices,
// plus a weight (match files, optional) or a score (scores files).

struct EdgeFile {
  ImagePartition partition;
  EdgeSet edges;
};

struct ScoresFile {
  ImagePartition partition;
  std::vector<Edge> edges;
  std::vector<double> scores;
};

MatchGraph parse_match_file(std::istream& in);
EdgeFile parse_truth_file(std::istream& in);
ScoresFile parse_scores_file(std::istream& in);

/// Weights are written, with 6 fractional digits, only for non-binary graphs.
std::string format_match_file(const MatchGraph& graph);
std::string format_truth_file(const ImagePartition& partition, std::span<const Edge> edges);
std::string format_scores_file(const ImagePartition& partition, std::span<const Edge> edges,
                               std::span<const double> scores);

/// Fixed notation with 6 fractional digits, independent of the C locale.
std::string fixed6(double v);

MatchGraph load_match_file(const std::string& path);
EdgeFile load_truth_file(const std::string& path);
ScoresFile load_scores_file(const std::string& path);
void save_text(const std::string& path, const std::string& content);

void require_same_partition(const ImagePartition& a, const ImagePartition& b, const std::string& what);

}  // namespace fcc::cli
