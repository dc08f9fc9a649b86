#include "formats.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

namespace fcc::cli {
namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t p = 0;
  while (p < line.size()) {
    while (p < line.size() && (line[p] == ' ' || line[p] == '\t' || line[p] == '\r')) ++p;
    const std::size_t q = p;
    while (p < line.size() && line[p] != ' ' && line[p] != '\t' && line[p] != '\r') ++p;
    if (p > q) out.push_back(line.substr(q, p - q));
  }
  return out;
}

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  bool next(std::vector<std::string_view>& tokens) {
    while (std::getline(in_, line_)) {
      ++number_;
      tokens = split_ws(line_);
      if (!tokens.empty() || header_lines_ < 2) {
        ++header_lines_;
        return true;
      }
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("line " + std::to_string(number_) + ": " + what);
  }

  long long integer(std::string_view tok) const {
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) fail("expected an integer, got '" + std::string(tok) + "'");
    return v;
  }

  double real(std::string_view tok) const {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v)) {
      fail("expected a number, got '" + std::string(tok) + "'");
    }
    return v;
  }

 private:
  std::istream& in_;
  std::string line_;
  int number_ = 0;
  int header_lines_ = 0;
};

ImagePartition parse_header(LineReader& reader) {
  std::vector<std::string_view> tok;
  if (!reader.next(tok)) reader.fail("missing header");
  if (tok.size() != 2) reader.fail("header must be 'n N'");
  const long long n = reader.integer(tok[0]);
  const long long total = reader.integer(tok[1]);
  if (n < 0 || total < 0) reader.fail("negative header value");
  if (!reader.next(tok)) reader.fail("missing keypoint counts");
  if (static_cast<long long>(tok.size()) != n) reader.fail("expected " + std::to_string(n) + " keypoint counts");
  std::vector<Index> sizes;
  long long sum = 0;
  for (const auto t : tok) {
    const long long m = reader.integer(t);
    if (m <= 0 || m > INT32_MAX) reader.fail("keypoint counts must be positive");
    sum += m;
    sizes.push_back(static_cast<Index>(m));
  }
  if (sum != total) reader.fail("keypoint counts sum to " + std::to_string(sum) + ", header says " + std::to_string(total));
  try {
    return ImagePartition(std::move(sizes));
  } catch (const Error& e) {
    reader.fail(e.what());
  }
}

// Reads "a k b l" and up to `extra` trailing numbers into `values`.
Edge parse_edge(const LineReader& reader, const ImagePartition& part, const std::vector<std::string_view>& tok,
                std::size_t min_extra, std::size_t max_extra, std::vector<double>& values) {
  if (tok.size() < 4 + min_extra || tok.size() > 4 + max_extra) reader.fail("wrong number of fields");
  long long v[4];
  for (int k = 0; k < 4; ++k) v[k] = reader.integer(tok[k]);
  if (v[0] == v[2]) reader.fail("match inside one image");
  for (int k = 0; k < 4; ++k) {
    if (v[k] < 0 || v[k] > INT32_MAX) reader.fail("index out of range");
  }
  Index i = 0;
  Index j = 0;
  try {
    i = part.global_index(static_cast<Index>(v[0]), static_cast<Index>(v[1]));
    j = part.global_index(static_cast<Index>(v[2]), static_cast<Index>(v[3]));
  } catch (const Error& e) {
    reader.fail(e.what());
  }
  values.clear();
  for (std::size_t k = 4; k < tok.size(); ++k) values.push_back(reader.real(tok[k]));
  return canonical(i, j);
}

std::string header_of(const ImagePartition& part) {
  std::string out = std::to_string(part.image_count()) + " " + std::to_string(part.total_keypoints()) + "\n";
  const auto sizes = part.keypoints_per_image();
  for (std::size_t a = 0; a < sizes.size(); ++a) {
    if (a > 0) out += ' ';
    out += std::to_string(sizes[a]);
  }
  out += '\n';
  return out;
}

void append_edge(std::string& out, const ImagePartition& part, const Edge& e) {
  out += std::to_string(part.image_of(e.i));
  out += ' ';
  out += std::to_string(part.local_index(e.i));
  out += ' ';
  out += std::to_string(part.image_of(e.j));
  out += ' ';
  out += std::to_string(part.local_index(e.j));
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return in;
}

template <class F>
auto load(const std::string& path, F parse) {
  std::ifstream in = open_in(path);
  try {
    return parse(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace

std::string fixed6(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 6);
  if (ec != std::errc()) throw Error("cannot format number");
  return std::string(buf, ptr);
}

MatchGraph parse_match_file(std::istream& in) {
  LineReader reader(in);
  ImagePartition part = parse_header(reader);
  std::vector<std::pair<Edge, double>> entries;
  std::vector<std::string_view> tok;
  std::vector<double> extra;
  while (reader.next(tok)) {
    const Edge e = parse_edge(reader, part, tok, 0, 1, extra);
    const double w = extra.empty() ? 1.0 : extra[0];
    if (w < 0.0) reader.fail("negative weight");
    entries.emplace_back(e, w);
  }
  std::stable_sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Edge> edges;
  std::vector<double> weights;
  for (const auto& [e, w] : entries) {
    if (!edges.empty() && edges.back() == e) {
      if (weights.back() != w) throw ParseError("edge listed twice with different weights");
      continue;
    }
    edges.push_back(e);
    weights.push_back(w);
  }
  return MatchGraph::from_upper_edges(std::move(part), edges, weights);
}

EdgeFile parse_truth_file(std::istream& in) {
  LineReader reader(in);
  EdgeFile out;
  out.partition = parse_header(reader);
  std::vector<std::string_view> tok;
  std::vector<double> extra;
  while (reader.next(tok)) out.edges.push_back(parse_edge(reader, out.partition, tok, 0, 0, extra));
  out.edges = make_edge_set(out.edges);
  return out;
}

ScoresFile parse_scores_file(std::istream& in) {
  LineReader reader(in);
  ScoresFile out;
  out.partition = parse_header(reader);
  std::vector<std::string_view> tok;
  std::vector<double> extra;
  while (reader.next(tok)) {
    const Edge e = parse_edge(reader, out.partition, tok, 1, 1, extra);
    if (!out.edges.empty() && !(out.edges.back() < e)) reader.fail("score lines must be sorted and unique");
    out.edges.push_back(e);
    out.scores.push_back(extra[0]);
  }
  return out;
}

std::string format_match_file(const MatchGraph& graph) {
  const ImagePartition& part = graph.partition();
  std::string out = header_of(part);
  const bool weighted = !graph.is_binary();
  const auto edges = graph.upper_edges();
  const auto weights = graph.upper_weights();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    append_edge(out, part, edges[e]);
    if (weighted) {
      out += ' ';
      out += fixed6(weights[e]);
    }
    out += '\n';
  }
  return out;
}

std::string format_truth_file(const ImagePartition& partition, std::span<const Edge> edges) {
  std::string out = header_of(partition);
  for (const auto& e : make_edge_set(edges)) {
    append_edge(out, partition, e);
    out += '\n';
  }
  return out;
}

std::string format_scores_file(const ImagePartition& partition, std::span<const Edge> edges,
                               std::span<const double> scores) {
  if (edges.size() != scores.size()) throw Error("score count differs from edge count");
  std::string out = header_of(partition);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    append_edge(out, partition, edges[e]);
    out += ' ';
    out += fixed6(scores[e]);
    out += '\n';
  }
  return out;
}

MatchGraph load_match_file(const std::string& path) {
  return load(path, [](std::istream& in) { return parse_match_file(in); });
}

EdgeFile load_truth_file(const std::string& path) {
  return load(path, [](std::istream& in) { return parse_truth_file(in); });
}

ScoresFile load_scores_file(const std::string& path) {
  return load(path, [](std::istream& in) { return parse_scores_file(in); });
}

void save_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.close();
  if (!out) throw IoError("failed writing '" + path + "'");
}

void require_same_partition(const ImagePartition& a, const ImagePartition& b, const std::string& what) {
  if (!(a == b)) throw HeaderMismatchError(what + ": headers describe different partitions");
}

}  // namespace fcc::cli
