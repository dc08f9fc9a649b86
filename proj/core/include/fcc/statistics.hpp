#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fcc/match_graph.hpp"
#include "fcc/parallel.hpp"
#include "fcc/sparse_matrix.hpp"

namespace fcc {

inline constexpr int kMaxPower = 4;

/// Per-edge path statistics on the observed support.
///
/// s1 counts (weighted) walks of length r+s between the endpoints; s1_plus_s2
/// adds the walks that take one within-image hop between the r-th and the
/// (r+1)-th step. s = s1 / s1_plus_s2, with s = 0 when both vanish.
struct EdgeStatistics {
  std::vector<Edge> edges;
  std::vector<double> s1;
  std::vector<double> s1_plus_s2;
  std::vector<double> s;

  std::size_t size() const { return edges.size(); }
};

struct SparsityStats {
  std::size_t nnz = 0;
  double avg_nnz_per_column = 0.0;
};

/// Dense S1 = X^(r+s) and S2 = X^r D X^s, row-major.
struct DenseStatistics {
  Index dim = 0;
  std::vector<double> s1;
  std::vector<double> s2;

  double s1_at(Index i, Index j) const { return s1[static_cast<std::size_t>(i) * dim + j]; }
  double s2_at(Index i, Index j) const { return s2[static_cast<std::size_t>(i) * dim + j]; }
};

/// Square sparse matrix stored as column slabs: slab k holds, row by row, the
/// entries whose column lies in [bounds[k], bounds[k+1]). A masked product
/// over one slab only reads that slab, so a large power is streamed in pieces
/// that stay in cache. Columns are stored relative to the slab's first column,
/// which caps a slab at kMaxWidth columns.
class SlabbedMatrix {
 public:
  using LocalCol = std::uint16_t;
  static constexpr Index kMaxWidth = Index{1} << 16;

  struct Slab {
    std::vector<std::size_t> row_ptr;
    std::vector<LocalCol> cols;
    std::vector<double> values;
  };

  SlabbedMatrix() = default;
  /// Empty matrix with the given column bounds: bounds.front() == 0,
  /// bounds.back() == dim, strictly increasing, no slab wider than kMaxWidth.
  /// Throws InvalidStructureError.
  SlabbedMatrix(Index dim, std::vector<Index> bounds);

  static SlabbedMatrix split(const CsrMatrix& m, std::vector<Index> bounds);
  /// At least `slabs` column ranges of (nearly) equal width; more when the
  /// width cap requires it.
  static std::vector<Index> even_bounds(Index dim, std::size_t slabs);

  Index dim() const { return dim_; }
  std::size_t nnz() const;
  std::size_t slab_count() const { return slabs_.size(); }
  std::span<const Index> bounds() const { return bounds_; }
  const Slab& slab(std::size_t k) const { return slabs_[k]; }
  Slab& slab(std::size_t k) { return slabs_[k]; }
  std::span<const Slab> slabs() const { return slabs_; }

  CsrMatrix merged() const;

 private:
  Index dim_ = 0;
  std::vector<Index> bounds_{0, 0};
  std::vector<Slab> slabs_{Slab{{0}, {}, {}}};
};

/// Gustavson row-by-row product with a dense scratch accumulator.
CsrMatrix multiply(const CsrMatrix& a, const CsrMatrix& b, const Parallelism& par = {});

/// a * b written into `out`, split at out's column bounds. The storage of
/// `out` is reused, so repeated calls do not reallocate. Returns the number of
/// structural entries dropped because their value cancelled to zero.
std::size_t multiply_into(const CsrMatrix& a, const CsrMatrix& b, SlabbedMatrix& out,
                          const Parallelism& par = {});

/// Recomputes the values of out = a * b on out's current pattern, which must
/// be the full structural pattern of a * b (a previous multiply_into with the
/// same patterns that dropped nothing). Bit-identical to multiply_into.
/// Returns false, with out's values unspecified, if a value cancels to zero.
bool multiply_values_into(const CsrMatrix& a, const CsrMatrix& b, SlabbedMatrix& out,
                          const Parallelism& par = {});

/// Upper bound on nnz(a * b): per row, the walk count capped at the dimension.
std::size_t product_nnz_bound(const CsrMatrix& a, const CsrMatrix& b);

/// powers[p - 1] = a^p for p = 1..max_power. Throws PowerTooLargeError when
/// max_power > 4.
std::vector<CsrMatrix> power_ladder(const CsrMatrix& a, int max_power, const Parallelism& par = {});

/// p-th power of the weight matrix; block-diagonal entries appear for p >= 2.
CsrMatrix sparse_power(const CsrMatrix& a, int p, const Parallelism& par = {});
CsrMatrix sparse_power(const MatchGraph& g, int p, const Parallelism& par = {});

/// s1[e] = <column i of power_r, column j of power_s> for e = (i, j). Both
/// powers must be symmetric (powers of one symmetric matrix).
std::vector<double> masked_s1(const CsrMatrix& power_r, const CsrMatrix& power_s,
                              std::span<const Edge> support, const Parallelism& par = {});

/// Sum over images l of (row-sum of power_r(i, I_l)) * (row-sum of power_s(j, I_l)).
std::vector<double> masked_s1_plus_s2(const CsrMatrix& power_r, const CsrMatrix& power_s,
                                      std::span<const Edge> support, const ImagePartition& partition,
                                      const Parallelism& par = {});

std::vector<double> masked_s1(const SlabbedMatrix& power_r, const SlabbedMatrix& power_s,
                              std::span<const Edge> support, const Parallelism& par = {});
std::vector<double> masked_s1_plus_s2(const SlabbedMatrix& power_r, const SlabbedMatrix& power_s,
                                      std::span<const Edge> support, const ImagePartition& partition,
                                      const Parallelism& par = {});

/// Y^r and Y^s in slabbed form, sized so that one slab of the larger power
/// holds about kSlabBytes, plus the per-image row sums used by S1 + S2.
/// Reusing a workspace across iterations keeps the allocations, and when y
/// keeps its sparsity pattern the square is refreshed in place.
class PowerWorkspace {
 public:
  static constexpr std::size_t kSlabBytes = std::size_t{48} << 20;

  void compute(const CsrMatrix& y, const ImagePartition& partition, int r, int s,
               const Parallelism& par = {});

  const SlabbedMatrix& power_r() const { return r_.matrix; }
  const SlabbedMatrix& power_s() const { return shared_ ? r_.matrix : s_.matrix; }

  /// Same values as the masked_s1 and masked_s1_plus_s2 free functions.
  std::vector<double> s1(std::span<const Edge> support, const Parallelism& par = {}) const;
  std::vector<double> s1_plus_s2(std::span<const Edge> support, const Parallelism& par = {}) const;

 private:
  struct Power {
    SlabbedMatrix matrix;
    // Dense N x n image sums filled while multiplying; empty when skipped.
    std::vector<double> image_sums;
    std::size_t dropped = 1;
  };

  void fill(Power& dst, const std::vector<CsrMatrix>& ladder, const CsrMatrix& y, int p,
            const std::vector<Index>& bounds, bool reuse, const Parallelism& par);

  ImagePartition partition_;
  Power r_;
  Power s_;
  bool shared_ = false;
  // Pattern of the last y, to detect when the square can be refreshed.
  std::vector<std::size_t> y_row_ptr_;
  std::vector<Index> y_cols_;
  int last_r_ = 0;
  int last_s_ = 0;
};

EdgeStatistics combine(std::vector<double> s1, std::vector<double> s1_plus_s2,
                       std::span<const Edge> support);

/// Powers, both masked products and the ratio for `graph` on `support`.
EdgeStatistics edge_statistics(const MatchGraph& graph, std::span<const Edge> support, int r, int s,
                               const Parallelism& par = {});

/// Direct dense evaluation with an explicit within-image matrix D.
/// Throws TooLargeForOracleError when N > 200.
DenseStatistics dense_oracle(const MatchGraph& graph, int r, int s);

SparsityStats sparsity_of(const CsrMatrix& m);

}  // namespace fcc
