#include "fcc/statistics.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <string>

#if defined(__x86_64__) && defined(__GNUC__)
#include <immintrin.h>
#define FCC_HAVE_AVX512 1
#endif

#include "fcc/errors.hpp"

namespace fcc {
namespace {

using LocalCol = SlabbedMatrix::LocalCol;

// Borrowed CSR arrays of one slab or of a whole matrix. Column indices are
// relative to the slab (0 for a whole matrix).
template <class Col>
struct View {
  const std::size_t* row_ptr;
  const Col* cols;
  const double* values;
};

View<Index> view_of(const CsrMatrix& m) { return {m.row_ptr().data(), m.cols().data(), m.values().data()}; }

std::vector<View<LocalCol>> views_of(const SlabbedMatrix& m) {
  std::vector<View<LocalCol>> out;
  for (std::size_t k = 0; k < m.slab_count(); ++k) {
    const auto& slab = m.slab(k);
    out.push_back({slab.row_ptr.data(), slab.cols.data(), slab.values.data()});
  }
  return out;
}

void check_power(int p) {
  if (p < 1) throw ConfigInvalidError("matrix power must be at least 1, got " + std::to_string(p));
  if (p > kMaxPower) {
    throw PowerTooLargeError("matrix power " + std::to_string(p) + " exceeds " +
                             std::to_string(kMaxPower));
  }
}

// Runs of consecutive support edges sharing the same first endpoint.
std::vector<std::size_t> run_starts(std::span<const Edge> support) {
  std::vector<std::size_t> starts;
  for (std::size_t e = 0; e < support.size(); ++e) {
    if (e == 0 || support[e].i != support[e - 1].i) starts.push_back(e);
  }
  starts.push_back(support.size());
  return starts;
}

void check_support(std::span<const Edge> support, Index dim) {
  for (const Edge& e : support) {
    if (e.i < 0 || e.j < 0 || e.i >= dim || e.j >= dim) {
      throw IndexOutOfRangeError("support edge outside the matrix");
    }
  }
}

// sum_q dense[cols[q]] * vals[q]; each kernel has a fixed summation order.
template <class Col>
using DotKernel = double (*)(const double* dense, const Col* cols, const double* vals, std::size_t n);

template <class Col>
double gather_dot_scalar(const double* dense, const Col* cols, const double* vals, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t q = 0;
  for (; q + 4 <= n; q += 4) {
    s0 += dense[cols[q]] * vals[q];
    s1 += dense[cols[q + 1]] * vals[q + 1];
    s2 += dense[cols[q + 2]] * vals[q + 2];
    s3 += dense[cols[q + 3]] * vals[q + 3];
  }
  for (; q < n; ++q) s0 += dense[cols[q]] * vals[q];
  return (s0 + s1) + (s2 + s3);
}

#ifdef FCC_HAVE_AVX512
__attribute__((target("avx512f"))) inline __m256i load_index8(const Index* cols) {
  return _mm256_loadu_si256(reinterpret_cast<const __m256i*>(cols));
}

__attribute__((target("avx512f"))) inline __m256i load_index8(const LocalCol* cols) {
  return _mm256_cvtepu16_epi32(_mm_loadu_si128(reinterpret_cast<const __m128i*>(cols)));
}

template <class Col>
__attribute__((target("avx512f"))) double gather_dot_avx512(const double* dense, const Col* cols,
                                                             const double* vals, std::size_t n) {
  __m512d a0 = _mm512_setzero_pd();
  __m512d a1 = _mm512_setzero_pd();
  std::size_t q = 0;
  for (; q + 16 <= n; q += 16) {
    a0 = _mm512_fmadd_pd(_mm512_i32gather_pd(load_index8(cols + q), dense, 8), _mm512_loadu_pd(vals + q), a0);
    a1 = _mm512_fmadd_pd(_mm512_i32gather_pd(load_index8(cols + q + 8), dense, 8),
                         _mm512_loadu_pd(vals + q + 8), a1);
  }
  double tail = 0.0;
  for (; q < n; ++q) tail += dense[cols[q]] * vals[q];
  return _mm512_reduce_add_pd(_mm512_add_pd(a0, a1)) + tail;
}
#endif

template <class Col>
DotKernel<Col> pick_dot_kernel() {
#ifdef FCC_HAVE_AVX512
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx512f")) return gather_dot_avx512<Col>;
#endif
  return gather_dot_scalar<Col>;
}

const DotKernel<Index> gather_dot_index = pick_dot_kernel<Index>();
const DotKernel<LocalCol> gather_dot_local = pick_dot_kernel<LocalCol>();

DotKernel<Index> dot_kernel(const Index*) { return gather_dot_index; }
DotKernel<LocalCol> dot_kernel(const LocalCol*) { return gather_dot_local; }

// out[e] += <row i of r, row j of s> for every support edge, one slab pair.
// `width` is the number of columns the slab spans.
template <class Col>
void masked_dot_slab(View<Col> r, View<Col> s, std::size_t width, std::span<const Edge> support,
                     std::span<const std::size_t> starts, std::span<double> out, const Parallelism& par) {
  constexpr std::size_t kLookahead = 4;
  const DotKernel<Col> dot = dot_kernel(r.cols);
  parallel_for(starts.size() - 1, par, [&](std::size_t begin, std::size_t end) {
    std::vector<double> dense(width, 0.0);
    const std::size_t last = starts[end];
    for (std::size_t run = begin; run < end; ++run) {
      const auto i = static_cast<std::size_t>(support[starts[run]].i);
      for (std::size_t p = r.row_ptr[i]; p < r.row_ptr[i + 1]; ++p) dense[r.cols[p]] = r.values[p];
      for (std::size_t e = starts[run]; e < starts[run + 1]; ++e) {
        if (e + kLookahead < last) {
          const std::size_t ahead = s.row_ptr[support[e + kLookahead].j];
          __builtin_prefetch(s.cols + ahead);
          __builtin_prefetch(s.values + ahead);
          __builtin_prefetch(s.values + ahead + 8);
        }
        const auto j = static_cast<std::size_t>(support[e].j);
        const std::size_t b = s.row_ptr[j];
        out[e] += dot(dense.data(), s.cols + b, s.values + b, s.row_ptr[j + 1] - b);
      }
      for (std::size_t p = r.row_ptr[i]; p < r.row_ptr[i + 1]; ++p) dense[r.cols[p]] = 0.0;
    }
  });
}

// Per-row image sums of a power: sum over k in I_l of power(row, k). Stored
// as a dense N x n table when at least half of the (row, image) pairs occur,
// as (image, sum) runs per row otherwise.
struct ImageRowSums {
  std::size_t images = 0;
  std::vector<double> table;
  std::vector<std::size_t> row_ptr;
  std::vector<Index> run_images;
  std::vector<double> run_sums;

  bool dense() const { return !table.empty(); }
  const double* row(std::size_t r) const { return table.data() + r * images; }
};

template <class Col>
ImageRowSums image_row_sums(std::span<const View<Col>> slabs, std::span<const Index> bases,
                            const ImagePartition& partition) {
  const auto dim = static_cast<std::size_t>(partition.total_keypoints());
  const auto offsets = partition.offsets();
  ImageRowSums out;
  out.images = static_cast<std::size_t>(partition.image_count());
  out.row_ptr.assign(dim + 1, 0);
  for (std::size_t r = 0; r < dim; ++r) {
    Index next_start = 0;
    // Columns increase within a slab and across slabs, so each image is one
    // contiguous stretch even when it straddles a slab boundary.
    for (std::size_t k = 0; k < slabs.size(); ++k) {
      const View<Col>& v = slabs[k];
      for (std::size_t p = v.row_ptr[r]; p < v.row_ptr[r + 1]; ++p) {
        const Index c = bases[k] + static_cast<Index>(v.cols[p]);
        if (c >= next_start) {
          const Index image = partition.image_of(c);
          next_start = offsets[static_cast<std::size_t>(image) + 1];
          out.run_images.push_back(image);
          out.run_sums.push_back(v.values[p]);
        } else {
          out.run_sums.back() += v.values[p];
        }
      }
    }
    out.row_ptr[r + 1] = out.run_images.size();
  }
  if (out.images > 0 && 2 * out.run_images.size() >= dim * out.images) {
    out.table.assign(dim * out.images, 0.0);
    for (std::size_t r = 0; r < dim; ++r) {
      for (std::size_t p = out.row_ptr[r]; p < out.row_ptr[r + 1]; ++p) {
        out.table[r * out.images + static_cast<std::size_t>(out.run_images[p])] = out.run_sums[p];
      }
    }
  }
  return out;
}

double dense_dot(const double* a, const double* b, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t q = 0;
  for (; q + 4 <= n; q += 4) {
    s0 += a[q] * b[q];
    s1 += a[q + 1] * b[q + 1];
    s2 += a[q + 2] * b[q + 2];
    s3 += a[q + 3] * b[q + 3];
  }
  for (; q < n; ++q) s0 += a[q] * b[q];
  return (s0 + s1) + (s2 + s3);
}

// Image sums in either layout: a dense table, or runs when table is null.
struct SumsRef {
  std::size_t images;
  const double* table;
  View<Index> runs;
};

SumsRef ref_of(const ImageRowSums& sums) {
  return {sums.images, sums.dense() ? sums.table.data() : nullptr,
          {sums.row_ptr.data(), sums.run_images.data(), sums.run_sums.data()}};
}

SumsRef ref_of(std::span<const double> table, std::size_t images) { return {images, table.data(), {}}; }

std::vector<double> image_sum_products(const SumsRef& r, const SumsRef& s, std::span<const Edge> support,
                                       const Parallelism& par) {
  std::vector<double> out(support.size(), 0.0);
  if (support.empty()) return out;
  if (r.table != nullptr && s.table != nullptr) {
    parallel_for(support.size(), par, [&](std::size_t begin, std::size_t end) {
      for (std::size_t e = begin; e < end; ++e) {
        out[e] = dense_dot(r.table + static_cast<std::size_t>(support[e].i) * r.images,
                           s.table + static_cast<std::size_t>(support[e].j) * s.images, r.images);
      }
    });
    return out;
  }
  // Mixed layouts do not occur: both sides come from the same builder.
  masked_dot_slab(r.runs, s.runs, r.images, support, run_starts(support), out, par);
  return out;
}

void check_same_layout(const SlabbedMatrix& a, const SlabbedMatrix& b) {
  if (a.dim() != b.dim() || !std::ranges::equal(a.bounds(), b.bounds())) {
    throw InvalidStructureError("slabbed powers must share dimension and column bounds");
  }
}

// Dense accumulator for one output row of a sparse product. `acc` is zero
// outside the row being built; `bits` marks its touched columns.
class RowAccumulator {
 public:
  explicit RowAccumulator(std::size_t dim) : acc_(dim, 0.0), bits_((dim + 63) / 64, 0) {}

  void add_product_row(const CsrMatrix& a, const CsrMatrix& b, Index row) {
    const auto acols = a.row_cols(row);
    const auto avals = a.row_values(row);
    for (std::size_t p = 0; p < acols.size(); ++p) {
      const double va = avals[p];
      const auto bcols = b.row_cols(acols[p]);
      const auto bvals = b.row_values(acols[p]);
      if (bcols.empty()) continue;
      lo_ = std::min(lo_, static_cast<std::size_t>(bcols.front()) / 64);
      hi_ = std::max(hi_, static_cast<std::size_t>(bcols.back()) / 64 + 1);
      for (std::size_t q = 0; q < bcols.size(); ++q) {
        const auto col = static_cast<std::size_t>(bcols[q]);
        bits_[col >> 6] |= std::uint64_t{1} << (col & 63);
        acc_[col] += va * bvals[q];
      }
    }
  }

  // Calls emit(col, value) for the touched columns in increasing order and
  // resets the accumulator.
  template <class Emit>
  void drain(Emit&& emit) {
    for (std::size_t w = lo_; w < hi_; ++w) {
      std::uint64_t word = bits_[w];
      bits_[w] = 0;
      while (word != 0) {
        const std::size_t col = w * 64 + static_cast<std::size_t>(std::countr_zero(word));
        word &= word - 1;
        emit(static_cast<Index>(col), acc_[col]);
        acc_[col] = 0.0;
      }
    }
    lo_ = bits_.size();
    hi_ = 0;
  }

 private:
  std::vector<double> acc_;
  std::vector<std::uint64_t> bits_;
  std::size_t lo_ = bits_.size();
  std::size_t hi_ = 0;
};

// row[image] += the entries of local row `r` of `slabs`, columns increasing.
void add_image_sums(std::span<const SlabbedMatrix::Slab> slabs, std::span<const Index> bounds,
                    std::size_t r, const ImagePartition& partition, double* row) {
  const auto offsets = partition.offsets();
  Index next_start = 0;
  Index image = -1;
  for (std::size_t k = 0; k < slabs.size(); ++k) {
    const auto& slab = slabs[k];
    for (std::size_t p = slab.row_ptr[r]; p < slab.row_ptr[r + 1]; ++p) {
      const Index c = bounds[k] + static_cast<Index>(slab.cols[p]);
      if (c >= next_start) {
        image = partition.image_of(c);
        next_start = offsets[static_cast<std::size_t>(image) + 1];
      }
      row[image] += slab.values[p];
    }
  }
}

// Optional dense N x n image-sum table filled alongside a product.
struct SumsSink {
  const ImagePartition* partition = nullptr;
  double* table = nullptr;

  void add(std::span<const SlabbedMatrix::Slab> slabs, std::span<const Index> bounds, std::size_t local_row,
           std::size_t row) const {
    if (table == nullptr) return;
    add_image_sums(slabs, bounds, local_row, *partition,
                   table + row * static_cast<std::size_t>(partition->image_count()));
  }
};

struct RowRange {
  std::size_t begin;
  std::size_t end;
};

// Contiguous row ranges, one per chunk; empty ranges are possible.
std::vector<RowRange> row_chunks(std::size_t rows, const Parallelism& par) {
  const std::size_t chunks = std::clamp<std::size_t>(par.workers, 1, std::max<std::size_t>(rows, 1));
  const std::size_t step = rows == 0 ? 0 : (rows + chunks - 1) / chunks;
  std::vector<RowRange> out(chunks);
  for (std::size_t c = 0; c < chunks; ++c) {
    out[c].begin = std::min(rows, c * step);
    out[c].end = std::min(rows, out[c].begin + step);
  }
  return out;
}

void for_each_chunk(std::span<const RowRange> chunks, const std::function<void(std::size_t)>& body) {
  parallel_for(chunks.size(), {static_cast<unsigned>(chunks.size())}, [&](std::size_t c0, std::size_t c1) {
    for (std::size_t c = c0; c < c1; ++c) body(c);
  });
}

}  // namespace

SlabbedMatrix::SlabbedMatrix(Index dim, std::vector<Index> bounds) : dim_(dim), bounds_(std::move(bounds)) {
  if (bounds_.size() < 2 || bounds_.front() != 0 || bounds_.back() != dim_) {
    throw InvalidStructureError("slab bounds must start at 0 and end at the dimension");
  }
  for (std::size_t k = 1; k < bounds_.size(); ++k) {
    const Index width = bounds_[k] - bounds_[k - 1];
    if ((width <= 0 && dim_ > 0) || width > kMaxWidth) {
      throw InvalidStructureError("slab widths must lie in [1, 65536]");
    }
  }
  slabs_.assign(bounds_.size() - 1, Slab{});
  for (auto& slab : slabs_) slab.row_ptr.assign(static_cast<std::size_t>(dim_) + 1, 0);
}

std::vector<Index> SlabbedMatrix::even_bounds(Index dim, std::size_t slabs) {
  const auto n = static_cast<std::size_t>(dim);
  const std::size_t min_slabs = (n + static_cast<std::size_t>(kMaxWidth) - 1) / static_cast<std::size_t>(kMaxWidth);
  slabs = std::clamp<std::size_t>(std::max(slabs, min_slabs), 1, std::max<std::size_t>(n, 1));
  std::vector<Index> bounds(slabs + 1);
  for (std::size_t k = 0; k <= slabs; ++k) bounds[k] = static_cast<Index>(n * k / slabs);
  return bounds;
}

SlabbedMatrix SlabbedMatrix::split(const CsrMatrix& m, std::vector<Index> bounds) {
  SlabbedMatrix out(m.dim(), std::move(bounds));
  for (Index r = 0; r < m.dim(); ++r) {
    const auto cols = m.row_cols(r);
    const auto vals = m.row_values(r);
    std::size_t k = 0;
    for (std::size_t p = 0; p < cols.size(); ++p) {
      while (cols[p] >= out.bounds_[k + 1]) ++k;
      out.slabs_[k].cols.push_back(static_cast<LocalCol>(cols[p] - out.bounds_[k]));
      out.slabs_[k].values.push_back(vals[p]);
    }
    for (auto& slab : out.slabs_) slab.row_ptr[static_cast<std::size_t>(r) + 1] = slab.cols.size();
  }
  return out;
}

std::size_t SlabbedMatrix::nnz() const {
  std::size_t total = 0;
  for (const auto& slab : slabs_) total += slab.cols.size();
  return total;
}

CsrMatrix SlabbedMatrix::merged() const {
  const auto n = static_cast<std::size_t>(dim_);
  std::vector<std::size_t> row_ptr(n + 1, 0);
  std::vector<Index> cols;
  std::vector<double> values;
  cols.reserve(nnz());
  values.reserve(nnz());
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t k = 0; k < slabs_.size(); ++k) {
      const Slab& slab = slabs_[k];
      for (std::size_t p = slab.row_ptr[r]; p < slab.row_ptr[r + 1]; ++p) {
        cols.push_back(bounds_[k] + static_cast<Index>(slab.cols[p]));
        values.push_back(slab.values[p]);
      }
    }
    row_ptr[r + 1] = cols.size();
  }
  return CsrMatrix::from_sorted_unchecked(dim_, std::move(row_ptr), std::move(cols), std::move(values));
}

std::size_t product_nnz_bound(const CsrMatrix& a, const CsrMatrix& b) {
  if (a.dim() != b.dim()) throw InvalidStructureError("dimension mismatch in product_nnz_bound");
  const auto cap = static_cast<std::size_t>(a.dim());
  std::size_t bound = 0;
  for (Index r = 0; r < a.dim(); ++r) {
    std::size_t walks = 0;
    for (const Index k : a.row_cols(r)) walks += b.row_cols(k).size();
    bound += std::min(walks, cap);
  }
  return bound;
}

CsrMatrix multiply(const CsrMatrix& a, const CsrMatrix& b, const Parallelism& par) {
  if (a.dim() != b.dim()) throw InvalidStructureError("dimension mismatch in multiply");
  const auto rows = static_cast<std::size_t>(a.dim());
  const auto chunks = row_chunks(rows, par);
  struct Block {
    std::vector<std::size_t> lengths;
    std::vector<Index> cols;
    std::vector<double> values;
  };
  std::vector<Block> blocks(chunks.size());

  for_each_chunk(chunks, [&](std::size_t c) {
    Block& block = blocks[c];
    RowAccumulator acc(rows);
    std::size_t bound = 0;
    for (std::size_t r = chunks[c].begin; r < chunks[c].end; ++r) {
      std::size_t walks = 0;
      for (const Index k : a.row_cols(static_cast<Index>(r))) walks += b.row_cols(k).size();
      bound += std::min(walks, rows);
    }
    // Capacity beyond what is written is never paged in.
    block.cols.reserve(bound);
    block.values.reserve(bound);
    for (std::size_t r = chunks[c].begin; r < chunks[c].end; ++r) {
      acc.add_product_row(a, b, static_cast<Index>(r));
      const std::size_t before = block.cols.size();
      acc.drain([&](Index col, double v) {
        if (v == 0.0) return;
        block.cols.push_back(col);
        block.values.push_back(v);
      });
      block.lengths.push_back(block.cols.size() - before);
    }
  });

  std::vector<std::size_t> row_ptr(rows + 1, 0);
  std::size_t r = 0;
  for (const auto& block : blocks) {
    for (const auto len : block.lengths) {
      row_ptr[r + 1] = row_ptr[r] + len;
      ++r;
    }
  }
  std::vector<Index> cols = std::move(blocks[0].cols);
  std::vector<double> values = std::move(blocks[0].values);
  for (std::size_t c = 1; c < blocks.size(); ++c) {
    cols.insert(cols.end(), blocks[c].cols.begin(), blocks[c].cols.end());
    values.insert(values.end(), blocks[c].values.begin(), blocks[c].values.end());
    blocks[c] = Block{};
  }
  return CsrMatrix::from_sorted_unchecked(a.dim(), std::move(row_ptr), std::move(cols), std::move(values));
}

namespace {

std::size_t multiply_into_impl(const CsrMatrix& a, const CsrMatrix& b, SlabbedMatrix& out,
                               const Parallelism& par, const SumsSink& sink) {
  if (a.dim() != b.dim() || a.dim() != out.dim()) {
    throw InvalidStructureError("dimension mismatch in multiply");
  }
  const auto rows = static_cast<std::size_t>(a.dim());
  const auto bounds = out.bounds();
  const std::size_t slabs = out.slab_count();
  const auto chunks = row_chunks(rows, par);

  // Entries of b per (row, slab), for per-slab capacity bounds.
  std::vector<std::size_t> b_counts(rows * slabs, 0);
  for (std::size_t k = 0; k < rows; ++k) {
    std::size_t slab = 0;
    for (const Index c : b.row_cols(static_cast<Index>(k))) {
      while (c >= bounds[slab + 1]) ++slab;
      ++b_counts[k * slabs + slab];
    }
  }

  // Chunk 0 writes straight into out's slabs, reusing their storage; the
  // other chunks are appended afterwards.
  std::vector<std::vector<SlabbedMatrix::Slab>> parts(chunks.size());
  parts[0].resize(slabs);
  for (std::size_t k = 0; k < slabs; ++k) parts[0][k] = std::move(out.slab(k));
  std::vector<std::size_t> dropped(chunks.size(), 0);

  for_each_chunk(chunks, [&](std::size_t c) {
    auto& part = parts[c];
    part.resize(slabs);
    const auto [begin, end] = chunks[c];
    std::vector<std::size_t> bound(slabs, 0);
    for (std::size_t r = begin; r < end; ++r) {
      for (std::size_t k = 0; k < slabs; ++k) {
        std::size_t walks = 0;
        for (const Index m : a.row_cols(static_cast<Index>(r))) {
          walks += b_counts[static_cast<std::size_t>(m) * slabs + k];
        }
        bound[k] += std::min(walks, static_cast<std::size_t>(bounds[k + 1] - bounds[k]));
      }
    }
    for (std::size_t k = 0; k < slabs; ++k) {
      part[k].row_ptr.assign(end - begin + 1, 0);
      part[k].cols.clear();
      part[k].values.clear();
      part[k].cols.reserve(bound[k]);
      part[k].values.reserve(bound[k]);
    }
    RowAccumulator acc(rows);
    for (std::size_t r = begin; r < end; ++r) {
      acc.add_product_row(a, b, static_cast<Index>(r));
      std::size_t slab = 0;
      SlabbedMatrix::Slab* dst = part.data();
      Index base = 0;
      Index next_bound = bounds[1];
      acc.drain([&](Index col, double v) {
        if (v == 0.0) {
          ++dropped[c];
          return;
        }
        while (col >= next_bound) {
          dst = &part[++slab];
          base = next_bound;
          next_bound = bounds[slab + 1];
        }
        dst->cols.push_back(static_cast<LocalCol>(col - base));
        dst->values.push_back(v);
      });
      for (auto& s : part) s.row_ptr[r - begin + 1] = s.cols.size();
      sink.add(part, bounds, r - begin, r);
    }
  });

  for (std::size_t k = 0; k < slabs; ++k) {
    auto& dst = parts[0][k];
    std::size_t row = chunks[0].end;
    dst.row_ptr.resize(rows + 1, 0);
    for (std::size_t c = 1; c < chunks.size(); ++c) {
      const auto& src = parts[c][k];
      const std::size_t base = dst.cols.size();
      for (std::size_t r = 1; r < src.row_ptr.size(); ++r) dst.row_ptr[++row] = base + src.row_ptr[r];
      dst.cols.insert(dst.cols.end(), src.cols.begin(), src.cols.end());
      dst.values.insert(dst.values.end(), src.values.begin(), src.values.end());
    }
    out.slab(k) = std::move(dst);
  }
  std::size_t total = 0;
  for (const auto d : dropped) total += d;
  return total;
}

bool multiply_values_into_impl(const CsrMatrix& a, const CsrMatrix& b, SlabbedMatrix& out,
                               const Parallelism& par, const SumsSink& sink) {
  if (a.dim() != b.dim() || a.dim() != out.dim()) {
    throw InvalidStructureError("dimension mismatch in multiply");
  }
  const auto rows = static_cast<std::size_t>(a.dim());
  const auto bounds = out.bounds();
  const auto chunks = row_chunks(rows, par);
  std::vector<char> ok(chunks.size(), 1);
  for_each_chunk(chunks, [&](std::size_t c) {
    std::vector<double> acc(rows, 0.0);
    for (std::size_t r = chunks[c].begin; r < chunks[c].end; ++r) {
      const auto acols = a.row_cols(static_cast<Index>(r));
      const auto avals = a.row_values(static_cast<Index>(r));
      for (std::size_t p = 0; p < acols.size(); ++p) {
        const double va = avals[p];
        const auto bcols = b.row_cols(acols[p]);
        const auto bvals = b.row_values(acols[p]);
        for (std::size_t q = 0; q < bcols.size(); ++q) acc[static_cast<std::size_t>(bcols[q])] += va * bvals[q];
      }
      for (std::size_t k = 0; k < out.slab_count(); ++k) {
        auto& slab = out.slab(k);
        double* row_acc = acc.data() + bounds[k];
        for (std::size_t p = slab.row_ptr[r]; p < slab.row_ptr[r + 1]; ++p) {
          const double v = row_acc[slab.cols[p]];
          row_acc[slab.cols[p]] = 0.0;
          slab.values[p] = v;
          if (v == 0.0) ok[c] = 0;
        }
      }
      sink.add(out.slabs(), bounds, r, r);
    }
  });
  return std::all_of(ok.begin(), ok.end(), [](char v) { return v != 0; });
}

}  // namespace

std::size_t multiply_into(const CsrMatrix& a, const CsrMatrix& b, SlabbedMatrix& out,
                          const Parallelism& par) {
  return multiply_into_impl(a, b, out, par, {});
}

bool multiply_values_into(const CsrMatrix& a, const CsrMatrix& b, SlabbedMatrix& out,
                          const Parallelism& par) {
  return multiply_values_into_impl(a, b, out, par, {});
}

std::vector<CsrMatrix> power_ladder(const CsrMatrix& a, int max_power, const Parallelism& par) {
  check_power(max_power);
  std::vector<CsrMatrix> powers;
  powers.reserve(static_cast<std::size_t>(max_power));
  powers.push_back(a);
  if (max_power >= 2) powers.push_back(multiply(a, a, par));
  if (max_power >= 3) powers.push_back(multiply(powers[1], a, par));
  if (max_power >= 4) powers.push_back(multiply(powers[1], powers[1], par));
  return powers;
}

CsrMatrix sparse_power(const CsrMatrix& a, int p, const Parallelism& par) {
  check_power(p);
  return std::move(power_ladder(a, p, par).back());
}

CsrMatrix sparse_power(const MatchGraph& g, int p, const Parallelism& par) {
  return sparse_power(g.adjacency(), p, par);
}

std::vector<double> masked_s1(const CsrMatrix& power_r, const CsrMatrix& power_s,
                              std::span<const Edge> support, const Parallelism& par) {
  if (power_r.dim() != power_s.dim()) throw InvalidStructureError("dimension mismatch in masked_s1");
  check_support(support, power_r.dim());
  std::vector<double> out(support.size(), 0.0);
  if (support.empty()) return out;
  masked_dot_slab(view_of(power_r), view_of(power_s), static_cast<std::size_t>(power_r.dim()), support,
                  run_starts(support), out, par);
  return out;
}

std::vector<double> masked_s1(const SlabbedMatrix& power_r, const SlabbedMatrix& power_s,
                              std::span<const Edge> support, const Parallelism& par) {
  check_same_layout(power_r, power_s);
  check_support(support, power_r.dim());
  std::vector<double> out(support.size(), 0.0);
  if (support.empty()) return out;
  const auto starts = run_starts(support);
  const auto vr = views_of(power_r);
  const auto vs = views_of(power_s);
  const auto bounds = power_r.bounds();
  for (std::size_t k = 0; k < vr.size(); ++k) {
    masked_dot_slab(vr[k], vs[k], static_cast<std::size_t>(bounds[k + 1] - bounds[k]), support, starts, out,
                    par);
  }
  return out;
}

std::vector<double> masked_s1_plus_s2(const CsrMatrix& power_r, const CsrMatrix& power_s,
                                      std::span<const Edge> support, const ImagePartition& partition,
                                      const Parallelism& par) {
  if (power_r.dim() != power_s.dim() || power_r.dim() != partition.total_keypoints()) {
    throw InvalidStructureError("dimension mismatch in masked_s1_plus_s2");
  }
  check_support(support, power_r.dim());
  const Index base[] = {0};
  const View<Index> vr[] = {view_of(power_r)};
  const View<Index> vs[] = {view_of(power_s)};
  const ImageRowSums sums_r = image_row_sums<Index>(vr, base, partition);
  if (&power_r == &power_s) return image_sum_products(ref_of(sums_r), ref_of(sums_r), support, par);
  const ImageRowSums sums_s = image_row_sums<Index>(vs, base, partition);
  return image_sum_products(ref_of(sums_r), ref_of(sums_s), support, par);
}

std::vector<double> masked_s1_plus_s2(const SlabbedMatrix& power_r, const SlabbedMatrix& power_s,
                                      std::span<const Edge> support, const ImagePartition& partition,
                                      const Parallelism& par) {
  check_same_layout(power_r, power_s);
  if (power_r.dim() != partition.total_keypoints()) {
    throw InvalidStructureError("dimension mismatch in masked_s1_plus_s2");
  }
  check_support(support, power_r.dim());
  const auto bounds = power_r.bounds();
  const ImageRowSums sums_r = image_row_sums<LocalCol>(views_of(power_r), bounds, partition);
  if (&power_r == &power_s) return image_sum_products(ref_of(sums_r), ref_of(sums_r), support, par);
  const ImageRowSums sums_s = image_row_sums<LocalCol>(views_of(power_s), bounds, partition);
  return image_sum_products(ref_of(sums_r), ref_of(sums_s), support, par);
}

void PowerWorkspace::fill(Power& dst, const std::vector<CsrMatrix>& ladder, const CsrMatrix& y, int p,
                          const std::vector<Index>& bounds, bool reuse, const Parallelism& par) {
  dst.image_sums.clear();
  if (p == 1) {
    dst.matrix = SlabbedMatrix::split(y, bounds);
    dst.dropped = 0;
    return;
  }
  const bool same_bounds = dst.matrix.dim() == y.dim() && std::ranges::equal(dst.matrix.bounds(), bounds);
  if (!same_bounds) dst.matrix = SlabbedMatrix(y.dim(), bounds);

  // The dense image-sum table is kept only while it is small next to the power.
  const auto rows = static_cast<std::size_t>(y.dim());
  const auto images = static_cast<std::size_t>(partition_.image_count());
  SumsSink sink;
  if (rows * images <= 4 * product_nnz_bound(ladder[static_cast<std::size_t>(p) - 2], y)) {
    dst.image_sums.assign(rows * images, 0.0);
    sink = {&partition_, dst.image_sums.data()};
  }
  // Only the square reuses its pattern: its factors are y itself.
  if (p == 2 && reuse && same_bounds && dst.dropped == 0 && multiply_values_into_impl(y, y, dst.matrix, par, sink)) {
    return;
  }
  if (sink.table != nullptr) std::fill(dst.image_sums.begin(), dst.image_sums.end(), 0.0);
  dst.dropped = multiply_into_impl(ladder[static_cast<std::size_t>(p) - 2], y, dst.matrix, par, sink);
}

void PowerWorkspace::compute(const CsrMatrix& y, const ImagePartition& partition, int r, int s,
                             const Parallelism& par) {
  check_power(r);
  check_power(s);
  if (partition.total_keypoints() != y.dim()) {
    throw InvalidStructureError("partition does not match the matrix dimension");
  }
  if (!(partition == partition_)) partition_ = partition;
  const int top = std::max(r, s);
  // Left factors y^(p-1) for the largest power; the last step lands in slabs.
  std::vector<CsrMatrix> ladder;
  if (top >= 3) {
    ladder = power_ladder(y, top - 1, par);
  } else {
    ladder.push_back(y);
  }
  const std::size_t estimate = top == 1 ? y.nnz() : product_nnz_bound(ladder.back(), y);
  const std::size_t bytes = estimate * (sizeof(LocalCol) + sizeof(double));
  const std::size_t slabs = (bytes + kSlabBytes - 1) / kSlabBytes;
  const auto bounds = SlabbedMatrix::even_bounds(y.dim(), slabs);

  const bool same_pattern = r == last_r_ && s == last_s_ && std::ranges::equal(y.row_ptr(), y_row_ptr_) &&
                            std::ranges::equal(y.cols(), y_cols_);
  fill(r_, ladder, y, r, bounds, same_pattern, par);
  shared_ = r == s;
  if (!shared_) fill(s_, ladder, y, s, bounds, same_pattern, par);
  if (!same_pattern) {
    y_row_ptr_.assign(y.row_ptr().begin(), y.row_ptr().end());
    y_cols_.assign(y.cols().begin(), y.cols().end());
    last_r_ = r;
    last_s_ = s;
  }
}

std::vector<double> PowerWorkspace::s1(std::span<const Edge> support, const Parallelism& par) const {
  return masked_s1(power_r(), power_s(), support, par);
}

std::vector<double> PowerWorkspace::s1_plus_s2(std::span<const Edge> support, const Parallelism& par) const {
  const Power& ps = shared_ ? r_ : s_;
  if (r_.image_sums.empty() || ps.image_sums.empty()) {
    return masked_s1_plus_s2(power_r(), power_s(), support, partition_, par);
  }
  check_support(support, power_r().dim());
  const auto images = static_cast<std::size_t>(partition_.image_count());
  return image_sum_products(ref_of(r_.image_sums, images), ref_of(ps.image_sums, images), support, par);
}

EdgeStatistics combine(std::vector<double> s1, std::vector<double> s1_plus_s2,
                       std::span<const Edge> support) {
  if (s1.size() != support.size() || s1_plus_s2.size() != support.size()) {
    throw InvalidStructureError("statistic lengths differ from the support");
  }
  EdgeStatistics out;
  out.edges.assign(support.begin(), support.end());
  out.s.resize(support.size());
  for (std::size_t e = 0; e < support.size(); ++e) {
    // 0/0 means no supporting walks at all; score it like a refuted edge.
    out.s[e] = s1_plus_s2[e] > 0.0 ? std::clamp(s1[e] / s1_plus_s2[e], 0.0, 1.0) : 0.0;
  }
  out.s1 = std::move(s1);
  out.s1_plus_s2 = std::move(s1_plus_s2);
  return out;
}

EdgeStatistics edge_statistics(const MatchGraph& graph, std::span<const Edge> support, int r, int s,
                               const Parallelism& par) {
  PowerWorkspace ws;
  ws.compute(graph.adjacency(), graph.partition(), r, s, par);
  return combine(ws.s1(support, par), ws.s1_plus_s2(support, par), support);
}

namespace {

using Dense = std::vector<double>;

Dense dense_product(const Dense& a, const Dense& b, std::size_t n) {
  Dense c(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      const double aik = a[i * n + k];
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) c[i * n + j] += aik * b[k * n + j];
    }
  }
  return c;
}

Dense dense_power(const Dense& x, int p, std::size_t n) {
  Dense out = x;
  for (int t = 1; t < p; ++t) out = dense_product(out, x, n);
  return out;
}

}  // namespace

DenseStatistics dense_oracle(const MatchGraph& graph, int r, int s) {
  constexpr Index kOracleLimit = 200;
  const Index dim = graph.keypoint_count();
  if (dim > kOracleLimit) {
    throw TooLargeForOracleError("dense oracle limited to N <= 200, got " + std::to_string(dim));
  }
  check_power(r);
  check_power(s);
  const auto n = static_cast<std::size_t>(dim);
  Dense x(n * n, 0.0);
  for (Index i = 0; i < dim; ++i) {
    const auto cols = graph.adjacency().row_cols(i);
    const auto vals = graph.adjacency().row_values(i);
    for (std::size_t p = 0; p < cols.size(); ++p) x[static_cast<std::size_t>(i) * n + cols[p]] = vals[p];
  }
  Dense d(n * n, 0.0);
  const ImagePartition& part = graph.partition();
  for (Index i = 0; i < dim; ++i) {
    for (Index j = 0; j < dim; ++j) {
      if (i != j && part.image_of(i) == part.image_of(j)) d[static_cast<std::size_t>(i) * n + j] = 1.0;
    }
  }
  const Dense xr = dense_power(x, r, n);
  const Dense xs = dense_power(x, s, n);
  DenseStatistics out;
  out.dim = dim;
  out.s1 = dense_product(xr, xs, n);
  out.s2 = dense_product(dense_product(xr, d, n), xs, n);
  return out;
}

SparsityStats sparsity_of(const CsrMatrix& m) {
  SparsityStats out;
  out.nnz = m.nnz();
  out.avg_nnz_per_column = m.dim() > 0 ? static_cast<double>(m.nnz()) / m.dim() : 0.0;
  return out;
}

}  // namespace fcc
