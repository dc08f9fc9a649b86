#include "fcc/sparse_matrix.hpp"

#include <algorithm>
#include <string>

#include "fcc/errors.hpp"

namespace fcc {

CsrMatrix::CsrMatrix(Index dim, std::vector<std::size_t> row_ptr, std::vector<Index> cols,
                     std::vector<double> values)
    : dim_(dim), row_ptr_(std::move(row_ptr)), cols_(std::move(cols)), values_(std::move(values)) {
  if (dim_ < 0) throw InvalidStructureError("negative dimension");
  if (row_ptr_.size() != static_cast<std::size_t>(dim_) + 1 || row_ptr_.front() != 0 ||
      row_ptr_.back() != cols_.size() || cols_.size() != values_.size()) {
    throw InvalidStructureError("inconsistent CSR array lengths");
  }
  for (Index r = 0; r < dim_; ++r) {
    const auto begin = row_ptr_[static_cast<std::size_t>(r)];
    const auto end = row_ptr_[static_cast<std::size_t>(r) + 1];
    if (end < begin) throw InvalidStructureError("row pointers decrease at row " + std::to_string(r));
    for (auto p = begin; p < end; ++p) {
      if (cols_[p] < 0 || cols_[p] >= dim_) {
        throw InvalidStructureError("column out of range in row " + std::to_string(r));
      }
      if (p > begin && cols_[p] <= cols_[p - 1]) {
        throw InvalidStructureError("row " + std::to_string(r) + " is not strictly sorted");
      }
    }
  }
}

CsrMatrix CsrMatrix::from_sorted_unchecked(Index dim, std::vector<std::size_t> row_ptr,
                                           std::vector<Index> cols, std::vector<double> values) {
  CsrMatrix m;
  m.dim_ = dim;
  m.row_ptr_ = std::move(row_ptr);
  m.cols_ = std::move(cols);
  m.values_ = std::move(values);
  return m;
}

CsrMatrix CsrMatrix::zeros(Index dim) {
  return CsrMatrix(dim, std::vector<std::size_t>(static_cast<std::size_t>(dim) + 1, 0), {}, {});
}

CsrMatrix CsrMatrix::from_triplets(Index dim, std::vector<Triplet> triplets) {
  for (const auto& t : triplets) {
    if (t.row < 0 || t.row >= dim || t.col < 0 || t.col >= dim) {
      throw IndexOutOfRangeError("triplet coordinate out of range");
    }
  }
  std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  std::vector<std::size_t> row_ptr(static_cast<std::size_t>(dim) + 1, 0);
  std::vector<Index> cols;
  std::vector<double> values;
  cols.reserve(triplets.size());
  values.reserve(triplets.size());
  for (std::size_t p = 0; p < triplets.size(); ++p) {
    const auto& t = triplets[p];
    if (!cols.empty() && p > 0 && triplets[p - 1].row == t.row && triplets[p - 1].col == t.col) {
      values.back() += t.value;
      continue;
    }
    cols.push_back(t.col);
    values.push_back(t.value);
    ++row_ptr[static_cast<std::size_t>(t.row) + 1];
  }
  for (std::size_t r = 0; r < static_cast<std::size_t>(dim); ++r) row_ptr[r + 1] += row_ptr[r];
  return CsrMatrix(dim, std::move(row_ptr), std::move(cols), std::move(values));
}

double CsrMatrix::at(Index row, Index col) const {
  const auto c = row_cols(row);
  const auto it = std::lower_bound(c.begin(), c.end(), col);
  if (it == c.end() || *it != col) return 0.0;
  return row_values(row)[static_cast<std::size_t>(it - c.begin())];
}

// Counting-sort transpose; output rows come out sorted because input rows
// are visited in increasing order.
CsrMatrix CsrMatrix::transposed() const {
  const auto n = static_cast<std::size_t>(dim_);
  std::vector<std::size_t> row_ptr(n + 1, 0);
  for (const Index c : cols_) ++row_ptr[static_cast<std::size_t>(c) + 1];
  for (std::size_t r = 0; r < n; ++r) row_ptr[r + 1] += row_ptr[r];
  std::vector<std::size_t> cursor(row_ptr.begin(), row_ptr.end() - 1);
  std::vector<Index> cols(cols_.size());
  std::vector<double> values(values_.size());
  for (std::size_t r = 0; r < n; ++r) {
    for (auto p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
      const auto dst = cursor[static_cast<std::size_t>(cols_[p])]++;
      cols[dst] = static_cast<Index>(r);
      values[dst] = values_[p];
    }
  }
  return from_sorted_unchecked(dim_, std::move(row_ptr), std::move(cols), std::move(values));
}

bool CsrMatrix::is_symmetric() const { return transposed() == *this; }

}  // namespace fcc
