#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fcc/partition.hpp"

namespace fcc {

struct Triplet {
  Index row;
  Index col;
  double value;
};

/// Square compressed-sparse-row matrix with strictly increasing column
/// indices in every row. Explicit zeros are allowed but never produced by
/// the library kernels.
class CsrMatrix {
 public:
  CsrMatrix() : row_ptr_(1, 0) {}

  /// Takes ownership of raw CSR arrays. Throws InvalidStructureError when the
  /// arrays are inconsistent or a row is not sorted.
  CsrMatrix(Index dim, std::vector<std::size_t> row_ptr, std::vector<Index> cols,
            std::vector<double> values);

  /// Same as the checked constructor without the validation pass; for kernels
  /// whose construction already guarantees the invariants.
  static CsrMatrix from_sorted_unchecked(Index dim, std::vector<std::size_t> row_ptr,
                                         std::vector<Index> cols, std::vector<double> values);

  /// Duplicate coordinates are summed.
  static CsrMatrix from_triplets(Index dim, std::vector<Triplet> triplets);
  static CsrMatrix zeros(Index dim);

  Index dim() const { return dim_; }
  std::size_t nnz() const { return cols_.size(); }

  std::span<const Index> row_cols(Index row) const {
    const auto r = static_cast<std::size_t>(row);
    return {cols_.data() + row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]};
  }
  std::span<const double> row_values(Index row) const {
    const auto r = static_cast<std::size_t>(row);
    return {values_.data() + row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]};
  }

  std::span<const std::size_t> row_ptr() const { return row_ptr_; }
  std::span<const Index> cols() const { return cols_; }
  std::span<const double> values() const { return values_; }

  /// Entry lookup by binary search; 0 when absent.
  double at(Index row, Index col) const;

  CsrMatrix transposed() const;
  bool is_symmetric() const;

  bool operator==(const CsrMatrix& other) const = default;

 private:
  Index dim_ = 0;
  std::vector<std::size_t> row_ptr_;
  std::vector<Index> cols_;
  std::vector<double> values_;
};

}  // namespace fcc
