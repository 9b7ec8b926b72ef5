#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "robustbid/errors.hpp"

namespace robustbid {

// Sparse row vector: (index, value) pairs with strictly increasing indices
// and no explicit zeros. Construction validates; everything downstream can
// then assume the invariant.
struct SparseVector {
  int dim = 0;
  std::vector<std::pair<int, double>> entries;

  SparseVector() = default;
  SparseVector(int dim_, std::vector<std::pair<int, double>> e)
      : dim(dim_), entries(std::move(e)) {
    validate();
  }

  void validate() const {
    int prev = -1;
    for (const auto& [idx, val] : entries) {
      if (idx <= prev)
        throw ParseError("sparse vector: indices not strictly increasing at " +
                         std::to_string(idx));
      if (idx < 0 || idx >= dim)
        throw ParseError("sparse vector: index " + std::to_string(idx) +
                         " out of range [0," + std::to_string(dim) + ")");
      if (val == 0.0)
        throw ParseError("sparse vector: explicit zero at index " + std::to_string(idx));
      prev = idx;
    }
  }

  double dot(const SparseVector& other) const {
    double acc = 0.0;
    std::size_t i = 0, j = 0;
    while (i < entries.size() && j < other.entries.size()) {
      if (entries[i].first < other.entries[j].first) {
        ++i;
      } else if (entries[i].first > other.entries[j].first) {
        ++j;
      } else {
        acc += entries[i].second * other.entries[j].second;
        ++i;
        ++j;
      }
    }
    return acc;
  }
};

// Compressed sparse rows over doubles. Same per-row invariants as
// SparseVector. Row count is fixed at construction.
class CsrMatrix {
 public:
  CsrMatrix() : rows_(0), cols_(0), row_ptr_{0} {}
  CsrMatrix(int rows, int cols) : rows_(rows), cols_(cols), row_ptr_(rows + 1, 0) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t nnz() const { return col_.size(); }

  // Rows must be appended in order; entries within a row in strictly
  // increasing column order, zeros omitted.
  void append_row(const std::vector<std::pair<int, double>>& entries);

  struct RowView {
    const int* col;
    const double* val;
    std::size_t len;
  };
  RowView row(int i) const {
    const std::size_t b = row_ptr_[i], e = row_ptr_[i + 1];
    return {col_.data() + b, val_.data() + b, e - b};
  }

  double dot_row(int i, const double* dense) const {
    const RowView r = row(i);
    double acc = 0.0;
    for (std::size_t k = 0; k < r.len; ++k) acc += r.val[k] * dense[r.col[k]];
    return acc;
  }

  const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
  const std::vector<int>& col_index() const { return col_; }
  const std::vector<double>& values() const { return val_; }

 private:
  int rows_, cols_;
  int next_row_ = 0;
  std::vector<std::size_t> row_ptr_;
  std::vector<int> col_;
  std::vector<double> val_;
};

inline void CsrMatrix::append_row(const std::vector<std::pair<int, double>>& entries) {
  if (next_row_ >= rows_) throw ParseError("csr matrix: too many rows");
  // Validate before touching storage so a rejected row leaves the matrix
  // unchanged.
  int prev = -1;
  for (const auto& [c, v] : entries) {
    if (c <= prev) throw ParseError("csr matrix: columns not strictly increasing");
    if (c < 0 || c >= cols_)
      throw ParseError("csr matrix: column " + std::to_string(c) + " out of range");
    if (v == 0.0) throw ParseError("csr matrix: explicit zero entry");
    prev = c;
  }
  for (const auto& [c, v] : entries) {
    col_.push_back(c);
    val_.push_back(v);
  }
  ++next_row_;
  row_ptr_[next_row_] = col_.size();
}

}  // namespace robustbid
