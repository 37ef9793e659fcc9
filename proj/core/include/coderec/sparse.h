// Copyright 2026 The coderec Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <vector>

#include "coderec/tensor.h"

namespace coderec {

struct Triplet {
  std::uint32_t row;
  std::uint32_t col;
  double value;
};

// Compressed-row sparse matrix. Column indices are sorted and unique per row.
template <typename T>
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), row_ptr_(rows + 1, 0) {}

  // Duplicate (row, col) entries are summed.
  static SparseMatrix from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets);
  static SparseMatrix from_csr(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_ptr,
                               std::vector<std::uint32_t> col_idx, std::vector<T> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return col_idx_.size(); }

  const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
  const std::vector<std::uint32_t>& col_idx() const { return col_idx_; }
  const std::vector<T>& values() const { return values_; }

  std::size_t row_nnz(std::size_t r) const { return row_ptr_[r + 1] - row_ptr_[r]; }
  // Value at (r, c) or zero; binary search within the row.
  T at(std::size_t r, std::size_t c) const;

  SparseMatrix transpose() const;
  Tensor<T> to_dense() const;

  // this * x
  Tensor<T> multiply(const Tensor<T>& x) const;
  // this^T * x, without materialising the transpose.
  Tensor<T> transpose_multiply(const Tensor<T>& x) const;

  template <typename U>
  SparseMatrix<U> cast() const {
    std::vector<U> v(values_.begin(), values_.end());
    return SparseMatrix<U>::from_csr(rows_, cols_, row_ptr_, col_idx_, std::move(v));
  }

  bool operator==(const SparseMatrix& o) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::uint32_t> col_idx_;
  std::vector<T> values_;
};

}  // namespace coderec
