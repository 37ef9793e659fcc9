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

#include "coderec/sparse.h"

#include <algorithm>

namespace coderec {

template <typename T>
SparseMatrix<T> SparseMatrix<T>::from_triplets(std::size_t rows, std::size_t cols,
                                               std::vector<Triplet> triplets) {
  for (const auto& t : triplets) {
    if (t.row >= rows || t.col >= cols) {
      throw ArgumentError("triplet (" + std::to_string(t.row) + ", " + std::to_string(t.col) +
                          ") outside " + Tensor<T>::shape_string(rows, cols));
    }
  }
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  SparseMatrix m(rows, cols);
  m.col_idx_.reserve(triplets.size());
  m.values_.reserve(triplets.size());
  for (std::size_t i = 0; i < triplets.size(); ++i) {
    const auto& t = triplets[i];
    if (i > 0 && triplets[i - 1].row == t.row && triplets[i - 1].col == t.col) {
      m.values_.back() += static_cast<T>(t.value);
      continue;
    }
    m.col_idx_.push_back(t.col);
    m.values_.push_back(static_cast<T>(t.value));
    ++m.row_ptr_[t.row + 1];
  }
  for (std::size_t r = 0; r < rows; ++r) m.row_ptr_[r + 1] += m.row_ptr_[r];
  return m;
}

template <typename T>
SparseMatrix<T> SparseMatrix<T>::from_csr(std::size_t rows, std::size_t cols,
                                          std::vector<std::size_t> row_ptr,
                                          std::vector<std::uint32_t> col_idx,
                                          std::vector<T> values) {
  if (row_ptr.size() != rows + 1 || row_ptr.front() != 0 || row_ptr.back() != col_idx.size() ||
      col_idx.size() != values.size()) {
    throw ArgumentError("inconsistent CSR arrays");
  }
  for (std::size_t r = 0; r < rows; ++r) {
    if (row_ptr[r] > row_ptr[r + 1]) throw ArgumentError("CSR row pointer not monotone");
    for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
      if (col_idx[k] >= cols) throw ArgumentError("CSR column index out of range");
      if (k > row_ptr[r] && col_idx[k] <= col_idx[k - 1]) {
        throw ArgumentError("CSR column indices must be sorted and unique per row");
      }
    }
  }
  SparseMatrix m;
  m.rows_ = rows;
  m.cols_ = cols;
  m.row_ptr_ = std::move(row_ptr);
  m.col_idx_ = std::move(col_idx);
  m.values_ = std::move(values);
  return m;
}

template <typename T>
T SparseMatrix<T>::at(std::size_t r, std::size_t c) const {
  auto begin = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r]);
  auto end = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r + 1]);
  auto it = std::lower_bound(begin, end, static_cast<std::uint32_t>(c));
  if (it == end || *it != c) return T{0};
  return values_[static_cast<std::size_t>(it - col_idx_.begin())];
}

template <typename T>
SparseMatrix<T> SparseMatrix<T>::transpose() const {
  SparseMatrix t(cols_, rows_);
  t.col_idx_.resize(nnz());
  t.values_.resize(nnz());
  for (auto c : col_idx_) ++t.row_ptr_[c + 1];
  for (std::size_t r = 0; r < cols_; ++r) t.row_ptr_[r + 1] += t.row_ptr_[r];
  std::vector<std::size_t> cursor(t.row_ptr_.begin(), t.row_ptr_.end() - 1);
  // Rows are visited in increasing order, so each transposed row stays sorted.
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      auto pos = cursor[col_idx_[k]]++;
      t.col_idx_[pos] = static_cast<std::uint32_t>(r);
      t.values_[pos] = values_[k];
    }
  }
  return t;
}

template <typename T>
Tensor<T> SparseMatrix<T>::to_dense() const {
  Tensor<T> d(rows_, cols_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) d(r, col_idx_[k]) = values_[k];
  }
  return d;
}

template <typename T>
Tensor<T> SparseMatrix<T>::multiply(const Tensor<T>& x) const {
  if (x.rows() != cols_) {
    throw ArgumentError("sparse matmul shape mismatch: " + Tensor<T>::shape_string(rows_, cols_) +
                        " x " + x.shape_str());
  }
  const std::size_t d = x.cols();
  Tensor<T> out(rows_, d);
  for (std::size_t r = 0; r < rows_; ++r) {
    T* dst = out.data() + r * d;
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      const T w = values_[k];
      const T* src = x.data() + static_cast<std::size_t>(col_idx_[k]) * d;
      for (std::size_t c = 0; c < d; ++c) dst[c] += w * src[c];
    }
  }
  return out;
}

template <typename T>
Tensor<T> SparseMatrix<T>::transpose_multiply(const Tensor<T>& x) const {
  if (x.rows() != rows_) {
    throw ArgumentError("sparse transpose matmul shape mismatch: " +
                        Tensor<T>::shape_string(cols_, rows_) + " x " + x.shape_str());
  }
  const std::size_t d = x.cols();
  Tensor<T> out(cols_, d);
  for (std::size_t r = 0; r < rows_; ++r) {
    const T* src = x.data() + r * d;
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      const T w = values_[k];
      T* dst = out.data() + static_cast<std::size_t>(col_idx_[k]) * d;
      for (std::size_t c = 0; c < d; ++c) dst[c] += w * src[c];
    }
  }
  return out;
}

template class SparseMatrix<float>;
template class SparseMatrix<double>;

}  // namespace coderec
