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

#include "coderec/sparse.h"
#include "coderec/tape.h"

// Differentiable operations recorded on a Tape. All inputs of one call must
// live on the same tape. Shape mismatches throw ArgumentError naming both shapes.
namespace coderec::ad {

template <typename T> Var<T> matmul(Var<T> a, Var<T> b);
// a * b^T
template <typename T> Var<T> matmul_nt(Var<T> a, Var<T> b);
template <typename T> Var<T> transpose(Var<T> a);

// Block-diagonal product. `a` stacks `batch` blocks of m rows. Without
// transpose, `b` stacks blocks of k rows (k = a.cols) and block i of the result
// is a_i * b_i; with transpose, `b` stacks blocks of n rows and the result is
// a_i * b_i^T.
template <typename T> Var<T> batched_matmul(Var<T> a, Var<T> b, std::size_t batch, bool transpose_b);

// The matrix is held by reference and must outlive backward().
template <typename T> Var<T> spmm(const SparseMatrix<T>& m, Var<T> x);

template <typename T> Var<T> add(Var<T> a, Var<T> b);
template <typename T> Var<T> sub(Var<T> a, Var<T> b);
template <typename T> Var<T> mul(Var<T> a, Var<T> b);
template <typename T> Var<T> scale(Var<T> a, T s);
// a + bias, with bias (1 x cols) broadcast over rows.
template <typename T> Var<T> add_row(Var<T> a, Var<T> bias);
// Row r of x multiplied by w(r, 0).
template <typename T> Var<T> scale_rows(Var<T> x, Var<T> w);

template <typename T> Var<T> tanh(Var<T> a);
template <typename T> Var<T> sigmoid(Var<T> a);
template <typename T> Var<T> log_sigmoid(Var<T> a);
template <typename T> Var<T> leaky_relu(Var<T> a, T slope);
template <typename T> Var<T> elu(Var<T> a);

template <typename T> Var<T> softmax_rows(Var<T> a);
// (rows x 1) log sum exp of each row.
template <typename T> Var<T> logsumexp_rows(Var<T> a);
// Softmax of a column vector within segments [offsets[s], offsets[s+1]).
template <typename T> Var<T> segment_softmax(Var<T> x, const std::vector<std::size_t>& offsets);
// Row sums within segments; result has offsets.size()-1 rows.
template <typename T> Var<T> segment_sum(Var<T> x, const std::vector<std::size_t>& offsets);

template <typename T> Var<T> concat_cols(const std::vector<Var<T>>& parts);
template <typename T> Var<T> vstack(const std::vector<Var<T>>& parts);
template <typename T> Var<T> mean_over(const std::vector<Var<T>>& parts);
template <typename T> Var<T> gather_rows(Var<T> x, const std::vector<std::uint32_t>& index);

template <typename T> Var<T> l2_normalize_rows(Var<T> a);
// (rows x 1) dot product of matching rows.
template <typename T> Var<T> row_dot(Var<T> a, Var<T> b);
template <typename T> Var<T> sum(Var<T> a);
template <typename T> Var<T> mean(Var<T> a);
// Frobenius norm, 1x1.
template <typename T> Var<T> norm2(Var<T> a);
// sqrt of the summed squares of every element of every part.
template <typename T> Var<T> global_norm(const std::vector<Var<T>>& parts);

}  // namespace coderec::ad
