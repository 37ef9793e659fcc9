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

#include "coderec/behavior.h"

#include <cmath>

#include "coderec/ops.h"

namespace coderec {

template <typename T>
SparseMatrix<T> normalize_adjacency(const SparseMatrix<float>& m) {
  const std::size_t nr = m.rows();
  const std::size_t n = nr + m.cols();
  std::vector<double> deg(n, 0.0);
  for (std::size_t r = 0; r < nr; ++r) {
    for (std::size_t k = m.row_ptr()[r]; k < m.row_ptr()[r + 1]; ++k) {
      if (m.values()[k] == 0.0f) continue;
      deg[r] += 1.0;
      deg[nr + m.col_idx()[k]] += 1.0;
    }
  }
  std::vector<Triplet> trips;
  trips.reserve(2 * m.nnz());
  for (std::size_t r = 0; r < nr; ++r) {
    for (std::size_t k = m.row_ptr()[r]; k < m.row_ptr()[r + 1]; ++k) {
      if (m.values()[k] == 0.0f) continue;
      const std::size_t c = nr + m.col_idx()[k];
      const double w = 1.0 / std::sqrt(deg[r] * deg[c]);
      trips.push_back({static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(c), w});
      trips.push_back({static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(r), w});
    }
  }
  return SparseMatrix<T>::from_triplets(n, n, std::move(trips));
}

template <typename T>
std::vector<Tensor<T>> propagate(const Tensor<T>& e0, const SparseMatrix<T>& adj, int layers) {
  if (layers < 0) throw ArgumentError("layer count must be non-negative");
  std::vector<Tensor<T>> stack{e0};
  for (int l = 0; l < layers; ++l) stack.push_back(adj.multiply(stack.back()));
  return stack;
}

template <typename T>
std::vector<Var<T>> propagate(Var<T> e0, const SparseMatrix<T>& adj, int layers) {
  if (layers < 0) throw ArgumentError("layer count must be non-negative");
  std::vector<Var<T>> stack{e0};
  for (int l = 0; l < layers; ++l) stack.push_back(ad::spmm(adj, stack.back()));
  return stack;
}

template <typename T>
Tensor<T> pool_layers(const std::vector<Tensor<T>>& stack) {
  if (stack.empty()) throw ArgumentError("pool_layers on an empty stack");
  Tensor<T> out(stack.front().rows(), stack.front().cols());
  for (const auto& layer : stack) out += layer;
  const T inv = T{1} / static_cast<T>(stack.size());
  for (auto& v : out.values()) v *= inv;
  return out;
}

template <typename T>
Var<T> pool_layers(const std::vector<Var<T>>& stack) {
  if (stack.empty()) throw ArgumentError("pool_layers on an empty stack");
  return ad::mean_over(stack);
}

#define CODEREC_INSTANTIATE(T)                                                              \
  template SparseMatrix<T> normalize_adjacency<T>(const SparseMatrix<float>&);              \
  template std::vector<Tensor<T>> propagate(const Tensor<T>&, const SparseMatrix<T>&, int); \
  template std::vector<Var<T>> propagate(Var<T>, const SparseMatrix<T>&, int);              \
  template Tensor<T> pool_layers(const std::vector<Tensor<T>>&);                            \
  template Var<T> pool_layers(const std::vector<Var<T>>&);
CODEREC_INSTANTIATE(float)
CODEREC_INSTANTIATE(double)
#undef CODEREC_INSTANTIATE

}  // namespace coderec
