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

#include <vector>

#include "coderec/sparse.h"
#include "coderec/tape.h"

namespace coderec {

// Symmetric-normalised adjacency D^-1/2 A D^-1/2 of the bipartite graph whose
// biadjacency block is `m` (rows x cols). Rows of the result index the row
// nodes first, then the column nodes. Entry (i, j) is 1/sqrt(|N_i| |N_j|)
// wherever m has a nonzero; isolated nodes get empty rows.
template <typename T>
SparseMatrix<T> normalize_adjacency(const SparseMatrix<float>& m);

// Light convolution: E^(l) = adj * E^(l-1), l = 1..layers. Returns all
// layers.size() == layers + 1 entries, starting with e0.
template <typename T>
std::vector<Tensor<T>> propagate(const Tensor<T>& e0, const SparseMatrix<T>& adj, int layers);
template <typename T>
std::vector<Var<T>> propagate(Var<T> e0, const SparseMatrix<T>& adj, int layers);

// Mean over the layer stack.
template <typename T>
Tensor<T> pool_layers(const std::vector<Tensor<T>>& stack);
template <typename T>
Var<T> pool_layers(const std::vector<Var<T>>& stack);

}  // namespace coderec
