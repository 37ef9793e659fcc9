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
#include <optional>
#include <random>
#include <vector>

#include "coderec/code_features.h"
#include "coderec/dataset.h"
#include "coderec/sparse.h"
#include "coderec/tape.h"

namespace coderec {

inline constexpr std::uint32_t kNoUser = UINT32_MAX;

// Row indices into the user embedding table; kNoUser marks a zero row.
struct HistoricalUserMatrix {
  std::uint32_t file = 0;
  std::vector<std::uint32_t> users;
};

// `contributors_by_file` is Yᵀ (files x users) of the training split.
HistoricalUserMatrix sample_historical_users(std::uint32_t file, const SparseMatrix<float>& contributors_by_file,
                                             std::size_t n_q, std::mt19937_64& rng);
HistoricalUserMatrix sample_historical_users(std::uint32_t file, const SparseMatrix<float>& contributors_by_file,
                                             std::size_t n_q, std::uint64_t seed);

// Row list for gather_rows over vstack(user_table, zero_row).
std::vector<std::uint32_t> historical_gather_index(const std::vector<HistoricalUserMatrix>& q,
                                                   std::uint32_t num_users);

template <typename T>
struct FusionVars {
  Var<T> w_o;  // d x d
  Var<T> w_c;  // N_H x d
  Var<T> w_q;  // N_H x d
  Var<T> w_h;  // N_H x 1
};

template <typename T>
struct FusionOutput {
  Var<T> h;          // batch x d
  Var<T> attention;  // (batch * N_C) x 1
};

// Co-attention over `batch` files at once. `c` stacks each file's N_C x d code
// map, `q` each file's N_Q x d historical user map.
template <typename T>
FusionOutput<T> coattention_fuse(Var<T> c, Var<T> q, const FusionVars<T>& p, std::size_t batch);

// Forest of per-repository hierarchy trees, one node-index space.
struct StructureGraph {
  std::vector<NodeKind> kind;
  std::vector<std::uint32_t> entity;  // file / directory / repo index by kind
  std::vector<std::int64_t> parent;   // -1 for roots
  // Message-passing neighbourhoods including the self-loop, CSR by target node.
  std::vector<std::size_t> offsets;
  std::vector<std::uint32_t> neighbors;
  std::vector<std::uint32_t> edge_target;
  std::vector<std::uint32_t> file_nodes;  // by file index
  std::vector<std::uint32_t> dir_nodes;   // by directory index
  std::vector<std::uint32_t> root_nodes;  // by repo index

  std::size_t num_nodes() const { return kind.size(); }
  std::size_t num_tree_edges() const;
};

StructureGraph build_structure_graph(const std::vector<RepoTree>& trees, std::size_t num_files,
                                     std::size_t num_dirs, std::size_t num_repos);
StructureGraph build_structure_graph(const Dataset& ds);

inline constexpr std::size_t kOwnerBuckets = 16;

// Raw node features before projection to d.
struct StructureFeatures {
  TfidfVocabulary dir_vocab;
  std::vector<std::string> languages;
  SparseMatrix<float> dir;   // directories x |dir_vocab|
  SparseMatrix<float> repo;  // repos x (kOwnerBuckets + 1 + |languages|)
};

StructureFeatures build_structure_features(const Dataset& ds);

// Row index for gathering node inputs from vstack(files, dirs, repos).
std::vector<std::uint32_t> node_source_index(const StructureGraph& g, std::size_t num_files, std::size_t num_dirs);

template <typename T>
struct GatLayerVars {
  Var<T> weight;   // d x d
  Var<T> att_src;  // d x 1
  Var<T> att_dst;  // d x 1
};

inline constexpr double kAttentionSlope = 0.2;

// One attention layer: z = xW, e_ij = lrelu(a_dstᵀz_i + a_srcᵀz_j),
// out_i = Σ_j softmax_j(e_ij) z_j over the neighbourhood of i.
template <typename T>
Var<T> gat_layer(const StructureGraph& g, Var<T> x, const GatLayerVars<T>& p, Var<T>* coefficients = nullptr);

// Stacked layers with ELU between them and a linear last layer.
template <typename T>
Var<T> structural_aggregate(const StructureGraph& g, Var<T> x, const std::vector<GatLayerVars<T>>& layers);

}  // namespace coderec
