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

#include "coderec/semantics.h"

#include <algorithm>
#include <numeric>
#include <set>

#include "coderec/error.h"
#include "coderec/hash.h"
#include "coderec/ops.h"

namespace coderec {

HistoricalUserMatrix sample_historical_users(std::uint32_t file, const SparseMatrix<float>& contributors_by_file,
                                             std::size_t n_q, std::mt19937_64& rng) {
  if (file >= contributors_by_file.rows()) throw ArgumentError("file index out of range");
  HistoricalUserMatrix out{file, {}};
  out.users.reserve(n_q);
  const auto& ptr = contributors_by_file.row_ptr();
  std::vector<std::uint32_t> pool(contributors_by_file.col_idx().begin() + static_cast<std::ptrdiff_t>(ptr[file]),
                                  contributors_by_file.col_idx().begin() + static_cast<std::ptrdiff_t>(ptr[file + 1]));
  if (pool.empty()) {
    out.users.assign(n_q, kNoUser);
    return out;
  }
  std::shuffle(pool.begin(), pool.end(), rng);
  for (std::size_t i = 0; i < n_q; ++i) out.users.push_back(pool[i % pool.size()]);
  return out;
}

HistoricalUserMatrix sample_historical_users(std::uint32_t file, const SparseMatrix<float>& contributors_by_file,
                                             std::size_t n_q, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sample_historical_users(file, contributors_by_file, n_q, rng);
}

std::vector<std::uint32_t> historical_gather_index(const std::vector<HistoricalUserMatrix>& q,
                                                   std::uint32_t num_users) {
  std::vector<std::uint32_t> idx;
  for (const auto& m : q) {
    for (auto u : m.users) idx.push_back(u == kNoUser ? num_users : u);
  }
  return idx;
}

template <typename T>
FusionOutput<T> coattention_fuse(Var<T> c, Var<T> q, const FusionVars<T>& p, std::size_t batch) {
  if (batch == 0 || c.rows() % batch != 0 || q.rows() % batch != 0) {
    throw ArgumentError("co-attention batch " + std::to_string(batch) + " does not divide " +
                        Tensor<T>::shape_string(c.rows(), c.cols()) + " and " +
                        Tensor<T>::shape_string(q.rows(), q.cols()));
  }
  const std::size_t n_c = c.rows() / batch;
  auto affinity = ad::tanh(ad::batched_matmul(ad::matmul(c, p.w_o), q, batch, true));
  auto lq = ad::batched_matmul(affinity, q, batch, false);
  auto hidden = ad::tanh(ad::add(ad::matmul_nt(c, p.w_c), ad::matmul_nt(lq, p.w_q)));
  std::vector<std::size_t> offsets(batch + 1);
  for (std::size_t b = 0; b <= batch; ++b) offsets[b] = b * n_c;
  auto a = ad::segment_softmax(ad::matmul(hidden, p.w_h), offsets);
  return {ad::segment_sum(ad::scale_rows(c, a), offsets), a};
}

std::size_t StructureGraph::num_tree_edges() const {
  return static_cast<std::size_t>(std::count_if(parent.begin(), parent.end(), [](auto p) { return p >= 0; }));
}

StructureGraph build_structure_graph(const std::vector<RepoTree>& trees, std::size_t num_files,
                                     std::size_t num_dirs, std::size_t num_repos) {
  StructureGraph g;
  g.file_nodes.assign(num_files, UINT32_MAX);
  g.dir_nodes.assign(num_dirs, UINT32_MAX);
  g.root_nodes.assign(num_repos, UINT32_MAX);
  for (const auto& tree : trees) {
    const auto base = static_cast<std::uint32_t>(g.kind.size());
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
      const auto& n = tree.nodes[i];
      const auto id = base + static_cast<std::uint32_t>(i);
      g.kind.push_back(n.kind);
      g.entity.push_back(n.entity);
      g.parent.push_back(n.parent < 0 ? -1 : static_cast<std::int64_t>(base) + n.parent);
      auto& slot = n.kind == NodeKind::kFile ? g.file_nodes : n.kind == NodeKind::kDir ? g.dir_nodes : g.root_nodes;
      if (n.entity >= slot.size()) throw IntegrityError("tree node '" + n.id + "' has out-of-range entity");
      slot[n.entity] = id;
    }
  }
  for (std::size_t f = 0; f < num_files; ++f) {
    if (g.file_nodes[f] == UINT32_MAX) throw IntegrityError("file " + std::to_string(f) + " has no tree node");
  }
  // A repository without a tree is a lone root.
  for (std::size_t r = 0; r < num_repos; ++r) {
    if (g.root_nodes[r] != UINT32_MAX) continue;
    g.root_nodes[r] = static_cast<std::uint32_t>(g.kind.size());
    g.kind.push_back(NodeKind::kRoot);
    g.entity.push_back(static_cast<std::uint32_t>(r));
    g.parent.push_back(-1);
  }
  const std::size_t n = g.kind.size();
  std::vector<std::vector<std::uint32_t>> adj(n);
  for (std::size_t i = 0; i < n; ++i) {
    adj[i].push_back(static_cast<std::uint32_t>(i));
    if (g.parent[i] >= 0) {
      const auto p = static_cast<std::uint32_t>(g.parent[i]);
      adj[i].push_back(p);
      adj[p].push_back(static_cast<std::uint32_t>(i));
    }
  }
  g.offsets.push_back(0);
  for (std::size_t i = 0; i < n; ++i) {
    std::sort(adj[i].begin(), adj[i].end());
    for (auto j : adj[i]) {
      g.neighbors.push_back(j);
      g.edge_target.push_back(static_cast<std::uint32_t>(i));
    }
    g.offsets.push_back(g.neighbors.size());
  }
  return g;
}

StructureGraph build_structure_graph(const Dataset& ds) {
  return build_structure_graph(ds.trees, ds.files.size(), ds.directories.size(), ds.repos.size());
}

StructureFeatures build_structure_features(const Dataset& ds) {
  StructureFeatures f;
  std::vector<Segment> docs;
  docs.reserve(ds.directories.size());
  for (const auto& d : ds.directories) docs.push_back(split_name_words(d.name));
  f.dir_vocab = build_tfidf_vocabulary(docs);
  std::vector<Triplet> dir_t;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    const auto row = tfidf_row(docs[i], f.dir_vocab);
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (row[k] != 0.0) dir_t.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(k), row[k]});
    }
  }
  f.dir = SparseMatrix<float>::from_triplets(ds.directories.size(), std::max<std::size_t>(f.dir_vocab.size(), 1),
                                             dir_t);

  std::set<std::string> langs;
  for (const auto& r : ds.repos) langs.insert(r.top_languages.begin(), r.top_languages.end());
  f.languages.assign(langs.begin(), langs.end());
  std::int64_t lo = INT64_MAX, hi = INT64_MIN;
  for (const auto& r : ds.repos) {
    lo = std::min(lo, r.created_at);
    hi = std::max(hi, r.created_at);
  }
  std::vector<Triplet> repo_t;
  for (std::size_t i = 0; i < ds.repos.size(); ++i) {
    const auto& r = ds.repos[i];
    const auto row = static_cast<std::uint32_t>(i);
    repo_t.push_back({row, static_cast<std::uint32_t>(fnv1a64(r.owner) % kOwnerBuckets), 1.0});
    const double t = hi > lo ? static_cast<double>(r.created_at - lo) / static_cast<double>(hi - lo) : 0.0;
    if (t != 0.0) repo_t.push_back({row, static_cast<std::uint32_t>(kOwnerBuckets), t});
    for (const auto& l : r.top_languages) {
      const auto k = std::lower_bound(f.languages.begin(), f.languages.end(), l) - f.languages.begin();
      repo_t.push_back({row, static_cast<std::uint32_t>(kOwnerBuckets + 1 + static_cast<std::size_t>(k)), 1.0});
    }
  }
  f.repo = SparseMatrix<float>::from_triplets(ds.repos.size(), kOwnerBuckets + 1 + f.languages.size(), repo_t);
  return f;
}

std::vector<std::uint32_t> node_source_index(const StructureGraph& g, std::size_t num_files, std::size_t num_dirs) {
  std::vector<std::uint32_t> idx(g.num_nodes());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    switch (g.kind[i]) {
      case NodeKind::kFile: idx[i] = g.entity[i]; break;
      case NodeKind::kDir: idx[i] = static_cast<std::uint32_t>(num_files + g.entity[i]); break;
      case NodeKind::kRoot: idx[i] = static_cast<std::uint32_t>(num_files + num_dirs + g.entity[i]); break;
    }
  }
  return idx;
}

template <typename T>
Var<T> gat_layer(const StructureGraph& g, Var<T> x, const GatLayerVars<T>& p, Var<T>* coefficients) {
  if (x.rows() != g.num_nodes()) {
    throw ArgumentError("node features " + Tensor<T>::shape_string(x.rows(), x.cols()) + " for " +
                        std::to_string(g.num_nodes()) + " nodes");
  }
  auto z = ad::matmul(x, p.weight);
  auto dst = ad::gather_rows(ad::matmul(z, p.att_dst), g.edge_target);
  auto src = ad::gather_rows(ad::matmul(z, p.att_src), g.neighbors);
  auto alpha = ad::segment_softmax(ad::leaky_relu(ad::add(dst, src), static_cast<T>(kAttentionSlope)), g.offsets);
  if (coefficients != nullptr) *coefficients = alpha;
  return ad::segment_sum(ad::scale_rows(ad::gather_rows(z, g.neighbors), alpha), g.offsets);
}

template <typename T>
Var<T> structural_aggregate(const StructureGraph& g, Var<T> x, const std::vector<GatLayerVars<T>>& layers) {
  for (std::size_t l = 0; l < layers.size(); ++l) {
    x = gat_layer(g, x, layers[l]);
    if (l + 1 < layers.size()) x = ad::elu(x);
  }
  return x;
}

#define CODEREC_INSTANTIATE(T)                                                                             \
  template FusionOutput<T> coattention_fuse<T>(Var<T>, Var<T>, const FusionVars<T>&, std::size_t);         \
  template Var<T> gat_layer<T>(const StructureGraph&, Var<T>, const GatLayerVars<T>&, Var<T>*);            \
  template Var<T> structural_aggregate<T>(const StructureGraph&, Var<T>, const std::vector<GatLayerVars<T>>&);
CODEREC_INSTANTIATE(float)
CODEREC_INSTANTIATE(double)
#undef CODEREC_INSTANTIATE

}  // namespace coderec
