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

#include "coderec/model.h"

#include <algorithm>
#include <numeric>

#include "coderec/behavior.h"
#include "coderec/error.h"
#include "coderec/ops.h"
#include "coderec/optim.h"

namespace coderec {
namespace {

std::vector<std::uint32_t> range_index(std::size_t begin, std::size_t end) {
  std::vector<std::uint32_t> idx(end - begin);
  std::iota(idx.begin(), idx.end(), static_cast<std::uint32_t>(begin));
  return idx;
}

template <typename T>
void add_xavier(ParameterStore<T>& store, const std::string& name, std::size_t rows, std::size_t cols,
                std::mt19937_64& rng) {
  store.add(name, xavier_uniform<T>(rows, cols, rng));
}

template <typename T>
void add_mlp(ParameterStore<T>& store, const std::string& prefix, std::size_t d, std::mt19937_64& rng) {
  add_xavier(store, prefix + ".w1", 2 * d, d, rng);
  store.add(prefix + ".b1", Tensor<T>(1, d));
  add_xavier(store, prefix + ".w2", d, d, rng);
  store.add(prefix + ".b2", Tensor<T>(1, d));
}

template <typename T>
MlpVars<T> mlp_vars(Tape<T>& tape, ParameterStore<T>& store, const std::string& prefix) {
  return {tape.param(store.get(prefix + ".w1")), tape.param(store.get(prefix + ".b1")),
          tape.param(store.get(prefix + ".w2")), tape.param(store.get(prefix + ".b2"))};
}

}  // namespace

template <typename T>
Var<T> aggregate_behaviors(const std::vector<Var<T>>& xs, Aggregation agg) {
  if (xs.empty()) throw ConfigError("behavior aggregation over an empty behavior set");
  if (agg == Aggregation::kMean) return ad::mean_over(xs);
  Var<T> s = xs[0];
  for (std::size_t i = 1; i < xs.size(); ++i) s = ad::add(s, xs[i]);
  return s;
}

template <typename T>
Var<T> mlp(Var<T> x, const MlpVars<T>& p, T slope) {
  auto hidden = ad::leaky_relu(ad::add_row(ad::matmul(x, p.w1), p.b1), slope);
  return ad::add_row(ad::matmul(hidden, p.w2), p.b2);
}

template <typename T>
Var<T> bpr_loss(Var<T> pos, Var<T> neg) {
  return ad::scale(ad::mean(ad::log_sigmoid(ad::sub(pos, neg))), T{-1});
}

template <typename T>
Var<T> contrastive_loss(Var<T> layer0, Var<T> layer_eta, T tau) {
  auto anchor = ad::l2_normalize_rows(layer_eta);
  auto keys = ad::l2_normalize_rows(layer0);
  const T inv = T{1} / tau;
  auto lse = ad::logsumexp_rows(ad::scale(ad::matmul_nt(anchor, keys), inv));
  auto positive = ad::scale(ad::row_dot(anchor, keys), inv);
  return ad::mean(ad::sub(lse, positive));
}

template <typename T>
Var<T> total_loss(const LossTerms<T>& terms, const LossWeights& w) {
  Var<T> loss = terms.file;
  if (w.lambda1 != 0.0 && !terms.project.empty()) {
    Var<T> p = terms.project[0];
    for (std::size_t i = 1; i < terms.project.size(); ++i) p = ad::add(p, terms.project[i]);
    loss = ad::add(loss, ad::scale(p, static_cast<T>(w.lambda1)));
  }
  if (w.lambda2 != 0.0 && (terms.contrastive_users || terms.contrastive_files)) {
    std::optional<Var<T>> c;
    for (const auto& part : {terms.contrastive_users, terms.contrastive_files}) {
      if (part) c = c ? ad::add(*c, *part) : *part;
    }
    loss = ad::add(loss, ad::scale(*c, static_cast<T>(w.lambda2)));
  }
  if (w.lambda3 != 0.0 && terms.param_norm) loss = ad::add(loss, ad::scale(*terms.param_norm, static_cast<T>(w.lambda3)));
  return loss;
}

template <typename T>
Var<T> pair_scores(Var<T> left, Var<T> right, const std::vector<std::uint32_t>& li,
                   const std::vector<std::uint32_t>& ri) {
  return ad::row_dot(ad::gather_rows(left, li), ad::gather_rows(right, ri));
}

template <typename T>
Var<T> training_loss(Tape<T>& tape, ParameterStore<T>& store, const ForwardState<T>& state,
                     const TrainingBatch& batch, const Hyperparams& hyper) {
  LossTerms<T> terms;
  const auto& f = batch.files;
  terms.file = bpr_loss(pair_scores(state.users, state.files, f.users, f.pos),
                        pair_scores(state.users, state.files, f.users, f.neg));
  for (const auto& [behavior, zr] : state.project) {
    auto it = batch.projects.find(behavior);
    if (it == batch.projects.end() || it->second.users.empty()) continue;
    const auto& t = it->second;
    terms.project.push_back(bpr_loss(pair_scores(zr.first, zr.second, t.users, t.pos),
                                     pair_scores(zr.first, zr.second, t.users, t.neg)));
  }
  if (state.layer0 && state.layer_eta && hyper.lambda2 != 0.0) {
    const T tau = static_cast<T>(hyper.tau);
    if (!batch.unique_users.empty()) {
      terms.contrastive_users = contrastive_loss(ad::gather_rows(*state.layer0, batch.unique_users),
                                                 ad::gather_rows(*state.layer_eta, batch.unique_users), tau);
    }
    if (!batch.unique_files.empty()) {
      const auto offset = static_cast<std::uint32_t>(state.users.rows());
      std::vector<std::uint32_t> rows;
      rows.reserve(batch.unique_files.size());
      for (auto j : batch.unique_files) rows.push_back(offset + j);
      terms.contrastive_files =
          contrastive_loss(ad::gather_rows(*state.layer0, rows), ad::gather_rows(*state.layer_eta, rows), tau);
    }
  }
  if (hyper.lambda3 != 0.0) {
    std::vector<Var<T>> all;
    for (std::size_t i = 0; i < store.size(); ++i) all.push_back(tape.param(store[i]));
    terms.param_norm = ad::global_norm(all);
  }
  return total_loss(terms, {hyper.lambda1, hyper.lambda2, hyper.lambda3});
}

template <typename T>
CoderNet<T>::CoderNet(const TrainingData& data, const Hyperparams& hyper, const AblationFlags& flags,
                      std::uint64_t seed)
    : data_(data), hyper_(hyper), flags_(flags) {
  hyper_.validate(!flags_.disable_project_level);
  if (data.n_segments != hyper.n_segments) throw ConfigError("segment count differs from prepared features");
  const auto& seg = data.segments;
  const auto nonzero = static_cast<std::size_t>(
      std::count_if(seg.values().begin(), seg.values().end(), [](float v) { return v != 0.0f; }));
  if (2 * nonzero <= seg.size()) {
    std::vector<std::size_t> row_ptr{0};
    std::vector<std::uint32_t> cols;
    std::vector<T> vals;
    cols.reserve(nonzero);
    vals.reserve(nonzero);
    for (std::size_t r = 0; r < seg.rows(); ++r) {
      for (std::size_t c = 0; c < seg.cols(); ++c) {
        if (seg(r, c) != 0.0f) {
          cols.push_back(static_cast<std::uint32_t>(c));
          vals.push_back(static_cast<T>(seg(r, c)));
        }
      }
      row_ptr.push_back(cols.size());
    }
    sparse_segments_ = SparseMatrix<T>::from_csr(seg.rows(), seg.cols(), std::move(row_ptr), std::move(cols),
                                                 std::move(vals));
  } else {
    segments_ = seg.template cast<T>();
  }
  file_adj_ = data.file_adjacency.template cast<T>();
  if (!flags_.disable_project_level) {
    for (auto b : hyper_.behaviors) project_adj_.emplace(b, data.project_adjacency.at(b).template cast<T>());
  }
  dir_features_ = data.structure.dir.template cast<T>();
  repo_features_ = data.structure.repo.template cast<T>();
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  for (std::uint32_t f = 0; f < data.num_files; ++f) {
    history_.push_back(sample_historical_users(f, data.contributors, hyper_.n_history, rng));
  }
  history_index_ = historical_gather_index(history_, static_cast<std::uint32_t>(data.num_users));
  for (std::size_t f = 0; f <= data.num_files; ++f) segment_offsets_.push_back(f * hyper_.n_segments);
}

template <typename T>
void CoderNet<T>::init_params(ParameterStore<T>& store, std::mt19937_64& rng) const {
  const std::size_t d = hyper_.dim;
  add_xavier(store, "user_embedding", data_.num_users, d, rng);
  add_xavier(store, "input_projection", data_.feature_dim, d, rng);
  if (!flags_.disable_fusion) {
    add_xavier(store, "fusion.w_o", d, d, rng);
    add_xavier(store, "fusion.w_c", hyper_.attention_size, d, rng);
    add_xavier(store, "fusion.w_q", hyper_.attention_size, d, rng);
    add_xavier(store, "fusion.w_h", hyper_.attention_size, 1, rng);
  }
  if (!flags_.disable_structural && data_.num_dirs > 0) {
    add_xavier(store, "dir_projection", dir_features_.cols(), d, rng);
  }
  if (!flags_.disable_project_level) add_xavier(store, "repo_projection", repo_features_.cols(), d, rng);
  if (!flags_.disable_structural) {
    for (int l = 0; l < hyper_.gat_layers; ++l) {
      const std::string p = "gat." + std::to_string(l);
      add_xavier(store, p + ".weight", d, d, rng);
      add_xavier(store, p + ".att_src", d, 1, rng);
      add_xavier(store, p + ".att_dst", d, 1, rng);
    }
  }
  add_mlp(store, "mlp_u", d, rng);
  add_mlp(store, "mlp_v", d, rng);
}

template <typename T>
ForwardState<T> CoderNet<T>::forward(Tape<T>& tape, ParameterStore<T>& store) const {
  const std::size_t d = hyper_.dim;
  const std::size_t nu = data_.num_users, nf = data_.num_files, nr = data_.num_repos;
  Var<T> users = tape.param(store.get("user_embedding"));
  Var<T> projection = tape.param(store.get("input_projection"));
  Var<T> code = sparse_segments_ ? ad::spmm(*sparse_segments_, projection)
                                 : ad::matmul(tape.constant(segments_), projection);

  Var<T> h;
  if (flags_.disable_fusion) {
    h = ad::scale(ad::segment_sum(code, segment_offsets_), T{1} / static_cast<T>(hyper_.n_segments));
  } else {
    const FusionVars<T> fv{tape.param(store.get("fusion.w_o")), tape.param(store.get("fusion.w_c")),
                           tape.param(store.get("fusion.w_q")), tape.param(store.get("fusion.w_h"))};
    auto table = ad::vstack<T>({users, tape.constant(Tensor<T>(1, d))});
    h = coattention_fuse(code, ad::gather_rows(table, history_index_), fv, nf).h;
  }

  std::optional<Var<T>> repo_input;
  if (!flags_.disable_project_level) repo_input = ad::spmm(repo_features_, tape.param(store.get("repo_projection")));

  Var<T> v0, r0;
  if (!flags_.disable_structural) {
    std::vector<Var<T>> parts{h};
    if (data_.num_dirs > 0) parts.push_back(ad::spmm(dir_features_, tape.param(store.get("dir_projection"))));
    parts.push_back(repo_input ? *repo_input : tape.constant(Tensor<T>(nr, d)));
    auto x = ad::gather_rows(ad::vstack(parts), data_.node_source);
    std::vector<GatLayerVars<T>> layers;
    for (int l = 0; l < hyper_.gat_layers; ++l) {
      const std::string p = "gat." + std::to_string(l);
      layers.push_back({tape.param(store.get(p + ".weight")), tape.param(store.get(p + ".att_src")),
                        tape.param(store.get(p + ".att_dst"))});
    }
    auto enhanced = structural_aggregate(data_.graph, x, layers);
    v0 = ad::gather_rows(enhanced, data_.graph.file_nodes);
    r0 = ad::gather_rows(enhanced, data_.graph.root_nodes);
  } else {
    v0 = h;
    if (repo_input) r0 = *repo_input;
  }

  ForwardState<T> state;
  auto e0 = ad::vstack<T>({users, v0});
  const auto stack = propagate(e0, file_adj_, hyper_.layers);
  auto pooled = pool_layers(stack);
  auto u_star = ad::gather_rows(pooled, range_index(0, nu));
  auto v_star = ad::gather_rows(pooled, range_index(nu, nu + nf));
  if (!flags_.disable_contrastive) {
    state.layer0 = stack[0];
    state.layer_eta = stack[static_cast<std::size_t>(hyper_.eta)];
  }

  Var<T> z_star, r_star;
  if (!flags_.disable_project_level) {
    auto z0 = ad::vstack<T>({users, r0});
    std::vector<Var<T>> zs, rs;
    for (auto b : hyper_.behaviors) {
      auto zp = pool_layers(propagate(z0, project_adj_.at(b), hyper_.layers));
      auto z = ad::gather_rows(zp, range_index(0, nu));
      auto r = ad::gather_rows(zp, range_index(nu, nu + nr));
      state.project.emplace(b, std::make_pair(z, r));
      zs.push_back(z);
      rs.push_back(r);
    }
    z_star = aggregate_behaviors(zs, hyper_.aggregation);
    r_star = aggregate_behaviors(rs, hyper_.aggregation);
  } else {
    z_star = tape.constant(Tensor<T>(nu, d));
    r_star = tape.constant(Tensor<T>(nr, d));
  }

  const T slope = static_cast<T>(hyper_.mlp_slope);
  state.users = mlp(ad::concat_cols<T>({u_star, z_star}), mlp_vars(tape, store, "mlp_u"), slope);
  state.files =
      mlp(ad::concat_cols<T>({v_star, ad::gather_rows(r_star, data_.file_repo)}), mlp_vars(tape, store, "mlp_v"), slope);
  return state;
}

#define CODEREC_INSTANTIATE(T)                                                                               \
  template Var<T> aggregate_behaviors<T>(const std::vector<Var<T>>&, Aggregation);                           \
  template Var<T> mlp<T>(Var<T>, const MlpVars<T>&, T);                                                      \
  template Var<T> bpr_loss<T>(Var<T>, Var<T>);                                                               \
  template Var<T> contrastive_loss<T>(Var<T>, Var<T>, T);                                                    \
  template Var<T> total_loss<T>(const LossTerms<T>&, const LossWeights&);                                    \
  template Var<T> pair_scores<T>(Var<T>, Var<T>, const std::vector<std::uint32_t>&,                          \
                                 const std::vector<std::uint32_t>&);                                         \
  template Var<T> training_loss<T>(Tape<T>&, ParameterStore<T>&, const ForwardState<T>&, const TrainingBatch&, \
                                   const Hyperparams&);                                                      \
  template class CoderNet<T>;
CODEREC_INSTANTIATE(float)
CODEREC_INSTANTIATE(double)
#undef CODEREC_INSTANTIATE

}  // namespace coderec
