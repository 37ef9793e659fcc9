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

#include "coderec/baselines.h"

#include <numeric>

#include "coderec/behavior.h"
#include "coderec/error.h"
#include "coderec/ops.h"
#include "coderec/optim.h"

namespace coderec {

template <typename T>
BaselineNet<T>::BaselineNet(ModelKind kind, const TrainingData& data, const Hyperparams& hyper, bool side_features)
    : kind_(kind), data_(data), hyper_(hyper), side_features_(side_features) {
  if (kind == ModelKind::kCoder) throw ArgumentError("baseline kind must be mf or lightgcn");
  layers_ = kind == ModelKind::kMF ? 0 : hyper.layers;
  mean_segments_ = Tensor<T>(data.num_files, data.feature_dim);
  for (std::size_t f = 0; f < data.num_files; ++f) {
    for (std::size_t s = 0; s < data.n_segments; ++s) {
      const auto src = data.segments.row(f * data.n_segments + s);
      auto dst = mean_segments_.row(f);
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += static_cast<T>(src[k]) / static_cast<T>(data.n_segments);
    }
  }
  user_repos_ = data.user_repos.template cast<T>();
  file_adj_ = data.file_adjacency.template cast<T>();
}

template <typename T>
void BaselineNet<T>::init_params(ParameterStore<T>& store, std::mt19937_64& rng) const {
  const std::size_t d = hyper_.dim;
  store.add("user_embedding", xavier_uniform<T>(data_.num_users, d, rng));
  store.add("file_embedding", xavier_uniform<T>(data_.num_files, d, rng));
  if (side_features_) {
    store.add("user_repo_projection", xavier_uniform<T>(data_.num_repos, d, rng));
    store.add("repo_identity", xavier_uniform<T>(data_.num_repos, d, rng));
    store.add("input_projection", xavier_uniform<T>(data_.feature_dim, d, rng));
  }
}

template <typename T>
ForwardState<T> BaselineNet<T>::forward(Tape<T>& tape, ParameterStore<T>& store) const {
  Var<T> users = tape.param(store.get("user_embedding"));
  Var<T> files = tape.param(store.get("file_embedding"));
  if (side_features_) {
    users = ad::add(users, ad::spmm(user_repos_, tape.param(store.get("user_repo_projection"))));
    files = ad::add(files, ad::gather_rows(tape.param(store.get("repo_identity")), data_.file_repo));
    files = ad::add(files, ad::matmul(tape.constant(mean_segments_), tape.param(store.get("input_projection"))));
  }
  ForwardState<T> state;
  if (layers_ == 0) {
    state.users = users;
    state.files = files;
    return state;
  }
  const std::size_t nu = data_.num_users, nf = data_.num_files;
  auto pooled = pool_layers(propagate(ad::vstack<T>({users, files}), file_adj_, layers_));
  std::vector<std::uint32_t> ui(nu), fi(nf);
  std::iota(ui.begin(), ui.end(), 0u);
  std::iota(fi.begin(), fi.end(), static_cast<std::uint32_t>(nu));
  state.users = ad::gather_rows(pooled, ui);
  state.files = ad::gather_rows(pooled, fi);
  return state;
}

template class BaselineNet<float>;
template class BaselineNet<double>;

}  // namespace coderec
