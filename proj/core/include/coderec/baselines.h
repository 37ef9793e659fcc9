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

#include "coderec/model.h"

namespace coderec {

// MF and LightGCN with side information: users get a projection of the
// multi-hot set of repositories they committed to, files a projection of
// their repository's one-hot identity and of their mean segment features.
// LightGCN propagates the layer-0 table over the user-file graph and pools
// layers; MF scores the layer-0 table directly.
template <typename T>
class BaselineNet final : public Recommender<T> {
 public:
  BaselineNet(ModelKind kind, const TrainingData& data, const Hyperparams& hyper, bool side_features = true);

  ModelKind kind() const override { return kind_; }
  void init_params(ParameterStore<T>& store, std::mt19937_64& rng) const override;
  ForwardState<T> forward(Tape<T>& tape, ParameterStore<T>& store) const override;

 private:
  ModelKind kind_;
  const TrainingData& data_;
  Hyperparams hyper_;
  bool side_features_;
  int layers_;
  Tensor<T> mean_segments_;  // files x d_in
  SparseMatrix<T> user_repos_;
  SparseMatrix<T> file_adj_;
};

}  // namespace coderec
