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

#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "coderec/config.h"
#include "coderec/semantics.h"
#include "coderec/tape.h"
#include "coderec/training_data.h"

namespace coderec {

// Output of one full-graph forward pass.
template <typename T>
struct ForwardState {
  Var<T> users;  // final u_i, users x d
  Var<T> files;  // final v_j, files x d
  // File-level layer 0 and layer eta over users then files.
  std::optional<Var<T>> layer0;
  std::optional<Var<T>> layer_eta;
  // Pooled project-level embeddings per behavior: (z*_t, r*_t).
  std::map<Behavior, std::pair<Var<T>, Var<T>>> project;
};

template <typename T>
class Recommender {
 public:
  virtual ~Recommender() = default;
  virtual ModelKind kind() const = 0;
  // Registers every trainable tensor; the registration order is stable.
  virtual void init_params(ParameterStore<T>& store, std::mt19937_64& rng) const = 0;
  virtual ForwardState<T> forward(Tape<T>& tape, ParameterStore<T>& store) const = 0;
};

struct Triples {
  std::vector<std::uint32_t> users;
  std::vector<std::uint32_t> pos;
  std::vector<std::uint32_t> neg;
};

struct TrainingBatch {
  Triples files;
  std::map<Behavior, Triples> projects;
  std::vector<std::uint32_t> unique_users;
  std::vector<std::uint32_t> unique_files;
};

// Element-wise mean (or sum) over behaviors. Empty input is a ConfigError.
template <typename T>
Var<T> aggregate_behaviors(const std::vector<Var<T>>& xs, Aggregation agg);

template <typename T>
struct MlpVars {
  Var<T> w1;  // 2d x d
  Var<T> b1;  // 1 x d
  Var<T> w2;  // d x d
  Var<T> b2;  // 1 x d
};

// Two layers, leaky-relu hidden activation, linear output.
template <typename T>
Var<T> mlp(Var<T> x, const MlpVars<T>& p, T slope);

// Mean over triples of -log sigmoid(pos - neg); pos and neg are n x 1.
template <typename T>
Var<T> bpr_loss(Var<T> pos, Var<T> neg);

// Mean InfoNCE over rows: row i of layer_eta against row i of layer0, with
// the other rows of layer0 as negatives. Rows are L2-normalised first.
template <typename T>
Var<T> contrastive_loss(Var<T> layer0, Var<T> layer_eta, T tau);

struct LossWeights {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double lambda3 = 0.0;
};

template <typename T>
struct LossTerms {
  Var<T> file;
  std::vector<Var<T>> project;
  std::optional<Var<T>> contrastive_users;
  std::optional<Var<T>> contrastive_files;
  std::optional<Var<T>> param_norm;
};

// file + l1 * sum(project) + l2 * (contrastive) + l3 * norm. Absent or
// zero-weighted terms are not recorded.
template <typename T>
Var<T> total_loss(const LossTerms<T>& terms, const LossWeights& w);

// Inner-product scores of (rows[i], cols[i]) pairs, n x 1.
template <typename T>
Var<T> pair_scores(Var<T> left, Var<T> right, const std::vector<std::uint32_t>& li,
                   const std::vector<std::uint32_t>& ri);

// Assembles the objective for one batch from a forward pass.
template <typename T>
Var<T> training_loss(Tape<T>& tape, ParameterStore<T>& store, const ForwardState<T>& state,
                     const TrainingBatch& batch, const Hyperparams& hyper);

// The full model: co-attention fusion, structural aggregation, file- and
// project-level propagation and the fusion MLPs.
template <typename T>
class CoderNet final : public Recommender<T> {
 public:
  CoderNet(const TrainingData& data, const Hyperparams& hyper, const AblationFlags& flags, std::uint64_t seed);

  ModelKind kind() const override { return ModelKind::kCoder; }
  void init_params(ParameterStore<T>& store, std::mt19937_64& rng) const override;
  ForwardState<T> forward(Tape<T>& tape, ParameterStore<T>& store) const override;

  const std::vector<HistoricalUserMatrix>& history() const { return history_; }

 private:
  const TrainingData& data_;
  Hyperparams hyper_;
  AblationFlags flags_;
  Tensor<T> segments_;
  std::optional<SparseMatrix<T>> sparse_segments_;
  SparseMatrix<T> file_adj_;
  std::map<Behavior, SparseMatrix<T>> project_adj_;
  SparseMatrix<T> dir_features_;
  SparseMatrix<T> repo_features_;
  std::vector<HistoricalUserMatrix> history_;
  std::vector<std::uint32_t> history_index_;
  std::vector<std::size_t> segment_offsets_;
};

}  // namespace coderec
