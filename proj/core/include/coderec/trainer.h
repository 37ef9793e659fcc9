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
#include <filesystem>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "coderec/model.h"
#include "coderec/optim.h"
#include "coderec/protocols.h"

namespace coderec {

// n draws, uniform with replacement, over columns the user has no entry for.
// Throws SamplingError when the user's row is full.
std::vector<std::uint32_t> sample_negatives(std::uint32_t user, const SparseMatrix<float>& interactions,
                                            std::size_t n, std::mt19937_64& rng);

// One draw from `pool` (sorted) excluding the user's entries; nullopt if none.
std::optional<std::uint32_t> sample_negative_from(std::uint32_t user, std::span<const std::uint32_t> pool,
                                                  const SparseMatrix<float>& interactions, std::mt19937_64& rng);

// Shuffled epochs of file-level positives with one negative each, plus
// project-level triples per behavior drawn with replacement.
class BatchSampler {
 public:
  BatchSampler(const TrainingData& data, const Hyperparams& hyper, bool project_level);

  std::vector<TrainingBatch> epoch(std::mt19937_64& rng) const;
  // Users skipped because every file is a positive for them.
  std::size_t saturated_users() const { return saturated_; }

 private:
  const TrainingData& data_;
  Hyperparams hyper_;
  bool project_level_;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> positives_;
  std::map<Behavior, std::vector<std::pair<std::uint32_t, std::uint32_t>>> project_positives_;
  std::size_t saturated_ = 0;
};

template <typename T>
std::unique_ptr<Recommender<T>> make_recommender(ModelKind kind, const TrainingData& data, const Hyperparams& hyper,
                                                 const AblationFlags& flags, std::uint64_t seed);

template <typename T>
EmbeddingSnapshot snapshot_of(const Recommender<T>& net, ParameterStore<T>& store);

struct EpochLog {
  int epoch = 0;
  double loss = 0.0;
  double val_ndcg10 = 0.0;
  std::size_t batches = 0;
};

struct TrainOptions {
  std::uint64_t seed = 0;
  bool early_stopping = true;
  Protocol validation_protocol = Protocol::kIntra;
  std::function<void(const EpochLog&)> on_epoch;
};

class TrainedModel {
 public:
  ModelKind kind = ModelKind::kCoder;
  Hyperparams hyper;
  AblationFlags flags;
  std::uint64_t seed = 0;
  std::string mapping_hash;
  ParameterStore<float> params;
  std::vector<EpochLog> log;
  int best_epoch = 0;

  std::string tag() const;
  std::size_t parameter_count() const { return params.element_count(); }
  EmbeddingSnapshot embed(const TrainingData& data);

  // Binary "CCKP" file: kind, mapping hash, hyperparameters, flags, seed and
  // every parameter tensor as f32.
  void save(const std::filesystem::path& path) const;
  // Refuses (IntegrityError) a checkpoint written for a different mapping hash
  // unless expected_hash is empty.
  static TrainedModel load(const std::filesystem::path& path, const std::string& expected_hash);
};

// Adam on the full objective; with early stopping, training halts after
// `patience` epochs without a better validation NDCG@10 and the best
// parameters are restored.
TrainedModel train_model(ModelKind kind, const TrainingData& data, const Hyperparams& hyper,
                         const AblationFlags& flags, const TrainOptions& opts);

}  // namespace coderec
