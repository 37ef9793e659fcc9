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

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "coderec/config.h"
#include "coderec/dataset.h"
#include "coderec/semantics.h"
#include "coderec/sparse.h"
#include "coderec/tensor.h"

namespace coderec {

// Everything a model needs from one dataset and split, built once.
struct TrainingData {
  std::size_t num_users = 0;
  std::size_t num_files = 0;
  std::size_t num_repos = 0;
  std::size_t num_dirs = 0;
  std::vector<std::uint32_t> file_repo;
  std::vector<std::vector<std::uint32_t>> repo_files;
  std::string mapping_hash;

  InteractionMatrices train;
  SparseMatrix<float> val_y;
  SparseMatrix<float> test_y;
  SparseMatrix<float> contributors;  // Yᵀ of train, files x users
  // Repositories each user committed to in train, users x repos.
  SparseMatrix<float> user_repos;

  SparseMatrix<float> file_adjacency;                        // over users then files
  std::map<Behavior, SparseMatrix<float>> project_adjacency;  // over users then repos

  std::size_t n_segments = 0;
  std::size_t feature_dim = 0;
  TensorF segments;  // (num_files * n_segments) x feature_dim
  std::string feature_source;

  StructureGraph graph;
  StructureFeatures structure;
  std::vector<std::uint32_t> node_source;
};

struct FeatureOptions {
  std::optional<std::filesystem::path> features_file;  // CFEA file
  bool force_tfidf = false;
};

// Imported features are used when a file is given and TF-IDF is not forced;
// otherwise TF-IDF over code.jsonl with a vocabulary from train-commit files.
TrainingData prepare_training_data(const Dataset& ds, const DatasetSplit& split, const Hyperparams& hyper,
                                   const FeatureOptions& features = {});

}  // namespace coderec
