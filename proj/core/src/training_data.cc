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

#include "coderec/training_data.h"

#include <set>
#include <unordered_map>

#include "coderec/behavior.h"
#include "coderec/code_features.h"
#include "coderec/error.h"

namespace coderec {

TrainingData prepare_training_data(const Dataset& ds, const DatasetSplit& split, const Hyperparams& hyper,
                                   const FeatureOptions& features) {
  TrainingData d;
  d.num_users = ds.num_users();
  d.num_files = ds.num_files();
  d.num_repos = ds.num_repos();
  d.num_dirs = ds.directories.size();
  d.file_repo = ds.file_repo();
  d.repo_files = ds.repo_files();
  d.mapping_hash = ds.mapping_hash();

  d.train = build_interaction_matrices(split, d.num_users, d.num_files, d.num_repos);
  d.val_y = binary_matrix(split.val, Behavior::kCommit, d.num_users, d.num_files);
  d.test_y = binary_matrix(split.test, Behavior::kCommit, d.num_users, d.num_files);
  d.contributors = d.train.y.transpose();

  std::vector<Triplet> ur;
  for (std::uint32_t u = 0; u < d.num_users; ++u) {
    std::set<std::uint32_t> repos;
    const auto& ptr = d.train.y.row_ptr();
    for (std::size_t e = ptr[u]; e < ptr[u + 1]; ++e) repos.insert(d.file_repo[d.train.y.col_idx()[e]]);
    for (auto r : repos) ur.push_back({u, r, 1.0});
  }
  d.user_repos = SparseMatrix<float>::from_triplets(d.num_users, d.num_repos, ur);

  d.file_adjacency = normalize_adjacency<float>(d.train.y);
  for (auto b : hyper.behaviors) {
    auto it = d.train.s.find(b);
    const SparseMatrix<float> empty(d.num_users, d.num_repos);
    d.project_adjacency.emplace(b, normalize_adjacency<float>(it == d.train.s.end() ? empty : it->second));
  }

  d.n_segments = hyper.n_segments;
  SegmentFeatures f;
  if (features.features_file && !features.force_tfidf) {
    f = read_segment_features(*features.features_file);
    if (f.n_segments != hyper.n_segments) {
      throw ConfigError("feature file has " + std::to_string(f.n_segments) + " segments, config expects " +
                        std::to_string(hyper.n_segments));
    }
    d.feature_source = features.features_file->string();
  } else {
    std::vector<std::uint32_t> train_files;
    for (const auto& r : split.train) {
      if (r.behavior == Behavior::kCommit) train_files.push_back(r.target);
    }
    f = tfidf_segment_features(ds, train_files, hyper.n_segments, hyper.tfidf_terms);
    d.feature_source = "tfidf";
  }
  std::unordered_map<std::string, std::uint32_t> index;
  for (std::uint32_t i = 0; i < ds.files.size(); ++i) index[ds.files[i].id] = i;
  std::map<std::uint32_t, CodeSegmentMatrix> by_index;
  for (std::size_t b = 0; b < f.file_ids.size(); ++b) {
    auto it = index.find(f.file_ids[b]);
    if (it == index.end()) throw IntegrityError("feature file names unknown file '" + f.file_ids[b] + "'");
    auto m = f.matrix(b);
    m.file = it->second;
    by_index[m.file] = std::move(m);
  }
  d.feature_dim = f.d_in;
  d.segments = stack_segment_features(by_index, d.num_files, d.n_segments, d.feature_dim);

  d.graph = build_structure_graph(ds);
  d.structure = build_structure_features(ds);
  d.node_source = node_source_index(d.graph, d.num_files, d.num_dirs);
  return d;
}

}  // namespace coderec
