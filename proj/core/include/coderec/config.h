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
#include <map>
#include <string>
#include <vector>

#include "coderec/dataset.h"

namespace coderec {

enum class ModelKind { kCoder, kMF, kLightGCN };

std::string_view to_string(ModelKind k);
ModelKind parse_model_kind(std::string_view s);

enum class Aggregation { kMean, kSum };

struct Hyperparams {
  std::size_t dim = 32;
  int layers = 4;
  std::size_t n_segments = 8;
  std::size_t n_history = 4;
  std::size_t attention_size = 32;
  int gat_layers = 3;
  double lambda1 = 0.1;
  double lambda2 = 1e-6;
  double lambda3 = 1e-4;
  double tau = 0.1;
  int eta = 2;
  double lr = 1e-3;
  std::size_t batch_size = 1024;
  int max_epochs = 200;
  int patience = 10;
  std::vector<Behavior> behaviors = {Behavior::kStar, Behavior::kWatch};
  Aggregation aggregation = Aggregation::kMean;
  double mlp_slope = 0.01;
  bool same_repo_negatives = false;
  std::size_t tfidf_terms = 512;

  // Throws ConfigError on inconsistent values (odd eta, eta > layers, ...).
  void validate(bool project_level) const;

  std::map<std::string, std::string> to_map() const;
  // Unknown keys are a ConfigError; absent keys keep their defaults.
  static Hyperparams from_map(const std::map<std::string, std::string>& kv);
};

struct AblationFlags {
  bool disable_fusion = false;         // CD-F
  bool disable_contrastive = false;    // CD-C
  bool tfidf_features = false;         // CD-E
  bool disable_project_level = false;  // CD-P
  bool disable_structural = false;     // CD-S

  // "CD" for the full model, otherwise "CD-" followed by the flag letters.
  std::string tag() const;
  // Accepts flag names ("disable_structural") or letters ("S").
  void set(std::string_view name);
  std::vector<std::string> names() const;
  bool operator==(const AblationFlags&) const = default;
};

}  // namespace coderec
