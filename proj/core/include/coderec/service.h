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

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "coderec/dataset.h"
#include "coderec/protocols.h"
#include "coderec/training_data.h"

namespace coderec {

struct Recommendation {
  std::string file;
  std::string repo;
  float score = 0.0f;
};

// Immutable scoring state: the dataset ids, the candidate rules and one
// embedding snapshot.
class RecommendationService {
 public:
  RecommendationService(std::shared_ptr<const Dataset> dataset, std::shared_ptr<const TrainingData> data,
                        EmbeddingSnapshot snapshot, std::string model_hash);

  // Top-k unseen files by descending score, ties by file index. Throws
  // NotFoundError for an unknown user and ArgumentError when k is zero.
  std::vector<Recommendation> recommend(const std::string& user, std::size_t k, Protocol scope) const;

  const std::string& model_hash() const { return model_hash_; }
  const Dataset& dataset() const { return *dataset_; }

 private:
  std::shared_ptr<const Dataset> dataset_;
  std::shared_ptr<const TrainingData> data_;
  EmbeddingSnapshot snapshot_;
  std::string model_hash_;
};

// {"user": ..., "items": [{"file", "repo", "score"}...]}
std::string recommendations_json(const std::string& user, const std::vector<Recommendation>& items);

// GET /recommend?user=&k=&scope=intra|cross and GET /healthz. Requests run
// concurrently against the current service; swap() replaces it atomically.
class RecommendationServer {
 public:
  explicit RecommendationServer(std::shared_ptr<const RecommendationService> service);
  ~RecommendationServer();
  RecommendationServer(const RecommendationServer&) = delete;
  RecommendationServer& operator=(const RecommendationServer&) = delete;

  // Binds and serves on a background thread; port 0 picks a free port.
  // Returns the bound port.
  int start(const std::string& host, int port);
  // Blocks until stop() is called from elsewhere.
  void run(const std::string& host, int port);
  void stop();
  void swap(std::shared_ptr<const RecommendationService> next);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace coderec
