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
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "coderec/metrics.h"
#include "coderec/tensor.h"
#include "coderec/training_data.h"

namespace coderec {

// Final user and file representations; a file's score is their dot product.
struct EmbeddingSnapshot {
  TensorF users;
  TensorF files;

  float score(std::uint32_t user, std::uint32_t file) const;
};

enum class Protocol { kIntra, kCross, kCold };

std::string_view to_string(Protocol p);
Protocol parse_protocol(std::string_view s);

inline constexpr std::size_t kColdStartMaxTrain = 2;

// Intra: files of repositories the user committed to in train. Cross: files
// of every other repository. Both exclude the user's train positives. Cold
// uses the intra rule.
std::vector<std::uint32_t> candidate_files(const TrainingData& data, std::uint32_t user, Protocol p);

// Users with 1..kColdStartMaxTrain distinct train files.
std::vector<std::uint32_t> cold_start_users(const TrainingData& data);

struct RankingTask {
  std::uint32_t user = 0;
  std::vector<std::uint32_t> candidates;
  std::vector<std::uint32_t> relevant;  // sorted, subset of candidates
};

struct TaskStats {
  std::size_t cohort_users = 0;           // users with at least one target interaction
  std::size_t skipped_no_candidates = 0;
  std::size_t skipped_no_relevant = 0;
};

// One task per user with target interactions that survive the protocol rule.
std::vector<RankingTask> build_tasks(const TrainingData& data, const SparseMatrix<float>& target, Protocol p,
                                     TaskStats* stats = nullptr);

struct UserMetrics {
  std::uint32_t user = 0;
  std::map<std::size_t, RankingMetrics> at;
};

struct MetricReport {
  std::string model;
  std::string protocol;
  std::vector<std::size_t> ks;
  std::map<std::size_t, RankingMetrics> mean;
  std::vector<UserMetrics> per_user;
  TaskStats stats;
  double ms_per_example = 0.0;

  std::string to_json() const;
  std::string to_text() const;
};

MetricReport evaluate_tasks(const EmbeddingSnapshot& snap, const std::vector<RankingTask>& tasks,
                            const std::vector<std::size_t>& ks);

// Builds the protocol's tasks over the test (or validation) matrix and scores them.
MetricReport evaluate_protocol(const EmbeddingSnapshot& snap, const TrainingData& data, Protocol p,
                               const std::vector<std::size_t>& ks, bool validation = false);

struct InferenceTiming {
  double mean_ms = 0.0;  // per scored task
  double p95_ms = 0.0;
  std::size_t repeats = 0;
};

// Wall-clock cost per task of computing the snapshot once and ranking every
// task's candidates, over `repeats` runs after one warm-up run.
InferenceTiming measure_inference(const std::function<EmbeddingSnapshot()>& embed,
                                  const std::vector<RankingTask>& tasks, std::size_t k, std::size_t repeats);

}  // namespace coderec
