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
#include <optional>
#include <span>
#include <vector>

namespace coderec {

struct RankingMetrics {
  double ndcg = 0.0;
  double hit = 0.0;
  double mrr = 0.0;
  double recall = 0.0;
};

// Binary-gain metrics of `ranked` cut at k. `relevant` must be sorted.
// Returns nullopt for an empty relevant set. Duplicate items in `ranked` are
// an ArgumentError.
std::optional<RankingMetrics> compute_ranking_metrics(std::span<const std::uint32_t> ranked,
                                                      std::span<const std::uint32_t> relevant, std::size_t k);

// The k best candidates by score, descending; ties go to the smaller id.
// scores is indexed by item id.
std::vector<std::uint32_t> top_k(std::span<const float> scores, std::span<const std::uint32_t> candidates,
                                 std::size_t k);

}  // namespace coderec
