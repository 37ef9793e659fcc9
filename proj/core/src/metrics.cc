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

#include "coderec/metrics.h"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "coderec/error.h"

namespace coderec {

std::optional<RankingMetrics> compute_ranking_metrics(std::span<const std::uint32_t> ranked,
                                                      std::span<const std::uint32_t> relevant, std::size_t k) {
  if (relevant.empty()) return std::nullopt;
  std::unordered_set<std::uint32_t> seen;
  for (auto item : ranked) {
    if (!seen.insert(item).second) throw ArgumentError("ranked list repeats item " + std::to_string(item));
  }
  RankingMetrics m;
  double dcg = 0.0;
  std::size_t hits = 0;
  const std::size_t cut = std::min(k, ranked.size());
  for (std::size_t r = 0; r < cut; ++r) {
    if (!std::binary_search(relevant.begin(), relevant.end(), ranked[r])) continue;
    dcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
    if (hits == 0) m.mrr = 1.0 / static_cast<double>(r + 1);
    ++hits;
  }
  double idcg = 0.0;
  for (std::size_t r = 0; r < std::min(k, relevant.size()); ++r) idcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
  m.ndcg = idcg > 0.0 ? dcg / idcg : 0.0;
  m.hit = hits > 0 ? 1.0 : 0.0;
  m.recall = static_cast<double>(hits) / static_cast<double>(relevant.size());
  return m;
}

std::vector<std::uint32_t> top_k(std::span<const float> scores, std::span<const std::uint32_t> candidates,
                                 std::size_t k) {
  std::vector<std::uint32_t> out(candidates.begin(), candidates.end());
  for (auto c : out) {
    if (c >= scores.size()) throw ArgumentError("candidate " + std::to_string(c) + " has no score");
  }
  auto better = [&](std::uint32_t a, std::uint32_t b) {
    return scores[a] != scores[b] ? scores[a] > scores[b] : a < b;
  };
  const std::size_t cut = std::min(k, out.size());
  std::partial_sort(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(cut), out.end(), better);
  out.resize(cut);
  return out;
}

}  // namespace coderec
