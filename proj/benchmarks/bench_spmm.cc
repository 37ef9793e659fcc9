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

#include <benchmark/benchmark.h>

#include <random>

#include "coderec/behavior.h"
#include "coderec/dataset.h"
#include "coderec/synthetic.h"

namespace coderec {
namespace {

SparseMatrix<float> file_graph(std::size_t users) {
  SyntheticConfig c;
  c.users = users;
  c.repos = 20;
  c.groups = 10;
  const auto ds = make_synthetic_dataset(c);
  const auto split = split_by_time(ds.records, kDefaultTrainEnd, kDefaultValEnd);
  const auto m = build_interaction_matrices(split, ds.num_users(), ds.num_files(), ds.num_repos());
  return normalize_adjacency<float>(m.y);
}

TensorF random_rows(std::size_t rows, std::size_t d) {
  std::mt19937_64 rng(1);
  std::normal_distribution<float> n(0.0f, 0.1f);
  TensorF t(rows, d);
  for (auto& v : t.values()) v = n(rng);
  return t;
}

void BM_Spmm(benchmark::State& state) {
  const auto adj = file_graph(static_cast<std::size_t>(state.range(0)));
  const auto e = random_rows(adj.rows(), static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(adj.multiply(e));
  state.counters["nnz"] = static_cast<double>(adj.nnz());
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(adj.nnz()));
}
BENCHMARK(BM_Spmm)->Args({200, 32})->Args({2000, 32})->Args({2000, 64});

void BM_Propagate(benchmark::State& state) {
  const auto adj = file_graph(static_cast<std::size_t>(state.range(0)));
  const auto e = random_rows(adj.rows(), 32);
  for (auto _ : state) benchmark::DoNotOptimize(pool_layers(propagate(e, adj, static_cast<int>(state.range(1)))));
}
BENCHMARK(BM_Propagate)->Args({2000, 1})->Args({2000, 4});

void BM_NormalizeAdjacency(benchmark::State& state) {
  SyntheticConfig c;
  c.users = static_cast<std::size_t>(state.range(0));
  const auto ds = make_synthetic_dataset(c);
  const auto split = split_by_time(ds.records, kDefaultTrainEnd, kDefaultValEnd);
  const auto m = build_interaction_matrices(split, ds.num_users(), ds.num_files(), ds.num_repos());
  for (auto _ : state) benchmark::DoNotOptimize(normalize_adjacency<float>(m.y));
}
BENCHMARK(BM_NormalizeAdjacency)->Arg(2000);

}  // namespace
}  // namespace coderec

BENCHMARK_MAIN();
