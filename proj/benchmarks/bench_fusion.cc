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

#include "coderec/ops.h"
#include "coderec/semantics.h"

namespace coderec {
namespace {

TensorF random_rows(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  std::normal_distribution<float> n(0.0f, 0.1f);
  TensorF t(rows, cols);
  for (auto& v : t.values()) v = n(rng);
  return t;
}

// Co-attention over a batch of files: N_C = 8 segments, N_Q = 4 users.
void BM_CoattentionForward(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  const auto d = static_cast<std::size_t>(state.range(1));
  std::mt19937_64 rng(3);
  const auto c = random_rows(batch * 8, d, rng);
  const auto q = random_rows(batch * 4, d, rng);
  const auto w_o = random_rows(d, d, rng), w_c = random_rows(d, d, rng), w_q = random_rows(d, d, rng);
  const auto w_h = random_rows(d, 1, rng);
  for (auto _ : state) {
    Tape<float> tape;
    auto out = coattention_fuse(tape.constant(c), tape.constant(q),
                                {tape.constant(w_o), tape.constant(w_c), tape.constant(w_q), tape.constant(w_h)}, batch);
    benchmark::DoNotOptimize(out.h.value());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(batch));
}
BENCHMARK(BM_CoattentionForward)->Args({1, 32})->Args({200, 32})->Args({200, 64});

void BM_CoattentionBackward(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  const std::size_t d = 32;
  std::mt19937_64 rng(4);
  const auto c = random_rows(batch * 8, d, rng);
  const auto q = random_rows(batch * 4, d, rng);
  const auto w_o = random_rows(d, d, rng), w_c = random_rows(d, d, rng), w_q = random_rows(d, d, rng);
  const auto w_h = random_rows(d, 1, rng);
  ParameterStore<float> store;
  auto& po = store.add("w_o", w_o);
  auto& pc = store.add("w_c", w_c);
  auto& pq = store.add("w_q", w_q);
  auto& ph = store.add("w_h", w_h);
  for (auto _ : state) {
    store.zero_grad();
    Tape<float> tape;
    auto out = coattention_fuse(tape.constant(c), tape.constant(q),
                                {tape.param(po), tape.param(pc), tape.param(pq), tape.param(ph)}, batch);
    tape.backward(ad::sum(out.h));
    benchmark::DoNotOptimize(po.grad);
  }
}
BENCHMARK(BM_CoattentionBackward)->Arg(200);

}  // namespace
}  // namespace coderec

BENCHMARK_MAIN();
