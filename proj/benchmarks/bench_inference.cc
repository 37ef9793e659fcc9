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

#include <memory>

#include "coderec/metrics.h"
#include "coderec/protocols.h"
#include "coderec/synthetic.h"
#include "coderec/trainer.h"

namespace coderec {
namespace {

struct Fixture {
  Dataset ds;
  DatasetSplit split;
  TrainingData data;
  std::vector<RankingTask> tasks;
};

const Fixture& fixture() {
  static const auto f = [] {
    auto out = std::make_unique<Fixture>();
    SyntheticConfig c;
    c.users = 200;
    c.repos = 20;
    c.groups = 10;
    out->ds = make_synthetic_dataset(c);
    out->split = split_by_time(out->ds.records, kDefaultTrainEnd, kDefaultValEnd);
    out->data = prepare_training_data(out->ds, out->split, Hyperparams{});
    out->tasks = build_tasks(out->data, out->data.test_y, Protocol::kIntra);
    return out;
  }();
  return *f;
}

TrainedModel& model(ModelKind kind) {
  static std::map<ModelKind, std::unique_ptr<TrainedModel>> cache;
  auto& m = cache[kind];
  if (!m) {
    Hyperparams h;
    h.max_epochs = 2;
    TrainOptions o;
    o.early_stopping = false;
    m = std::make_unique<TrainedModel>(train_model(kind, fixture().data, h, AblationFlags{}, o));
  }
  return *m;
}

// Snapshot once, then rank every intra task; reported per task.
void BM_Inference(benchmark::State& state) {
  const auto kind = static_cast<ModelKind>(state.range(0));
  auto& m = model(kind);
  const auto& f = fixture();
  std::vector<float> scores(f.data.num_files);
  for (auto _ : state) {
    const auto snap = m.embed(f.data);
    std::size_t sink = 0;
    for (const auto& t : f.tasks) {
      for (auto file : t.candidates) scores[file] = snap.score(t.user, file);
      sink += top_k(scores, t.candidates, 20).size();
    }
    benchmark::DoNotOptimize(sink);
  }
  state.SetLabel(std::string(to_string(kind)));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.tasks.size()));
}
BENCHMARK(BM_Inference)
    ->Arg(static_cast<int>(ModelKind::kMF))
    ->Arg(static_cast<int>(ModelKind::kLightGCN))
    ->Arg(static_cast<int>(ModelKind::kCoder))
    ->Unit(benchmark::kMillisecond);

void BM_ScoreOnly(benchmark::State& state) {
  const auto& f = fixture();
  const auto snap = model(ModelKind::kCoder).embed(f.data);
  std::vector<float> scores(f.data.num_files);
  for (auto _ : state) {
    std::size_t sink = 0;
    for (const auto& t : f.tasks) {
      for (auto file : t.candidates) scores[file] = snap.score(t.user, file);
      sink += top_k(scores, t.candidates, 20).size();
    }
    benchmark::DoNotOptimize(sink);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.tasks.size()));
}
BENCHMARK(BM_ScoreOnly);

}  // namespace
}  // namespace coderec

BENCHMARK_MAIN();
