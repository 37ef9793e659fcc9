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

#include <string_view>
#include <vector>

#include "coderec/trainer.h"

namespace coderec {

struct RunResult {
  TrainedModel model;
  MetricReport report;
};

// Trains one model, selecting epochs on protocol p over the validation
// interactions, and evaluates it under p on the test interactions.
RunResult run_model(ModelKind kind, const TrainingData& data, const Hyperparams& hyper, const AblationFlags& flags,
                    Protocol p, const std::vector<std::size_t>& ks, std::uint64_t seed);

// "MF" or "LightGCN", any case. Anything else is an ArgumentError.
ModelKind parse_baseline(std::string_view name);

MetricReport run_baseline(std::string_view name, const TrainingData& data, const Hyperparams& hyper, Protocol p,
                          const std::vector<std::size_t>& ks, std::uint64_t seed);

}  // namespace coderec
