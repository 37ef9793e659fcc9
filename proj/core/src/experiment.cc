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

#include "coderec/experiment.h"

#include <algorithm>
#include <cctype>
#include <string>

#include "coderec/error.h"

namespace coderec {

RunResult run_model(ModelKind kind, const TrainingData& data, const Hyperparams& hyper, const AblationFlags& flags,
                    Protocol p, const std::vector<std::size_t>& ks, std::uint64_t seed) {
  TrainOptions opts;
  opts.seed = seed;
  opts.validation_protocol = p == Protocol::kCold ? Protocol::kIntra : p;
  RunResult out{train_model(kind, data, hyper, flags, opts), {}};
  out.report = evaluate_protocol(out.model.embed(data), data, p, ks);
  out.report.model = out.model.tag();
  return out;
}

ModelKind parse_baseline(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "mf") return ModelKind::kMF;
  if (lower == "lightgcn") return ModelKind::kLightGCN;
  throw ArgumentError("unknown baseline '" + std::string(name) + "'; expected MF or LightGCN");
}

MetricReport run_baseline(std::string_view name, const TrainingData& data, const Hyperparams& hyper, Protocol p,
                          const std::vector<std::size_t>& ks, std::uint64_t seed) {
  return run_model(parse_baseline(name), data, hyper, {}, p, ks, seed).report;
}

}  // namespace coderec
