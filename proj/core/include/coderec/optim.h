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
#include <random>
#include <vector>

#include "coderec/tape.h"

namespace coderec {

// Glorot uniform: U(-b, b) with b = sqrt(6 / (rows + cols)).
template <typename T>
Tensor<T> xavier_uniform(std::size_t rows, std::size_t cols, std::mt19937_64& rng);

template <typename T>
Tensor<T> xavier_uniform(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return xavier_uniform<T>(rows, cols, rng);
}

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Moment estimates for one ParameterStore, aligned with its insertion order.
template <typename T>
struct AdamState {
  std::vector<Tensor<T>> m;
  std::vector<Tensor<T>> v;
  std::uint64_t step = 0;
};

// One bias-corrected Adam update of every parameter from its current grad.
template <typename T>
void adam_step(ParameterStore<T>& params, AdamState<T>& state, double lr, const AdamConfig& cfg = {});

}  // namespace coderec
