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

#include "coderec/optim.h"

#include <cmath>

namespace coderec {

template <typename T>
Tensor<T> xavier_uniform(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Tensor<T> out(rows, cols);
  for (auto& v : out.values()) v = static_cast<T>(dist(rng));
  return out;
}

template <typename T>
void adam_step(ParameterStore<T>& params, AdamState<T>& state, double lr, const AdamConfig& cfg) {
  if (!(lr > 0.0)) throw ArgumentError("learning rate must be positive, got " + std::to_string(lr));
  if (state.m.size() != params.size()) {
    state.m.clear();
    state.v.clear();
    for (std::size_t i = 0; i < params.size(); ++i) {
      state.m.emplace_back(params[i].value.rows(), params[i].value.cols());
      state.v.emplace_back(params[i].value.rows(), params[i].value.cols());
    }
    state.step = 0;
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    auto& m = state.m[i];
    auto& v = state.v[i];
    for (std::size_t k = 0; k < p.value.size(); ++k) {
      const double g = p.grad[k];
      const double mk = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * g;
      const double vk = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * g * g;
      m[k] = static_cast<T>(mk);
      v[k] = static_cast<T>(vk);
      const double step = lr * (mk / c1) / (std::sqrt(vk / c2) + cfg.eps);
      p.value[k] = static_cast<T>(p.value[k] - step);
    }
  }
}

template Tensor<float> xavier_uniform(std::size_t, std::size_t, std::mt19937_64&);
template Tensor<double> xavier_uniform(std::size_t, std::size_t, std::mt19937_64&);
template void adam_step(ParameterStore<float>&, AdamState<float>&, double, const AdamConfig&);
template void adam_step(ParameterStore<double>&, AdamState<double>&, double, const AdamConfig&);

}  // namespace coderec
