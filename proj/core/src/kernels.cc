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

#include "coderec/kernels.h"

namespace coderec::kernels {

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.cols() != b.rows()) {
    throw ArgumentError("matmul shape mismatch: " + a.shape_str() + " x " + b.shape_str());
  }
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  Tensor<T> out(m, n);
  const T* __restrict bd = b.data();
  for (std::size_t i = 0; i < m; ++i) {
    T* __restrict o = out.data() + i * n;
    const T* ar = a.data() + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const T av = ar[p];
      if (av == T{0}) continue;
      const T* __restrict br = bd + p * n;
      for (std::size_t j = 0; j < n; ++j) o[j] += av * br[j];
    }
  }
  return out;
}

template <typename T>
Tensor<T> matmul_nt(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.cols() != b.cols()) {
    throw ArgumentError("matmul_nt shape mismatch: " + a.shape_str() + " x " + b.shape_str() + "^T");
  }
  return matmul(a, transpose(b));
}

template <typename T>
Tensor<T> matmul_tn(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.rows() != b.rows()) {
    throw ArgumentError("matmul_tn shape mismatch: " + a.shape_str() + "^T x " + b.shape_str());
  }
  const std::size_t k = a.rows(), m = a.cols(), n = b.cols();
  Tensor<T> out(m, n);
  for (std::size_t p = 0; p < k; ++p) {
    const T* br = b.data() + p * n;
    for (std::size_t i = 0; i < m; ++i) {
      const T av = a(p, i);
      if (av == T{0}) continue;
      T* o = out.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) o[j] += av * br[j];
    }
  }
  return out;
}

template <typename T>
Tensor<T> transpose(const Tensor<T>& a) {
  Tensor<T> out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  }
  return out;
}

#define CODEREC_INSTANTIATE(T)                                      \
  template Tensor<T> matmul(const Tensor<T>&, const Tensor<T>&);    \
  template Tensor<T> matmul_nt(const Tensor<T>&, const Tensor<T>&); \
  template Tensor<T> matmul_tn(const Tensor<T>&, const Tensor<T>&); \
  template Tensor<T> transpose(const Tensor<T>&);
CODEREC_INSTANTIATE(float)
CODEREC_INSTANTIATE(double)
#undef CODEREC_INSTANTIATE

}  // namespace coderec::kernels
