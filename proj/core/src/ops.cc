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

#include "coderec/ops.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "coderec/kernels.h"

namespace coderec::ad {
namespace {

template <typename T>
Tape<T>& tape_of(Var<T> a, Var<T> b) {
  if (a.tape != b.tape) throw ArgumentError("operands recorded on different tapes");
  return *a.tape;
}

template <typename T>
void require_same_shape(const char* op, const Tensor<T>& a, const Tensor<T>& b) {
  if (!a.same_shape(b)) {
    throw ArgumentError(std::string(op) + " shape mismatch: " + a.shape_str() + " vs " + b.shape_str());
  }
}

template <typename T>
void check_offsets(const char* op, const std::vector<std::size_t>& offsets, std::size_t rows) {
  if (offsets.empty() || offsets.front() != 0 || offsets.back() != rows) {
    throw ArgumentError(std::string(op) + ": segment offsets do not cover " + std::to_string(rows) + " rows");
  }
  for (std::size_t s = 0; s + 1 < offsets.size(); ++s) {
    if (offsets[s] > offsets[s + 1]) throw ArgumentError(std::string(op) + ": offsets not monotone");
  }
}

// Elementwise unary op given y = f(x) and dy/dx as a function of (x, y).
template <typename T, typename F, typename D>
Var<T> unary(Var<T> a, F f, D dfdx) {
  const Tensor<T>& x = a.value();
  Tensor<T> y(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = f(x[i]);
  return a.tape->record(y, {a}, [a, dfdx](Tape<T>& t, const Tensor<T>& g) {
    const Tensor<T>& xv = t.value(a.id);
    Tensor<T> gx(xv.rows(), xv.cols());
    for (std::size_t i = 0; i < xv.size(); ++i) gx[i] = g[i] * dfdx(xv[i]);
    t.accumulate(a, gx);
  });
}

}  // namespace

template <typename T>
Var<T> matmul(Var<T> a, Var<T> b) {
  auto& t = tape_of(a, b);
  Tensor<T> out = kernels::matmul(a.value(), b.value());
  return t.record(std::move(out), {a, b}, [a, b](Tape<T>& tp, const Tensor<T>& g) {
    if (tp.requires_grad(a)) tp.accumulate(a, kernels::matmul_nt(g, tp.value(b.id)));
    if (tp.requires_grad(b)) tp.accumulate(b, kernels::matmul_tn(tp.value(a.id), g));
  });
}

template <typename T>
Var<T> matmul_nt(Var<T> a, Var<T> b) {
  auto& t = tape_of(a, b);
  Tensor<T> out = kernels::matmul_nt(a.value(), b.value());
  return t.record(std::move(out), {a, b}, [a, b](Tape<T>& tp, const Tensor<T>& g) {
    if (tp.requires_grad(a)) tp.accumulate(a, kernels::matmul(g, tp.value(b.id)));
    if (tp.requires_grad(b)) tp.accumulate(b, kernels::matmul_tn(g, tp.value(a.id)));
  });
}

template <typename T>
Var<T> transpose(Var<T> a) {
  return a.tape->record(kernels::transpose(a.value()), {a}, [a](Tape<T>& tp, const Tensor<T>& g) {
    tp.accumulate(a, kernels::transpose(g));
  });
}

template <typename T>
Var<T> batched_matmul(Var<T> a, Var<T> b, std::size_t batch, bool transpose_b) {
  auto& t = tape_of(a, b);
  const Tensor<T>& av = a.value();
  const Tensor<T>& bv = b.value();
  if (batch == 0 || av.rows() % batch != 0 || bv.rows() % batch != 0) {
    throw ArgumentError("batched_matmul: batch " + std::to_string(batch) + " does not divide " +
                        av.shape_str() + " and " + bv.shape_str());
  }
  const std::size_t m = av.rows() / batch;
  const std::size_t k = av.cols();
  const std::size_t brows = bv.rows() / batch;
  if (transpose_b ? bv.cols() != k : brows != k) {
    throw ArgumentError("batched_matmul shape mismatch: " + av.shape_str() + " x " + bv.shape_str() +
                        (transpose_b ? "^T" : "") + " over " + std::to_string(batch) + " blocks");
  }
  const std::size_t n = transpose_b ? brows : bv.cols();
  Tensor<T> out(batch * m, n);
  std::vector<T> bt(k * n);
  for (std::size_t blk = 0; blk < batch; ++blk) {
    const T* bb = bv.data() + blk * brows * bv.cols();
    if (transpose_b) {
      for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t p = 0; p < k; ++p) bt[p * n + j] = bb[j * k + p];
      }
      bb = bt.data();
    }
    for (std::size_t i = 0; i < m; ++i) {
      const T* ar = av.data() + (blk * m + i) * k;
      T* o = out.data() + (blk * m + i) * n;
      for (std::size_t p = 0; p < k; ++p) {
        const T x = ar[p];
        const T* br = bb + p * n;
        for (std::size_t j = 0; j < n; ++j) o[j] += x * br[j];
      }
    }
  }
  return t.record(std::move(out), {a, b}, [a, b, batch, m, k, n, brows, transpose_b](Tape<T>& tp, const Tensor<T>& g) {
    const Tensor<T>& av = tp.value(a.id);
    const Tensor<T>& bv = tp.value(b.id);
    const bool need_a = tp.requires_grad(a);
    const bool need_b = tp.requires_grad(b);
    Tensor<T> ga(need_a ? av.rows() : 0, need_a ? av.cols() : 0);
    Tensor<T> gb(need_b ? bv.rows() : 0, need_b ? bv.cols() : 0);
    for (std::size_t blk = 0; blk < batch; ++blk) {
      for (std::size_t i = 0; i < m; ++i) {
        const std::size_t ar = blk * m + i;
        for (std::size_t j = 0; j < n; ++j) {
          const T gij = g(ar, j);
          if (gij == T{0}) continue;
          for (std::size_t p = 0; p < k; ++p) {
            if (transpose_b) {
              const std::size_t br = blk * brows + j;
              if (need_a) ga(ar, p) += gij * bv(br, p);
              if (need_b) gb(br, p) += gij * av(ar, p);
            } else {
              const std::size_t br = blk * brows + p;
              if (need_a) ga(ar, p) += gij * bv(br, j);
              if (need_b) gb(br, j) += gij * av(ar, p);
            }
          }
        }
      }
    }
    if (need_a) tp.accumulate(a, ga);
    if (need_b) tp.accumulate(b, gb);
  });
}

template <typename T>
Var<T> spmm(const SparseMatrix<T>& m, Var<T> x) {
  const SparseMatrix<T>* mp = &m;
  return x.tape->record(m.multiply(x.value()), {x}, [mp, x](Tape<T>& tp, const Tensor<T>& g) {
    tp.accumulate(x, mp->transpose_multiply(g));
  });
}

template <typename T>
Var<T> add(Var<T> a, Var<T> b) {
  auto& t = tape_of(a, b);
  require_same_shape("add", a.value(), b.value());
  Tensor<T> out = a.value();
  out += b.value();
  return t.record(std::move(out), {a, b}, [a, b](Tape<T>& tp, const Tensor<T>& g) {
    tp.accumulate(a, g);
    tp.accumulate(b, g);
  });
}

template <typename T>
Var<T> sub(Var<T> a, Var<T> b) {
  auto& t = tape_of(a, b);
  require_same_shape("sub", a.value(), b.value());
  Tensor<T> out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b.value()[i];
  return t.record(std::move(out), {a, b}, [a, b](Tape<T>& tp, const Tensor<T>& g) {
    tp.accumulate(a, g);
    if (tp.requires_grad(b)) {
      Tensor<T> neg = g;
      for (std::size_t i = 0; i < neg.size(); ++i) neg[i] = -neg[i];
      tp.accumulate(b, neg);
    }
  });
}

template <typename T>
Var<T> mul(Var<T> a, Var<T> b) {
  auto& t = tape_of(a, b);
  require_same_shape("mul", a.value(), b.value());
  Tensor<T> out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  return t.record(std::move(out), {a, b}, [a, b](Tape<T>& tp, const Tensor<T>& g) {
    const Tensor<T>& av = tp.value(a.id);
    const Tensor<T>& bv = tp.value(b.id);
    if (tp.requires_grad(a)) {
      Tensor<T> ga = g;
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] *= bv[i];
      tp.accumulate(a, ga);
    }
    if (tp.requires_grad(b)) {
      Tensor<T> gb = g;
      for (std::size_t i = 0; i < gb.size(); ++i) gb[i] *= av[i];
      tp.accumulate(b, gb);
    }
  });
}

template <typename T>
Var<T> scale(Var<T> a, T s) {
  Tensor<T> out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= s;
  return a.tape->record(std::move(out), {a}, [a, s](Tape<T>& tp, const Tensor<T>& g) {
    Tensor<T> ga = g;
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] *= s;
    tp.accumulate(a, ga);
  });
}

template <typename T>
Var<T> add_row(Var<T> a, Var<T> bias) {
  auto& t = tape_of(a, bias);
  const Tensor<T>& av = a.value();
  const Tensor<T>& bv = bias.value();
  if (bv.rows() != 1 || bv.cols() != av.cols()) {
    throw ArgumentError("add_row shape mismatch: " + av.shape_str() + " + " + bv.shape_str());
  }
  Tensor<T> out = av;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) += bv[c];
  }
  return t.record(std::move(out), {a, bias}, [a, bias](Tape<T>& tp, const Tensor<T>& g) {
    tp.accumulate(a, g);
    if (tp.requires_grad(bias)) {
      Tensor<T> gb(1, g.cols());
      for (std::size_t r = 0; r < g.rows(); ++r) {
        for (std::size_t c = 0; c < g.cols(); ++c) gb[c] += g(r, c);
      }
      tp.accumulate(bias, gb);
    }
  });
}

template <typename T>
Var<T> scale_rows(Var<T> x, Var<T> w) {
  auto& t = tape_of(x, w);
  const Tensor<T>& xv = x.value();
  const Tensor<T>& wv = w.value();
  if (wv.cols() != 1 || wv.rows() != xv.rows()) {
    throw ArgumentError("scale_rows shape mismatch: " + xv.shape_str() + " by " + wv.shape_str());
  }
  Tensor<T> out = xv;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    for (auto& v : out.row(r)) v *= wv[r];
  }
  return t.record(std::move(out), {x, w}, [x, w](Tape<T>& tp, const Tensor<T>& g) {
    const Tensor<T>& xv = tp.value(x.id);
    const Tensor<T>& wv = tp.value(w.id);
    if (tp.requires_grad(x)) {
      Tensor<T> gx = g;
      for (std::size_t r = 0; r < gx.rows(); ++r) {
        for (auto& v : gx.row(r)) v *= wv[r];
      }
      tp.accumulate(x, gx);
    }
    if (tp.requires_grad(w)) {
      Tensor<T> gw(wv.rows(), 1);
      for (std::size_t r = 0; r < xv.rows(); ++r) gw[r] = kernels::dot<T>(g.row(r), xv.row(r));
      tp.accumulate(w, gw);
    }
  });
}

template <typename T>
Var<T> tanh(Var<T> a) {
  return unary<T>(a, [](T x) { return std::tanh(x); },
                  [](T x) {
                    const T y = std::tanh(x);
                    return T{1} - y * y;
                  });
}

template <typename T>
T stable_sigmoid(T x) {
  if (x >= T{0}) return T{1} / (T{1} + std::exp(-x));
  const T e = std::exp(x);
  return e / (T{1} + e);
}

template <typename T>
Var<T> sigmoid(Var<T> a) {
  return unary<T>(a, [](T x) { return stable_sigmoid(x); },
                  [](T x) {
                    const T s = stable_sigmoid(x);
                    return s * (T{1} - s);
                  });
}

template <typename T>
Var<T> log_sigmoid(Var<T> a) {
  return unary<T>(a, [](T x) { return std::min(x, T{0}) - std::log1p(std::exp(-std::abs(x))); },
                  [](T x) { return stable_sigmoid(-x); });
}

template <typename T>
Var<T> leaky_relu(Var<T> a, T slope) {
  return unary<T>(a, [slope](T x) { return x > T{0} ? x : slope * x; },
                  [slope](T x) { return x > T{0} ? T{1} : slope; });
}

template <typename T>
Var<T> elu(Var<T> a) {
  return unary<T>(a, [](T x) { return x > T{0} ? x : std::expm1(x); },
                  [](T x) { return x > T{0} ? T{1} : std::exp(x); });
}

template <typename T>
Var<T> softmax_rows(Var<T> a) {
  const Tensor<T>& x = a.value();
  Tensor<T> y(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto in = x.row(r);
    auto out = y.row(r);
    if (in.empty()) continue;
    const T mx = *std::max_element(in.begin(), in.end());
    T z{0};
    for (std::size_t c = 0; c < in.size(); ++c) z += (out[c] = std::exp(in[c] - mx));
    for (auto& v : out) v /= z;
  }
  Tensor<T> saved = y;
  return a.tape->record(std::move(y), {a}, [a, saved](Tape<T>& tp, const Tensor<T>& g) {
    Tensor<T> gx(saved.rows(), saved.cols());
    for (std::size_t r = 0; r < saved.rows(); ++r) {
      const T inner = kernels::dot<T>(g.row(r), saved.row(r));
      for (std::size_t c = 0; c < saved.cols(); ++c) gx(r, c) = saved(r, c) * (g(r, c) - inner);
    }
    tp.accumulate(a, gx);
  });
}

template <typename T>
Var<T> logsumexp_rows(Var<T> a) {
  const Tensor<T>& x = a.value();
  if (x.cols() == 0) throw ArgumentError("logsumexp_rows on zero columns " + x.shape_str());
  Tensor<T> y(x.rows(), 1);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto in = x.row(r);
    const T mx = *std::max_element(in.begin(), in.end());
    T z{0};
    for (T v : in) z += std::exp(v - mx);
    y[r] = mx + std::log(z);
  }
  Tensor<T> lse = y;
  return a.tape->record(std::move(y), {a}, [a, lse](Tape<T>& tp, const Tensor<T>& g) {
    const Tensor<T>& xv = tp.value(a.id);
    Tensor<T> gx(xv.rows(), xv.cols());
    for (std::size_t r = 0; r < xv.rows(); ++r) {
      for (std::size_t c = 0; c < xv.cols(); ++c) gx(r, c) = g[r] * std::exp(xv(r, c) - lse[r]);
    }
    tp.accumulate(a, gx);
  });
}

template <typename T>
Var<T> segment_softmax(Var<T> x, const std::vector<std::size_t>& offsets) {
  const Tensor<T>& xv = x.value();
  if (xv.cols() != 1) throw ArgumentError("segment_softmax expects a column vector, got " + xv.shape_str());
  check_offsets<T>("segment_softmax", offsets, xv.rows());
  Tensor<T> y(xv.rows(), 1);
  for (std::size_t s = 0; s + 1 < offsets.size(); ++s) {
    const std::size_t lo = offsets[s], hi = offsets[s + 1];
    if (lo == hi) continue;
    T mx = -std::numeric_limits<T>::infinity();
    for (std::size_t e = lo; e < hi; ++e) mx = std::max(mx, xv[e]);
    T z{0};
    for (std::size_t e = lo; e < hi; ++e) z += (y[e] = std::exp(xv[e] - mx));
    for (std::size_t e = lo; e < hi; ++e) y[e] /= z;
  }
  Tensor<T> saved = y;
  return x.tape->record(std::move(y), {x}, [x, saved, offsets](Tape<T>& tp, const Tensor<T>& g) {
    Tensor<T> gx(saved.rows(), 1);
    for (std::size_t s = 0; s + 1 < offsets.size(); ++s) {
      T inner{0};
      for (std::size_t e = offsets[s]; e < offsets[s + 1]; ++e) inner += g[e] * saved[e];
      for (std::size_t e = offsets[s]; e < offsets[s + 1]; ++e) gx[e] = saved[e] * (g[e] - inner);
    }
    tp.accumulate(x, gx);
  });
}

template <typename T>
Var<T> segment_sum(Var<T> x, const std::vector<std::size_t>& offsets) {
  const Tensor<T>& xv = x.value();
  check_offsets<T>("segment_sum", offsets, xv.rows());
  const std::size_t segs = offsets.size() - 1;
  Tensor<T> y(segs, xv.cols());
  for (std::size_t s = 0; s < segs; ++s) {
    auto out = y.row(s);
    for (std::size_t e = offsets[s]; e < offsets[s + 1]; ++e) {
      auto in = xv.row(e);
      for (std::size_t c = 0; c < out.size(); ++c) out[c] += in[c];
    }
  }
  return x.tape->record(std::move(y), {x}, [x, offsets](Tape<T>& tp, const Tensor<T>& g) {
    const Tensor<T>& xv = tp.value(x.id);
    Tensor<T> gx(xv.rows(), xv.cols());
    for (std::size_t s = 0; s + 1 < offsets.size(); ++s) {
      for (std::size_t e = offsets[s]; e < offsets[s + 1]; ++e) {
        std::copy(g.row(s).begin(), g.row(s).end(), gx.row(e).begin());
      }
    }
    tp.accumulate(x, gx);
  });
}

template <typename T>
Var<T> concat_cols(const std::vector<Var<T>>& parts) {
  if (parts.empty()) throw ArgumentError("concat_cols of nothing");
  const std::size_t rows = parts.front().rows();
  std::size_t cols = 0;
  for (const auto& p : parts) {
    if (p.tape != parts.front().tape) throw ArgumentError("operands recorded on different tapes");
    if (p.rows() != rows) {
      throw ArgumentError("concat_cols shape mismatch: " + parts.front().value().shape_str() + " vs " +
                          p.value().shape_str());
    }
    cols += p.cols();
  }
  Tensor<T> out(rows, cols);
  std::size_t off = 0;
  for (const auto& p : parts) {
    const Tensor<T>& v = p.value();
    for (std::size_t r = 0; r < rows; ++r) std::copy(v.row(r).begin(), v.row(r).end(), out.row(r).begin() + off);
    off += v.cols();
  }
  return parts.front().tape->record(std::move(out), parts, [parts](Tape<T>& tp, const Tensor<T>& g) {
    std::size_t off = 0;
    for (const auto& p : parts) {
      const std::size_t c = tp.value(p.id).cols();
      if (tp.requires_grad(p)) {
        Tensor<T> gp(g.rows(), c);
        for (std::size_t r = 0; r < g.rows(); ++r) {
          std::copy(g.row(r).begin() + off, g.row(r).begin() + off + c, gp.row(r).begin());
        }
        tp.accumulate(p, gp);
      }
      off += c;
    }
  });
}

template <typename T>
Var<T> vstack(const std::vector<Var<T>>& parts) {
  if (parts.empty()) throw ArgumentError("vstack of nothing");
  const std::size_t cols = parts.front().cols();
  std::size_t rows = 0;
  for (const auto& p : parts) {
    if (p.tape != parts.front().tape) throw ArgumentError("operands recorded on different tapes");
    if (p.cols() != cols) {
      throw ArgumentError("vstack shape mismatch: " + parts.front().value().shape_str() + " vs " +
                          p.value().shape_str());
    }
    rows += p.rows();
  }
  Tensor<T> out(rows, cols);
  std::size_t off = 0;
  for (const auto& p : parts) {
    std::copy(p.value().values().begin(), p.value().values().end(), out.data() + off * cols);
    off += p.rows();
  }
  return parts.front().tape->record(std::move(out), parts, [parts](Tape<T>& tp, const Tensor<T>& g) {
    std::size_t off = 0;
    for (const auto& p : parts) {
      const std::size_t r = tp.value(p.id).rows();
      if (tp.requires_grad(p)) {
        Tensor<T> gp(r, g.cols());
        std::copy(g.data() + off * g.cols(), g.data() + (off + r) * g.cols(), gp.data());
        tp.accumulate(p, gp);
      }
      off += r;
    }
  });
}

template <typename T>
Var<T> mean_over(const std::vector<Var<T>>& parts) {
  if (parts.empty()) throw ArgumentError("mean_over of nothing");
  Tensor<T> out(parts.front().rows(), parts.front().cols());
  for (const auto& p : parts) {
    if (p.tape != parts.front().tape) throw ArgumentError("operands recorded on different tapes");
    require_same_shape("mean_over", out, p.value());
    out += p.value();
  }
  const T inv = T{1} / static_cast<T>(parts.size());
  for (auto& v : out.values()) v *= inv;
  return parts.front().tape->record(std::move(out), parts, [parts, inv](Tape<T>& tp, const Tensor<T>& g) {
    Tensor<T> gp = g;
    for (auto& v : gp.values()) v *= inv;
    for (const auto& p : parts) tp.accumulate(p, gp);
  });
}

template <typename T>
Var<T> gather_rows(Var<T> x, const std::vector<std::uint32_t>& index) {
  const Tensor<T>& xv = x.value();
  Tensor<T> out(index.size(), xv.cols());
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] >= xv.rows()) {
      throw ArgumentError("gather_rows index " + std::to_string(index[i]) + " outside " + xv.shape_str());
    }
    std::copy(xv.row(index[i]).begin(), xv.row(index[i]).end(), out.row(i).begin());
  }
  return x.tape->record(std::move(out), {x}, [x, index](Tape<T>& tp, const Tensor<T>& g) {
    if (!tp.requires_grad(x)) return;
    Tensor<T>& gx = tp.grad_buffer(x.id);
    for (std::size_t i = 0; i < index.size(); ++i) {
      auto dst = gx.row(index[i]);
      auto src = g.row(i);
      for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += src[c];
    }
  });
}

template <typename T>
Var<T> l2_normalize_rows(Var<T> a) {
  constexpr T kEps = static_cast<T>(1e-12);
  const Tensor<T>& x = a.value();
  Tensor<T> y = x;
  Tensor<T> norms(x.rows(), 1);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    norms[r] = std::sqrt(kernels::dot<T>(x.row(r), x.row(r)));
    const T denom = std::max(norms[r], kEps);
    for (auto& v : y.row(r)) v /= denom;
  }
  Tensor<T> saved = y;
  return a.tape->record(std::move(y), {a}, [a, saved, norms](Tape<T>& tp, const Tensor<T>& g) {
    Tensor<T> gx(saved.rows(), saved.cols());
    for (std::size_t r = 0; r < saved.rows(); ++r) {
      if (norms[r] <= kEps) {
        for (std::size_t c = 0; c < saved.cols(); ++c) gx(r, c) = g(r, c) / kEps;
        continue;
      }
      const T inner = kernels::dot<T>(g.row(r), saved.row(r));
      for (std::size_t c = 0; c < saved.cols(); ++c) gx(r, c) = (g(r, c) - saved(r, c) * inner) / norms[r];
    }
    tp.accumulate(a, gx);
  });
}

template <typename T>
Var<T> row_dot(Var<T> a, Var<T> b) {
  auto& t = tape_of(a, b);
  require_same_shape("row_dot", a.value(), b.value());
  Tensor<T> out(a.rows(), 1);
  for (std::size_t r = 0; r < a.rows(); ++r) out[r] = kernels::dot<T>(a.value().row(r), b.value().row(r));
  return t.record(std::move(out), {a, b}, [a, b](Tape<T>& tp, const Tensor<T>& g) {
    const Tensor<T>& av = tp.value(a.id);
    const Tensor<T>& bv = tp.value(b.id);
    if (tp.requires_grad(a)) {
      Tensor<T> ga = bv;
      for (std::size_t r = 0; r < ga.rows(); ++r) {
        for (auto& v : ga.row(r)) v *= g[r];
      }
      tp.accumulate(a, ga);
    }
    if (tp.requires_grad(b)) {
      Tensor<T> gb = av;
      for (std::size_t r = 0; r < gb.rows(); ++r) {
        for (auto& v : gb.row(r)) v *= g[r];
      }
      tp.accumulate(b, gb);
    }
  });
}

template <typename T>
Var<T> sum(Var<T> a) {
  T s{0};
  for (T v : a.value().values()) s += v;
  return a.tape->record(Tensor<T>::scalar(s), {a}, [a](Tape<T>& tp, const Tensor<T>& g) {
    const Tensor<T>& av = tp.value(a.id);
    tp.accumulate(a, Tensor<T>(av.rows(), av.cols(), g[0]));
  });
}

template <typename T>
Var<T> mean(Var<T> a) {
  if (a.value().size() == 0) throw ArgumentError("mean of an empty tensor");
  return scale(sum(a), T{1} / static_cast<T>(a.value().size()));
}

template <typename T>
Var<T> norm2(Var<T> a) {
  const T n = std::sqrt(kernels::dot<T>(a.value().values(), a.value().values()));
  return a.tape->record(Tensor<T>::scalar(n), {a}, [a, n](Tape<T>& tp, const Tensor<T>& g) {
    if (n == T{0}) return;
    Tensor<T> ga = tp.value(a.id);
    for (auto& v : ga.values()) v *= g[0] / n;
    tp.accumulate(a, ga);
  });
}

template <typename T>
Var<T> global_norm(const std::vector<Var<T>>& parts) {
  if (parts.empty()) throw ArgumentError("global_norm of no tensors");
  T ss = 0;
  for (const auto& p : parts) ss += kernels::dot<T>(p.value().values(), p.value().values());
  const T n = std::sqrt(ss);
  return parts[0].tape->record(Tensor<T>::scalar(n), parts, [parts, n](Tape<T>& tp, const Tensor<T>& g) {
    if (n == T{0}) return;
    for (const auto& p : parts) {
      if (!tp.requires_grad(p)) continue;
      Tensor<T> gp = tp.value(p.id);
      for (auto& v : gp.values()) v *= g[0] / n;
      tp.accumulate(p, gp);
    }
  });
}

#define CODEREC_INSTANTIATE(T)                                                                  \
  template Var<T> matmul(Var<T>, Var<T>);                                                       \
  template Var<T> matmul_nt(Var<T>, Var<T>);                                                    \
  template Var<T> transpose(Var<T>);                                                            \
  template Var<T> batched_matmul(Var<T>, Var<T>, std::size_t, bool);                            \
  template Var<T> spmm(const SparseMatrix<T>&, Var<T>);                                         \
  template Var<T> add(Var<T>, Var<T>);                                                          \
  template Var<T> sub(Var<T>, Var<T>);                                                          \
  template Var<T> mul(Var<T>, Var<T>);                                                          \
  template Var<T> scale(Var<T>, T);                                                             \
  template Var<T> add_row(Var<T>, Var<T>);                                                      \
  template Var<T> scale_rows(Var<T>, Var<T>);                                                   \
  template Var<T> tanh(Var<T>);                                                                 \
  template Var<T> sigmoid(Var<T>);                                                              \
  template Var<T> log_sigmoid(Var<T>);                                                          \
  template Var<T> leaky_relu(Var<T>, T);                                                        \
  template Var<T> elu(Var<T>);                                                                  \
  template Var<T> softmax_rows(Var<T>);                                                         \
  template Var<T> logsumexp_rows(Var<T>);                                                       \
  template Var<T> segment_softmax(Var<T>, const std::vector<std::size_t>&);                     \
  template Var<T> segment_sum(Var<T>, const std::vector<std::size_t>&);                         \
  template Var<T> concat_cols(const std::vector<Var<T>>&);                                      \
  template Var<T> vstack(const std::vector<Var<T>>&);                                           \
  template Var<T> mean_over(const std::vector<Var<T>>&);                                        \
  template Var<T> gather_rows(Var<T>, const std::vector<std::uint32_t>&);                       \
  template Var<T> l2_normalize_rows(Var<T>);                                                    \
  template Var<T> row_dot(Var<T>, Var<T>);                                                      \
  template Var<T> sum(Var<T>);                                                                  \
  template Var<T> mean(Var<T>);                                                                 \
  template Var<T> norm2(Var<T>);                                                                \
  template Var<T> global_norm(const std::vector<Var<T>>&);
CODEREC_INSTANTIATE(float)
CODEREC_INSTANTIATE(double)
#undef CODEREC_INSTANTIATE

}  // namespace coderec::ad
