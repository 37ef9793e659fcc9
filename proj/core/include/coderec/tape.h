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

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "coderec/tensor.h"

namespace coderec {

template <typename T>
class Tape;

// Handle to a value recorded on a tape.
template <typename T>
struct Var {
  Tape<T>* tape = nullptr;
  std::size_t id = 0;

  const Tensor<T>& value() const { return tape->value(id); }
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
};

template <typename T>
struct Parameter {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;

  void zero_grad() { grad = Tensor<T>(value.rows(), value.cols()); }
};

// Named trainable tensors with stable addresses, kept in insertion order.
template <typename T>
class ParameterStore {
 public:
  Parameter<T>& add(const std::string& name, Tensor<T> init) {
    if (index_.count(name)) throw ArgumentError("duplicate parameter '" + name + "'");
    index_[name] = params_.size();
    auto p = std::make_unique<Parameter<T>>();
    p->name = name;
    p->grad = Tensor<T>(init.rows(), init.cols());
    p->value = std::move(init);
    params_.push_back(std::move(p));
    return *params_.back();
  }

  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  Parameter<T>& get(const std::string& name) { return *params_.at(lookup(name)); }
  const Parameter<T>& get(const std::string& name) const { return *params_.at(lookup(name)); }

  std::size_t size() const { return params_.size(); }
  Parameter<T>& operator[](std::size_t i) { return *params_[i]; }
  const Parameter<T>& operator[](std::size_t i) const { return *params_[i]; }

  std::size_t element_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p->value.size();
    return n;
  }

  void zero_grad() {
    for (auto& p : params_) p->zero_grad();
  }

 private:
  std::size_t lookup(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw ArgumentError("unknown parameter '" + name + "'");
    return it->second;
  }

  std::vector<std::unique_ptr<Parameter<T>>> params_;
  std::map<std::string, std::size_t> index_;
};

// Append-only record of operations. Backward walks the records in reverse and
// accumulates gradients additively; parameter leaves receive their gradient in
// Parameter::grad.
template <typename T>
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, const Tensor<T>&)>;

  Var<T> constant(Tensor<T> value) { return push(std::move(value), false, nullptr, {}); }

  // Each parameter maps to a single leaf per tape.
  Var<T> param(Parameter<T>& p) {
    auto it = param_nodes_.find(&p);
    if (it != param_nodes_.end()) return {this, it->second};
    Var<T> v = push(p.value, true, &p, {});
    param_nodes_[&p] = v.id;
    return v;
  }

  Var<T> record(Tensor<T> value, std::initializer_list<Var<T>> inputs, BackwardFn fn) {
    return record(std::move(value), std::vector<Var<T>>(inputs), std::move(fn));
  }

  Var<T> record(Tensor<T> value, const std::vector<Var<T>>& inputs, BackwardFn fn) {
    bool needs = false;
    for (const auto& in : inputs) needs = needs || nodes_[in.id].requires_grad;
    return push(std::move(value), needs, nullptr, needs ? std::move(fn) : BackwardFn{});
  }

  const Tensor<T>& value(std::size_t id) const { return nodes_[id].value; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  bool requires_grad(Var<T> v) const { return nodes_[v.id].requires_grad; }

  // Zero-initialised on first use.
  Tensor<T>& grad_buffer(std::size_t id) {
    auto& n = nodes_[id];
    if (n.grad.empty() && !n.value.empty()) n.grad = Tensor<T>(n.value.rows(), n.value.cols());
    return n.grad;
  }

  void accumulate(Var<T> v, const Tensor<T>& g) {
    if (!nodes_[v.id].requires_grad) return;
    grad_buffer(v.id) += g;
  }

  const Tensor<T>& grad(Var<T> v) const { return nodes_[v.id].grad; }

  void backward(Var<T> loss) {
    if (nodes_.empty()) throw ArgumentError("backward on an empty tape");
    if (loss.tape != this || loss.id >= nodes_.size()) throw ArgumentError("loss is not on this tape");
    if (nodes_[loss.id].value.size() != 1) {
      throw ArgumentError("backward needs a scalar loss, got " + nodes_[loss.id].value.shape_str());
    }
    grad_buffer(loss.id).fill(T{1});
    for (std::size_t i = loss.id + 1; i-- > 0;) {
      auto& n = nodes_[i];
      if (!n.requires_grad || n.grad.empty()) continue;
      if (n.backward) {
        // The closure may append to other nodes' gradients only.
        Tensor<T> g = n.grad;
        n.backward(*this, g);
      }
      if (n.param) n.param->grad += n.grad;
    }
  }

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor<T> value;
    Tensor<T> grad;
    bool requires_grad = false;
    Parameter<T>* param = nullptr;
    BackwardFn backward;
  };

  Var<T> push(Tensor<T> value, bool requires_grad, Parameter<T>* param, BackwardFn fn) {
    nodes_.push_back(Node{std::move(value), {}, requires_grad, param, std::move(fn)});
    return {this, nodes_.size() - 1};
  }

  std::vector<Node> nodes_;
  std::map<const Parameter<T>*, std::size_t> param_nodes_;
};

}  // namespace coderec
