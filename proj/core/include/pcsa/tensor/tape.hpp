/*
 * Copyright 2026 The PCSA Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pcsa/tensor/volume.hpp"

namespace pcsa {

using NodeId = std::size_t;

/// Trainable tensor with its accumulated gradient. Names are dotted paths such
/// as "generator.pcca1.k7.weight".
template <typename T>
struct Parameter {
  std::string name;
  Volume<T> value;
  Volume<T> grad;

  Parameter() = default;
  Parameter(std::string n, Volume<T> v)
      : name(std::move(n)), value(std::move(v)), grad(value.shape()) {}

  void zero_grad() { std::fill(grad.data().begin(), grad.data().end(), T(0)); }
};

template <typename T>
class Tape;

/// Handle to a node on a Tape. Cheap to copy; only valid while its tape lives.
template <typename T>
class Var {
 public:
  Var() = default;
  Var(Tape<T>* tape, NodeId id) : tape_(tape), id_(id) {}

  Tape<T>& tape() const { return *tape_; }
  NodeId id() const { return id_; }
  const Volume<T>& value() const;
  const Shape& shape() const { return value().shape(); }
  bool requires_grad() const;

 private:
  Tape<T>* tape_ = nullptr;
  NodeId id_ = 0;
};

/// Reverse-mode record. Nodes are appended in evaluation order, so parents
/// always precede children; backward() walks the list in reverse.
template <typename T>
class Tape {
 public:
  /// Called during backward with the tape and the node whose gradient is
  /// complete; accumulates into parents through grad_mut().
  using BackwardFn = std::function<void(Tape&, NodeId)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var<T> constant(Volume<T> v) { return push("constant", std::move(v), {}, nullptr, false, nullptr); }
  Var<T> variable(Volume<T> v) { return push("variable", std::move(v), {}, nullptr, true, nullptr); }

  /// Binds a parameter. Trainable bindings flush their gradient into
  /// Parameter::grad at the end of backward(); frozen bindings are constants.
  Var<T> parameter(Parameter<T>& p, bool trainable = true) {
    return push("parameter", p.value, {}, nullptr, trainable, trainable ? &p : nullptr);
  }

  Var<T> record(std::string_view op, Volume<T> value, std::vector<NodeId> parents, BackwardFn fn) {
    bool needs = false;
    for (NodeId p : parents) needs = needs || nodes_[p].requires_grad;
    if (!needs) return push(op, std::move(value), {}, nullptr, false, nullptr);
    return push(op, std::move(value), std::move(parents), std::move(fn), true, nullptr);
  }

  const Volume<T>& value(NodeId id) const { return nodes_.at(id).value; }
  bool requires_grad(NodeId id) const { return nodes_.at(id).requires_grad; }
  std::string_view op_name(NodeId id) const { return nodes_.at(id).op; }
  const std::vector<NodeId>& parents(NodeId id) const { return nodes_.at(id).parents; }
  std::size_t size() const { return nodes_.size(); }

  /// Gradient buffer for a node, allocated zeroed on first use.
  Volume<T>& grad_mut(NodeId id) {
    auto& n = nodes_.at(id);
    if (!n.grad) n.grad.emplace(n.value.shape());
    return *n.grad;
  }
  const Volume<T>* grad(NodeId id) const {
    const auto& n = nodes_.at(id);
    return n.grad ? &*n.grad : nullptr;
  }
  const Volume<T>* grad(const Var<T>& v) const { return grad(v.id()); }

  void backward(const Var<T>& loss) {
    const NodeId root = loss.id();
    if (value(root).size() != 1) {
      throw ShapeError("backward: loss must be scalar, got " + value(root).shape().str());
    }
    if (!requires_grad(root)) return;
    grad_mut(root)[0] = T(1);
    for (NodeId id = root + 1; id-- > 0;) {
      auto& n = nodes_[id];
      if (!n.requires_grad || !n.grad) continue;
      if (n.backward) n.backward(*this, id);
      if (n.param) {
        auto dst = n.param->grad.data();
        auto src = n.grad->data();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
      }
    }
  }

 private:
  struct Node {
    std::string_view op;
    Volume<T> value;
    std::vector<NodeId> parents;
    BackwardFn backward;
    bool requires_grad = false;
    Parameter<T>* param = nullptr;
    std::optional<Volume<T>> grad;
  };

  Var<T> push(std::string_view op, Volume<T> v, std::vector<NodeId> parents, BackwardFn fn,
              bool rg, Parameter<T>* p) {
    nodes_.push_back(Node{op, std::move(v), std::move(parents), std::move(fn), rg, p, std::nullopt});
    return Var<T>(this, nodes_.size() - 1);
  }

  // deque keeps value references stable while ops append nodes.
  std::deque<Node> nodes_;
};

template <typename T>
const Volume<T>& Var<T>::value() const {
  return tape_->value(id_);
}
template <typename T>
bool Var<T>::requires_grad() const {
  return tape_->requires_grad(id_);
}

}  // namespace pcsa
