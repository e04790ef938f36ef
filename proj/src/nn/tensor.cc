// Copyright 2026 The omniqa Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "omniqa/nn/tensor.h"

#include <unordered_set>

#include "omniqa/error.h"

namespace omniqa::nn {

std::size_t shape_numel(const Shape& s) {
  std::size_t n = 1;
  for (int d : s) {
    if (d < 0) throw ShapeError("negative tensor extent in " + shape_string(s));
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

std::string shape_string(const Shape& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  return out + "]";
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  return full(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  auto node = std::make_shared<Node>();
  node->value.assign(shape_numel(shape), value);
  node->shape = std::move(shape);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::from(Shape shape, std::vector<double> values, bool requires_grad) {
  if (shape_numel(shape) != values.size()) {
    throw ShapeError("tensor data length " + std::to_string(values.size()) +
                     " does not match shape " + shape_string(shape));
  }
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(values);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

double Tensor::item() const {
  if (numel() != 1) {
    throw ShapeError("item() on tensor of shape " + shape_string(shape()));
  }
  return node_->value[0];
}

std::span<const double> Tensor::grad() const {
  if (node_->grad.size() != node_->value.size()) {
    node_->grad.assign(node_->value.size(), 0.0);
  }
  return node_->grad;
}

void Tensor::zero_grad() { node_->grad.assign(node_->value.size(), 0.0); }

void Tensor::backward() const {
  if (numel() != 1) {
    throw ShapeError("backward() needs a one-element tensor, got " +
                     shape_string(shape()));
  }
  if (!node_->requires_grad) return;
  // Iterative post-order DFS for a topological order.
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack{{node_.get(), 0}};
  seen.insert(node_.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* p = node->parents[next++].get();
      if (p->requires_grad && seen.insert(p).second) stack.push_back({p, 0});
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  for (Node* n : order) {
    if (n->backward) {
      n->grad.assign(n->value.size(), 0.0);
    } else if (n->grad.size() != n->value.size()) {
      n->grad.assign(n->value.size(), 0.0);
    }
  }
  node_->grad[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if ((*it)->backward) (*it)->backward((*it)->grad);
  }
}

Tensor Tensor::detach() const {
  return from(shape(), node_->value, false);
}

Tensor Tensor::clone() const {
  Tensor t = from(shape(), node_->value, node_->requires_grad);
  return t;
}

namespace {
thread_local bool g_grad_enabled = true;
}  // namespace

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }
bool grad_enabled() { return g_grad_enabled; }

Tensor make_result(Shape shape, std::vector<double> value,
                   const std::vector<const Tensor*>& inputs,
                   BackwardFn backward) {
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  if (g_grad_enabled) {
    for (const Tensor* t : inputs) {
      if (t->requires_grad()) node->requires_grad = true;
    }
  }
  if (node->requires_grad) {
    for (const Tensor* t : inputs) node->parents.push_back(t->node());
    node->backward = std::move(backward);
  }
  return Tensor(std::move(node));
}

void accumulate(const std::shared_ptr<Node>& node, std::size_t i, double g) {
  if (node->requires_grad) node->grad[i] += g;
}

}  // namespace omniqa::nn
