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

#ifndef OMNIQA_NN_TENSOR_H_
#define OMNIQA_NN_TENSOR_H_

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace omniqa::nn {

using Shape = std::vector<int>;

std::size_t shape_numel(const Shape& s);
std::string shape_string(const Shape& s);

// Propagates the gradient of a node's output into its parents.
using BackwardFn = std::function<void(std::span<const double> out_grad)>;

struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  BackwardFn backward;
};

// Dense row-major float64 tensor with reverse-mode gradients. Copies share the
// underlying node (handle semantics); use clone() for a deep copy.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> values,
                     bool requires_grad = false);
  static Tensor scalar(double v) { return from({1}, {v}); }

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  int dim(std::size_t i) const { return node_->shape.at(i); }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t numel() const { return node_->value.size(); }

  std::span<double> data() { return node_->value; }
  std::span<const double> data() const { return node_->value; }
  double item() const;

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool on) { node_->requires_grad = on; }
  // Gradient accumulated by backward(); zeros if none has reached this tensor.
  std::span<const double> grad() const;
  void zero_grad();

  // Seeds d(this)/d(this) = 1 for a one-element tensor and accumulates
  // gradients into every reachable tensor that requires them.
  void backward() const;

  Tensor detach() const;
  Tensor clone() const;

  const std::shared_ptr<Node>& node() const { return node_; }
  explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}

 private:
  std::shared_ptr<Node> node_;
};

// Disables graph recording on the current thread while alive; for inference.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled();

// Builds an op result. Parents and the backward closure are recorded only if
// some input requires gradients.
Tensor make_result(Shape shape, std::vector<double> value,
                   const std::vector<const Tensor*>& inputs,
                   BackwardFn backward);

// Accumulates into a parent's gradient if it takes one.
void accumulate(const std::shared_ptr<Node>& node, std::size_t i, double g);

}  // namespace omniqa::nn

#endif  // OMNIQA_NN_TENSOR_H_
