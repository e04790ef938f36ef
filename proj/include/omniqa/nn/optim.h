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

#ifndef OMNIQA_NN_OPTIM_H_
#define OMNIQA_NN_OPTIM_H_

#include <functional>
#include <string>
#include <vector>

#include "omniqa/nn/layers.h"

namespace omniqa::nn {

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adam {
 public:
  explicit Adam(ParamList params, AdamOptions opts = {});
  // Applies one update with learning rate `lr` from the current gradients.
  void step(double lr);
  void zero_grad();
  int steps() const { return t_; }

 private:
  ParamList params_;
  AdamOptions opts_;
  std::vector<std::vector<double>> m_, v_;
  int t_ = 0;
};

enum class OptimizerKind { kAdam, kSgd };

struct TrainOptions {
  int steps = 500;
  double lr = 1e-5;
  // Cosine schedule length; 0 uses `steps`.
  int schedule_steps = 0;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  AdamOptions adam;
};

struct FitTrace {
  std::vector<double> loss;  // training loss before each step
};

// Minimizes `loss` over `params` for opts.steps steps with a cosine-annealed
// learning rate. Parameters outside `params` are left untouched.
FitTrace run_training(const std::function<Tensor()>& loss, const ParamList& params,
                      const TrainOptions& opts);

// Cosine annealing from `base` at step 0 to `floor` at step `total`.
double cosine_lr(double base, int step, int total, double floor = 0.0);

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

// Compares reverse-mode gradients of the scalar `loss` with central
// differences for every element of `params`. The relative error of an element
// is |a - n| / max(|a|, |n|, floor), where floor = 1e-3 times the largest
// gradient magnitude seen (and at least 1e-12), so components that are tiny
// against the gradient's scale are compared absolutely.
GradCheckResult fd_check(const std::function<Tensor()>& loss,
                         const ParamList& params, double h = 1e-4);

}  // namespace omniqa::nn

#endif  // OMNIQA_NN_OPTIM_H_
