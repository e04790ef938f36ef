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

#include "omniqa/nn/optim.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "omniqa/error.h"

namespace omniqa::nn {

Adam::Adam(ParamList params, AdamOptions opts)
    : params_(std::move(params)), opts_(opts) {
  for (const auto& p : params_) {
    m_.emplace_back(p.tensor.numel(), 0.0);
    v_.emplace_back(p.tensor.numel(), 0.0);
  }
}

void Adam::step(double lr) {
  ++t_;
  const double c1 = 1.0 - std::pow(opts_.beta1, t_);
  const double c2 = 1.0 - std::pow(opts_.beta2, t_);
  for (std::size_t k = 0; k < params_.size(); ++k) {
    Node& n = *params_[k].tensor.node();
    if (!n.requires_grad || n.grad.size() != n.value.size()) continue;
    for (std::size_t i = 0; i < n.value.size(); ++i) {
      const double g = n.grad[i];
      m_[k][i] = opts_.beta1 * m_[k][i] + (1.0 - opts_.beta1) * g;
      v_[k][i] = opts_.beta2 * v_[k][i] + (1.0 - opts_.beta2) * g * g;
      const double mh = m_[k][i] / c1;
      const double vh = v_[k][i] / c2;
      n.value[i] -= lr * mh / (std::sqrt(vh) + opts_.eps);
    }
  }
}

void Adam::zero_grad() {
  for (const auto& p : params_) p.tensor.node()->grad.assign(p.tensor.numel(), 0.0);
}

double cosine_lr(double base, int step, int total, double floor) {
  if (total <= 0) return base;
  const double t = std::clamp(static_cast<double>(step) / total, 0.0, 1.0);
  return floor + 0.5 * (base - floor) * (1.0 + std::cos(std::numbers::pi * t));
}

FitTrace run_training(const std::function<Tensor()>& loss, const ParamList& params,
                      const TrainOptions& opts) {
  if (opts.steps < 0) throw RangeError("training steps must be non-negative");
  if (!(opts.lr >= 0.0)) throw RangeError("learning rate must be non-negative");
  const int total = opts.schedule_steps > 0 ? opts.schedule_steps : opts.steps;
  Adam adam(params, opts.adam);
  FitTrace trace;
  trace.loss.reserve(opts.steps);
  for (int step = 0; step < opts.steps; ++step) {
    adam.zero_grad();
    const Tensor l = loss();
    trace.loss.push_back(l.item());
    l.backward();
    const double lr = cosine_lr(opts.lr, step, total);
    if (opts.optimizer == OptimizerKind::kAdam) {
      adam.step(lr);
    } else {
      for (const auto& p : params) {
        Node& n = *p.tensor.node();
        for (std::size_t i = 0; i < n.value.size(); ++i) n.value[i] -= lr * n.grad[i];
      }
    }
  }
  return trace;
}

GradCheckResult fd_check(const std::function<Tensor()>& loss,
                         const ParamList& params, double h) {
  for (const auto& p : params) p.tensor.node()->grad.assign(p.tensor.numel(), 0.0);
  const Tensor out = loss();
  if (out.numel() != 1) throw ShapeError("fd_check needs a scalar loss");
  out.backward();

  std::vector<std::vector<double>> analytic, numeric;
  double scale = 0.0;
  for (const auto& p : params) {
    Node& n = *p.tensor.node();
    analytic.push_back(n.grad);
    std::vector<double> num(n.value.size());
    for (std::size_t i = 0; i < n.value.size(); ++i) {
      const double keep = n.value[i];
      n.value[i] = keep + h;
      const double up = loss().item();
      n.value[i] = keep - h;
      const double down = loss().item();
      n.value[i] = keep;
      num[i] = (up - down) / (2.0 * h);
      scale = std::max({scale, std::abs(num[i]), std::abs(analytic.back()[i])});
    }
    numeric.push_back(std::move(num));
  }

  GradCheckResult r;
  const double floor = std::max(1e-3 * scale, 1e-12);
  for (std::size_t k = 0; k < params.size(); ++k) {
    for (std::size_t i = 0; i < numeric[k].size(); ++i) {
      const double a = analytic[k][i], n = numeric[k][i];
      const double rel = std::abs(a - n) / std::max({std::abs(a), std::abs(n), floor});
      if (rel > r.max_rel_error || r.worst_param.empty()) {
        r.max_rel_error = rel;
        r.worst_param = params[k].name;
        r.worst_index = i;
        r.analytic = a;
        r.numeric = n;
      }
    }
  }
  return r;
}

}  // namespace omniqa::nn
