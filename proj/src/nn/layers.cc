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

#include "omniqa/nn/layers.h"

#include <cmath>
#include <numbers>
#include <string>

#include "omniqa/error.h"
#include "omniqa/nn/ops.h"

namespace omniqa::nn {

void set_trainable(const ParamList& params, bool on) {
  for (const auto& p : params) p.tensor.node()->requires_grad = on;
}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Tensor init_fan_in(Shape shape, int fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::vector<double> v(shape_numel(shape));
  for (double& x : v) x = rng.uniform(-bound, bound);
  return Tensor::from(std::move(shape), std::move(v), true);
}

Linear::Linear(int in, int out, Rng& rng)
    : weight(init_fan_in({in, out}, in, rng)),
      bias(init_fan_in({out}, in, rng)) {}

Tensor Linear::forward(const Tensor& x) const {
  return add_bias(matmul(x, weight), bias);
}

void Linear::collect(const std::string& prefix, ParamList& out) const {
  out.push_back({prefix + ".weight", weight});
  out.push_back({prefix + ".bias", bias});
}

LayerNorm::LayerNorm(int dim)
    : gamma(Tensor::full({dim}, 1.0, true)), beta(Tensor::zeros({dim}, true)) {}

Tensor LayerNorm::forward(const Tensor& x) const {
  return layer_norm_rows(x, gamma, beta, eps);
}

void LayerNorm::collect(const std::string& prefix, ParamList& out) const {
  out.push_back({prefix + ".gamma", gamma});
  out.push_back({prefix + ".beta", beta});
}

Tensor scaled_dot_attention(const Tensor& q, const Tensor& k, const Tensor& v,
                            Tensor* weights) {
  if (q.rank() != 2 || k.rank() != 2 || v.rank() != 2 || q.dim(1) != k.dim(1) ||
      k.dim(0) != v.dim(0)) {
    throw ShapeError("attention: incompatible q " + shape_string(q.shape()) +
                     ", k " + shape_string(k.shape()) + ", v " +
                     shape_string(v.shape()));
  }
  const double s = 1.0 / std::sqrt(static_cast<double>(q.dim(1)));
  Tensor w = softmax_rows(scale(matmul(q, transpose(k)), s));
  if (weights) *weights = w;
  return matmul(w, v);
}

MultiHeadAttention::MultiHeadAttention(int dim, int heads_, Rng& rng)
    : heads(heads_) {
  if (heads_ < 1 || dim % heads_ != 0) {
    throw ShapeError("attention dim " + std::to_string(dim) +
                     " is not divisible by " + std::to_string(heads_) + " heads");
  }
  q_proj = Linear(dim, dim, rng);
  k_proj = Linear(dim, dim, rng);
  v_proj = Linear(dim, dim, rng);
  out_proj = Linear(dim, dim, rng);
}

Tensor MultiHeadAttention::forward(const Tensor& queries, const Tensor& context,
                                   std::vector<Tensor>* weights) const {
  const int d = dim();
  if (queries.rank() != 2 || context.rank() != 2 || queries.dim(1) != d ||
      context.dim(1) != d) {
    throw ShapeError("attention expects [n," + std::to_string(d) + "] inputs, got " +
                     shape_string(queries.shape()) + " and " +
                     shape_string(context.shape()));
  }
  const Tensor q = q_proj.forward(queries);
  const Tensor k = k_proj.forward(context);
  const Tensor v = v_proj.forward(context);
  if (weights) weights->clear();
  if (heads == 1) {
    Tensor w;
    Tensor o = scaled_dot_attention(q, k, v, weights ? &w : nullptr);
    if (weights) weights->push_back(w);
    return out_proj.forward(o);
  }
  const int hd = d / heads;
  std::vector<Tensor> parts;
  parts.reserve(heads);
  for (int h = 0; h < heads; ++h) {
    Tensor w;
    parts.push_back(scaled_dot_attention(slice_cols(q, h * hd, hd),
                                         slice_cols(k, h * hd, hd),
                                         slice_cols(v, h * hd, hd),
                                         weights ? &w : nullptr));
    if (weights) weights->push_back(w);
  }
  return out_proj.forward(concat_cols(parts));
}

void MultiHeadAttention::collect(const std::string& prefix, ParamList& out) const {
  q_proj.collect(prefix + ".q", out);
  k_proj.collect(prefix + ".k", out);
  v_proj.collect(prefix + ".v", out);
  out_proj.collect(prefix + ".out", out);
}

Mlp::Mlp(int in, int hidden, int out, Rng& rng)
    : fc1(in, hidden, rng), fc2(hidden, out, rng) {}

Tensor Mlp::forward(const Tensor& x) const {
  return fc2.forward(gelu(fc1.forward(x)));
}

void Mlp::collect(const std::string& prefix, ParamList& out) const {
  fc1.collect(prefix + ".fc1", out);
  fc2.collect(prefix + ".fc2", out);
}

Conv2d::Conv2d(int in, int out, int kernel, Rng& rng) {
  const int fan_in = in * kernel * kernel;
  weight = init_fan_in({out, in, kernel, kernel}, fan_in, rng);
  bias = init_fan_in({out}, fan_in, rng);
}

Tensor Conv2d::forward(const Tensor& x) const { return conv2d(x, weight, bias); }

void Conv2d::collect(const std::string& prefix, ParamList& out) const {
  out.push_back({prefix + ".weight", weight});
  out.push_back({prefix + ".bias", bias});
}

TransformerBlock::TransformerBlock(int dim, int heads, int mlp_hidden, Rng& rng)
    : ln1(dim), ln2(dim), attn(dim, heads, rng), mlp(dim, mlp_hidden, dim, rng) {}

Tensor TransformerBlock::forward(const Tensor& x) const {
  const Tensor h = ln1.forward(x);
  const Tensor y = add(x, attn.forward(h, h));
  return add(y, mlp.forward(ln2.forward(y)));
}

void TransformerBlock::collect(const std::string& prefix, ParamList& out) const {
  ln1.collect(prefix + ".ln1", out);
  attn.collect(prefix + ".attn", out);
  ln2.collect(prefix + ".ln2", out);
  mlp.collect(prefix + ".mlp", out);
}

}  // namespace omniqa::nn
