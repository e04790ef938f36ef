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

#ifndef OMNIQA_NN_LAYERS_H_
#define OMNIQA_NN_LAYERS_H_

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "omniqa/nn/tensor.h"

namespace omniqa::nn {

struct NamedParam {
  std::string name;
  Tensor tensor;
};
using ParamList = std::vector<NamedParam>;

void set_trainable(const ParamList& params, bool on);

// Seeded generator with a fixed uniform conversion so that sequences do not
// depend on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform();  // [0, 1)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
Tensor init_fan_in(Shape shape, int fan_in, Rng& rng);

struct Linear {
  Tensor weight;  // [in, out]
  Tensor bias;    // [out]

  Linear() = default;
  Linear(int in, int out, Rng& rng);
  int in_features() const { return weight.dim(0); }
  int out_features() const { return weight.dim(1); }
  Tensor forward(const Tensor& x) const;  // [n, in] -> [n, out]
  void collect(const std::string& prefix, ParamList& out) const;
};

struct LayerNorm {
  Tensor gamma;
  Tensor beta;
  double eps = 1e-5;

  LayerNorm() = default;
  explicit LayerNorm(int dim);
  Tensor forward(const Tensor& x) const;
  void collect(const std::string& prefix, ParamList& out) const;
};

// softmax(q k^T / sqrt(d)) v for one head.
Tensor scaled_dot_attention(const Tensor& q, const Tensor& k, const Tensor& v,
                            Tensor* weights = nullptr);

struct MultiHeadAttention {
  int heads = 1;
  Linear q_proj, k_proj, v_proj, out_proj;

  MultiHeadAttention() = default;
  MultiHeadAttention(int dim, int heads, Rng& rng);
  int dim() const { return q_proj.in_features(); }
  // queries [n, D] attend over context [m, D]; returns [n, D]. When
  // `weights` is given it receives one [n, m] attention matrix per head.
  Tensor forward(const Tensor& queries, const Tensor& context,
                 std::vector<Tensor>* weights = nullptr) const;
  void collect(const std::string& prefix, ParamList& out) const;
};

struct Mlp {
  Linear fc1, fc2;

  Mlp() = default;
  Mlp(int in, int hidden, int out, Rng& rng);
  Tensor forward(const Tensor& x) const;  // fc2(gelu(fc1(x)))
  void collect(const std::string& prefix, ParamList& out) const;
};

struct Conv2d {
  Tensor weight;  // [out, in, k, k]
  Tensor bias;    // [out]

  Conv2d() = default;
  Conv2d(int in, int out, int kernel, Rng& rng);
  Tensor forward(const Tensor& x) const;  // same padding
  void collect(const std::string& prefix, ParamList& out) const;
};

// Pre-norm transformer block: x + attn(ln(x)), then x + mlp(ln(x)).
struct TransformerBlock {
  LayerNorm ln1, ln2;
  MultiHeadAttention attn;
  Mlp mlp;

  TransformerBlock() = default;
  TransformerBlock(int dim, int heads, int mlp_hidden, Rng& rng);
  Tensor forward(const Tensor& x) const;
  void collect(const std::string& prefix, ParamList& out) const;
};

}  // namespace omniqa::nn

#endif  // OMNIQA_NN_LAYERS_H_
