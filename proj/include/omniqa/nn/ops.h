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

#ifndef OMNIQA_NN_OPS_H_
#define OMNIQA_NN_OPS_H_

#include <vector>

#include "omniqa/nn/tensor.h"

// Differentiable tensor operations. Matrices are rank-2 [rows, cols]; feature
// maps are rank-3 [channels, height, width].
namespace omniqa::nn {

// Elementwise; `b` may also hold a single element, which is broadcast.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
Tensor add_scalar(const Tensor& a, double s);

// Sum of equally shaped tensors.
Tensor add_n(const std::vector<Tensor>& xs);

Tensor log(const Tensor& a);
Tensor sqrt(const Tensor& a);
Tensor abs(const Tensor& a);
Tensor sigmoid(const Tensor& a);
// tanh approximation of GELU.
Tensor gelu(const Tensor& a);

Tensor sum(const Tensor& a);   // -> [1]
Tensor mean(const Tensor& a);  // -> [1]

Tensor matmul(const Tensor& a, const Tensor& b);  // [n,k] x [k,m]
Tensor transpose(const Tensor& a);                // [n,m] -> [m,n]
Tensor add_bias(const Tensor& a, const Tensor& bias);  // [n,m] + [m]
Tensor mean_rows(const Tensor& a);                // [n,m] -> [1,m]
Tensor softmax_rows(const Tensor& a);
Tensor layer_norm_rows(const Tensor& a, const Tensor& gamma, const Tensor& beta,
                       double eps = 1e-5);

Tensor reshape(const Tensor& a, Shape shape);
Tensor slice_rows(const Tensor& a, int start, int count);
Tensor slice_cols(const Tensor& a, int start, int count);
Tensor concat_rows(const std::vector<Tensor>& xs);  // along dim 0, any rank
Tensor concat_cols(const std::vector<Tensor>& xs);  // rank-2 only

// 2D convolution, stride 1, zero "same" padding, odd kernel.
// x [C,H,W], w [O,C,k,k], b [O] -> [O,H,W].
Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b);

// Bilinear resize with half-pixel centers and edge clamping.
Tensor resize_bilinear(const Tensor& x, int out_h, int out_w);

}  // namespace omniqa::nn

#endif  // OMNIQA_NN_OPS_H_
