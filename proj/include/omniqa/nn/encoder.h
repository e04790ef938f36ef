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

#ifndef OMNIQA_NN_ENCODER_H_
#define OMNIQA_NN_ENCODER_H_

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "omniqa/nn/layers.h"
#include "omniqa/nn/tensor.h"
#include "omniqa/raster.h"

namespace omniqa::nn {

// Multi-layer image features f1..f5, each [D, grid_h, grid_w].
using FeatureStack = std::array<Tensor, 5>;

struct EncodedFeatures {
  Tensor fused;  // [Q, D] text-image tokens
  FeatureStack taps;
};

struct EncoderConfig {
  int patch = 16;
  int dim = 32;
  int depth = 6;
  int heads = 4;
  int queries = 32;
  int vocab = 1024;
  int max_text_tokens = 16;
  // 1-based block indices; empty selects five evenly spaced blocks.
  std::vector<int> taps;
  std::uint64_t seed = 0;

  std::array<int, 5> tap_layers() const;
  void validate() const;  // throws RangeError
};

nlohmann::json to_json(const EncoderConfig& cfg);
EncoderConfig encoder_config_from_json(const nlohmann::json& j);

// Hashing tokenizer: lower-cased ASCII alphanumeric words, FNV-1a into
// [0, vocab), truncated to `max_tokens`.
std::vector<int> hash_tokens(std::string_view text, int vocab, int max_tokens);

// Frozen stand-in for the pretrained vision-language encoder: a patch
// transformer over the image followed by a query transformer that mixes
// learnable queries with hashed prompt tokens and reads the image tokens.
class EncoderStub {
 public:
  explicit EncoderStub(EncoderConfig cfg);

  const EncoderConfig& config() const { return cfg_; }
  // Image sides must be multiples of the patch size.
  EncodedFeatures encode(const Raster& image, std::string_view prompt) const;
  ParamList params() const;

 private:
  Tensor text_tokens(std::string_view prompt) const;

  EncoderConfig cfg_;
  std::array<int, 5> taps_{};
  Linear patch_embed_;
  std::vector<TransformerBlock> blocks_;
  LayerNorm image_ln_;
  Tensor query_tokens_;  // [Q, D]
  Tensor text_table_;    // [vocab, D]
  LayerNorm qf_ln_self_, qf_ln_cross_, qf_ln_mlp_, qf_ln_out_;
  MultiHeadAttention qf_self_, qf_cross_;
  Mlp qf_mlp_;
};

// Row-major [C, H, W] tensor of a raster mapped to [-1, 1]; gray rasters are
// replicated to three channels.
Tensor image_tensor(const Raster& image);

}  // namespace omniqa::nn

#endif  // OMNIQA_NN_ENCODER_H_
