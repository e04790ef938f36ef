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

#ifndef OMNIQA_OISAL_H_
#define OMNIQA_OISAL_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "omniqa/csv.h"
#include "omniqa/nn/encoder.h"
#include "omniqa/nn/layers.h"
#include "omniqa/nn/optim.h"
#include "omniqa/raster.h"
#include "omniqa/saliency.h"

namespace omniqa {

struct OisalConfig {
  nn::EncoderConfig encoder;
  // The ERP is resampled to input_height x 2*input_height before encoding.
  int input_height = 256;
  // Fusion width followed by the output width of each refine stage.
  std::array<int, 4> widths = {32, 16, 8, 4};
  int upsample = 2;
  int heads = 4;
  // Cross-attention from image tokens to the fused text-image tokens.
  bool text_injection = true;
  double alpha = 1.0;
  double beta = 1.0;
  std::uint64_t seed = 0;
  nn::TrainOptions train;

  void validate() const;  // throws RangeError
};

// Feature fusion, three refine stages and the output head.
class OisalDecoder {
 public:
  OisalDecoder(int dim, const OisalConfig& cfg);

  // Concatenates f4 and f5, reduces to the fusion width and lets every
  // spatial position attend to the fused tokens (residual). [w0, gh, gw].
  nn::Tensor feature_fusion(const nn::Tensor& f4, const nn::Tensor& f5,
                            const nn::Tensor& fused) const;
  // Stage s in {0, 1, 2}: upsample `x`, project and resize the tap, then
  // concatenate, 3x3 convolution and GELU.
  nn::Tensor hfr(int stage, const nn::Tensor& x, const nn::Tensor& tap) const;
  // Saliency in [0, 1] as [1, out_h, out_w].
  nn::Tensor forward(const nn::EncodedFeatures& f, int out_h, int out_w) const;

  nn::ParamList params() const;

  // Exposed for ablations and tests.
  nn::MultiHeadAttention& fusion_attention() { return ff_attn_; }
  nn::Conv2d& tap_projection(int stage) { return tap_proj_[stage]; }

 private:
  int dim_;
  int upsample_;
  bool text_injection_;
  nn::Conv2d ff_reduce_;
  nn::Linear text_proj_;
  nn::LayerNorm ff_ln_;
  nn::MultiHeadAttention ff_attn_;
  std::array<nn::Conv2d, 3> tap_proj_;
  std::array<nn::Conv2d, 3> refine_;
  nn::Conv2d head_;
};

// alpha * (1 - CC(pred, gt)) + beta * KLD(gt || pred) with both maps taken as
// densities; the KLD uses sum P log(P / (Q + eps)).
nn::Tensor loss_sal(const nn::Tensor& pred, const SaliencyMap& gt, double alpha,
                    double beta, double eps = 1e-8);

SaliencyMap tensor_to_map(const nn::Tensor& t);

class OisalModel {
 public:
  explicit OisalModel(OisalConfig cfg);

  const OisalConfig& config() const { return cfg_; }
  const nn::EncoderStub& encoder() const { return encoder_; }
  OisalDecoder& decoder() { return decoder_; }
  const OisalDecoder& decoder() const { return decoder_; }

  // Whole-panorama encoding, no viewport split.
  nn::EncodedFeatures encode(const Raster& erp, const std::string& prompt) const;
  SaliencyMap predict(const Raster& erp, const std::string& prompt) const;
  SaliencyMap predict(const nn::EncodedFeatures& f, int width, int height) const;

  void save(const std::filesystem::path& path) const;
  static OisalModel load(const std::filesystem::path& path);

 private:
  OisalConfig cfg_;
  nn::EncoderStub encoder_;
  OisalDecoder decoder_;
};

struct OisalSample {
  nn::EncodedFeatures features;
  SaliencyMap gt;
};

nn::FitTrace fit(OisalDecoder& decoder, const std::vector<OisalSample>& data,
                 const OisalConfig& cfg, const nn::TrainOptions& opts);

struct SalManifestRow {
  std::string input;  // PNG image or feature file
  std::string prompt;
  std::string gt_map;
  std::string scene;
};

// Columns: input, prompt, gt_map, scene_id.
std::vector<SalManifestRow> read_oisal_manifest(const CsvTable& table,
                                                const std::filesystem::path& base_dir);

}  // namespace omniqa

#endif  // OMNIQA_OISAL_H_
