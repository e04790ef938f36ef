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

#ifndef OMNIQA_OIQA_H_
#define OMNIQA_OIQA_H_

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

namespace omniqa {

inline constexpr std::array<const char*, 3> kScoreDimensions = {
    "quality", "comfortability", "correspondence"};

struct ScoreTriple {
  std::array<double, 3> values{};

  double& operator[](int k) { return values[k]; }
  double operator[](int k) const { return values[k]; }
  double mean() const { return (values[0] + values[1] + values[2]) / 3.0; }
  friend bool operator==(const ScoreTriple&, const ScoreTriple&) = default;
};

enum class PairMode { kOrdered, kUnordered };

const char* to_string(PairMode m);
PairMode parse_pair_mode(const std::string& s);

// (query, context) viewport index pairs: 30 ordered or 15 unordered.
std::vector<std::array<int, 2>> viewport_pairs(PairMode mode);

struct OiqaConfig {
  nn::EncoderConfig encoder;
  int heads = 4;
  PairMode pair_mode = PairMode::kOrdered;
  int hidden = 0;  // regressor hidden width; 0 means the model dim
  double fov = 110.0;
  int viewport_size = 224;
  std::uint64_t seed = 0;
  nn::TrainOptions train;
};

// Per-viewport fused tokens, ordered top, front, left, right, back, bottom.
using ViewportFeatures = std::vector<nn::Tensor>;

// Trainable head: shared self-attention, three cross-attention blocks and
// three regressors, one per score dimension.
class OiqaHead {
 public:
  OiqaHead(int dim, const OiqaConfig& cfg);

  // Three [1, D] perspective-aware representations.
  std::array<nn::Tensor, 3> aggregate(const ViewportFeatures& views) const;
  // Raw (unclamped) scores as a [3] tensor.
  nn::Tensor regress(const std::array<nn::Tensor, 3>& reps) const;
  nn::Tensor forward(const ViewportFeatures& views) const {
    return regress(aggregate(views));
  }
  // Clamped to [0, 100].
  ScoreTriple predict(const ViewportFeatures& views) const;

  nn::ParamList params() const;
  // Parameters of the last regressor layers only.
  nn::ParamList final_layer_params() const;
  int dim() const { return dim_; }
  PairMode pair_mode() const { return pair_mode_; }

 private:
  nn::Tensor self_block(const nn::Tensor& f) const;

  int dim_;
  PairMode pair_mode_;
  nn::MultiHeadAttention self_attn_;
  nn::LayerNorm self_ln_;
  std::array<nn::MultiHeadAttention, 3> cross_attn_;
  std::array<nn::LayerNorm, 3> cross_ln_;
  std::array<nn::Mlp, 3> regressors_;
};

// (1/3) * sum |pred_k - label_k| on a [3] prediction tensor.
nn::Tensor loss_l1(const nn::Tensor& pred, const ScoreTriple& label);
double loss_l1(const ScoreTriple& pred, const ScoreTriple& label);

class OiqaModel {
 public:
  explicit OiqaModel(OiqaConfig cfg);

  const OiqaConfig& config() const { return cfg_; }
  const nn::EncoderStub& encoder() const { return encoder_; }
  OiqaHead& head() { return head_; }
  const OiqaHead& head() const { return head_; }

  // Six 110-degree viewports through the frozen encoder.
  ViewportFeatures encode_viewports(const Raster& erp, const std::string& prompt) const;
  ScoreTriple score(const Raster& erp, const std::string& prompt) const;

  void save(const std::filesystem::path& path) const;
  static OiqaModel load(const std::filesystem::path& path);

 private:
  OiqaConfig cfg_;
  nn::EncoderStub encoder_;
  OiqaHead head_;
};

struct OiqaSample {
  ViewportFeatures views;
  ScoreTriple label;
};

// Full-batch training of `params` (defaults to all head parameters).
nn::FitTrace fit(OiqaHead& head, const std::vector<OiqaSample>& data,
             const nn::TrainOptions& opts, const nn::ParamList* params = nullptr);

// Viewport feature files hold one tensor "viewports" of shape [6, Q, D].
void export_viewport_features(const std::filesystem::path& path,
                              const ViewportFeatures& views);
ViewportFeatures import_viewport_features(const std::filesystem::path& path);

struct ManifestRow {
  std::string input;  // PNG image or feature file
  std::string prompt;
  ScoreTriple label;
  std::string scene;
  std::string generator;
};

// Columns: input, prompt, quality, comfortability, correspondence, scene_id,
// generator_id. Relative inputs resolve against `base_dir`.
std::vector<ManifestRow> read_oiqa_manifest(const CsvTable& table,
                                            const std::filesystem::path& base_dir);

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Groups (scenes) shuffled with `seed`; the first round(fraction * groups)
// go to training. No group straddles the two sides.
Split split_by_group(const std::vector<std::string>& groups, double train_fraction,
                     std::uint64_t seed);
// Everything produced by `held_out` goes to the test side.
Split split_by_generator(const std::vector<std::string>& generators,
                         const std::string& held_out);

}  // namespace omniqa

#endif  // OMNIQA_OIQA_H_
