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

#include "omniqa/oiqa.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "json.hpp"
#include "omniqa/error.h"
#include "omniqa/geometry.h"
#include "omniqa/nn/ops.h"
#include "omniqa/nn/tensor_io.h"
#include "omniqa/png_io.h"

namespace omniqa {

using nn::Tensor;

const char* to_string(PairMode m) {
  return m == PairMode::kOrdered ? "ordered" : "unordered";
}

PairMode parse_pair_mode(const std::string& s) {
  if (s == "ordered") return PairMode::kOrdered;
  if (s == "unordered") return PairMode::kUnordered;
  throw UsageError("unknown pair mode '" + s + "' (expected ordered or unordered)");
}

std::vector<std::array<int, 2>> viewport_pairs(PairMode mode) {
  std::vector<std::array<int, 2>> out;
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      if (i == j || (mode == PairMode::kUnordered && j < i)) continue;
      out.push_back({i, j});
    }
  }
  return out;
}

OiqaHead::OiqaHead(int dim, const OiqaConfig& cfg) : dim_(dim), pair_mode_(cfg.pair_mode) {
  nn::Rng rng(cfg.seed ^ 0x6f697161ULL);
  const int hidden = cfg.hidden > 0 ? cfg.hidden : dim;
  self_attn_ = nn::MultiHeadAttention(dim, cfg.heads, rng);
  self_ln_ = nn::LayerNorm(dim);
  for (int k = 0; k < 3; ++k) {
    cross_attn_[k] = nn::MultiHeadAttention(dim, cfg.heads, rng);
    cross_ln_[k] = nn::LayerNorm(dim);
  }
  for (int k = 0; k < 3; ++k) regressors_[k] = nn::Mlp(dim, hidden, 1, rng);
}

Tensor OiqaHead::self_block(const Tensor& f) const {
  return self_ln_.forward(nn::add(f, self_attn_.forward(f, f)));
}

std::array<Tensor, 3> OiqaHead::aggregate(const ViewportFeatures& views) const {
  if (views.size() != 6) {
    throw ShapeError("aggregate expects 6 viewport features, got " +
                     std::to_string(views.size()));
  }
  for (const Tensor& v : views) {
    if (v.rank() != 2 || v.dim(1) != dim_ || v.shape() != views[0].shape()) {
      throw ShapeError("viewport features must share shape [Q," + std::to_string(dim_) +
                       "], got " + nn::shape_string(v.shape()));
    }
  }
  std::vector<Tensor> selfs;
  selfs.reserve(6);
  for (const Tensor& v : views) selfs.push_back(self_block(v));

  const auto pairs = viewport_pairs(pair_mode_);
  std::array<Tensor, 3> out;
  for (int k = 0; k < 3; ++k) {
    std::vector<Tensor> crosses;
    crosses.reserve(pairs.size());
    for (const auto& [i, j] : pairs) {
      crosses.push_back(cross_ln_[k].forward(
          nn::add(selfs[i], cross_attn_[k].forward(selfs[i], selfs[j]))));
    }
    const Tensor avg = nn::scale(nn::add_n(crosses), 1.0 / static_cast<double>(pairs.size()));
    out[k] = nn::mean_rows(avg);
  }
  return out;
}

Tensor OiqaHead::regress(const std::array<Tensor, 3>& reps) const {
  std::vector<Tensor> scores;
  for (int k = 0; k < 3; ++k) scores.push_back(regressors_[k].forward(reps[k]));
  return nn::reshape(nn::concat_rows(scores), {3});
}

ScoreTriple OiqaHead::predict(const ViewportFeatures& views) const {
  const Tensor raw = forward(views);
  ScoreTriple s;
  for (int k = 0; k < 3; ++k) s[k] = std::clamp(raw.data()[k], 0.0, 100.0);
  return s;
}

nn::ParamList OiqaHead::params() const {
  nn::ParamList out;
  self_attn_.collect("oiqa.self_attn", out);
  self_ln_.collect("oiqa.self_ln", out);
  for (int k = 0; k < 3; ++k) {
    const std::string d = kScoreDimensions[k];
    cross_attn_[k].collect("oiqa." + d + ".cross_attn", out);
    cross_ln_[k].collect("oiqa." + d + ".cross_ln", out);
    regressors_[k].collect("oiqa." + d + ".regressor", out);
  }
  return out;
}

nn::ParamList OiqaHead::final_layer_params() const {
  nn::ParamList out;
  for (int k = 0; k < 3; ++k) {
    regressors_[k].fc2.collect(std::string("oiqa.") + kScoreDimensions[k] + ".regressor.fc2",
                               out);
  }
  return out;
}

Tensor loss_l1(const Tensor& pred, const ScoreTriple& label) {
  if (pred.numel() != 3) throw ShapeError("loss_l1 expects 3 predicted scores");
  const Tensor target = Tensor::from({3}, {label[0], label[1], label[2]});
  return nn::mean(nn::abs(nn::sub(nn::reshape(pred, {3}), target)));
}

double loss_l1(const ScoreTriple& pred, const ScoreTriple& label) {
  double s = 0.0;
  for (int k = 0; k < 3; ++k) s += std::abs(pred[k] - label[k]);
  return s / 3.0;
}

namespace {

nlohmann::json config_to_json(const OiqaConfig& cfg) {
  return {{"encoder", nn::to_json(cfg.encoder)},
          {"heads", cfg.heads},
          {"pair_mode", to_string(cfg.pair_mode)},
          {"hidden", cfg.hidden},
          {"fov", cfg.fov},
          {"viewport_size", cfg.viewport_size},
          {"seed", cfg.seed}};
}

OiqaConfig config_from_json(const nlohmann::json& j) {
  OiqaConfig cfg;
  try {
    cfg.encoder = nn::encoder_config_from_json(j.at("encoder"));
    cfg.heads = j.at("heads").get<int>();
    cfg.pair_mode = parse_pair_mode(j.at("pair_mode").get<std::string>());
    cfg.hidden = j.at("hidden").get<int>();
    cfg.fov = j.at("fov").get<double>();
    cfg.viewport_size = j.at("viewport_size").get<int>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("OIQA checkpoint config: ") + e.what());
  } catch (const UsageError& e) {
    throw FormatError(std::string("OIQA checkpoint config: ") + e.what());
  }
  return cfg;
}

}  // namespace

OiqaModel::OiqaModel(OiqaConfig cfg)
    : cfg_(std::move(cfg)), encoder_(cfg_.encoder), head_(cfg_.encoder.dim, cfg_) {
  if (cfg_.viewport_size % cfg_.encoder.patch != 0) {
    throw RangeError("viewport size must be a multiple of the encoder patch size");
  }
}

ViewportFeatures OiqaModel::encode_viewports(const Raster& erp,
                                             const std::string& prompt) const {
  check_erp(erp);
  ViewportFeatures out;
  for (const ViewportSpec& spec : six_viewport_set(cfg_.fov, cfg_.viewport_size)) {
    out.push_back(encoder_.encode(erp_to_viewport(erp, spec), prompt).fused);
  }
  return out;
}

ScoreTriple OiqaModel::score(const Raster& erp, const std::string& prompt) const {
  return head_.predict(encode_viewports(erp, prompt));
}

void OiqaModel::save(const std::filesystem::path& path) const {
  nn::TensorFile file = nn::params_to_file(head_.params());
  file.meta = {{"kind", "oiqa"}, {"config", config_to_json(cfg_)}};
  nn::write_tensor_file(path, file);
}

OiqaModel OiqaModel::load(const std::filesystem::path& path) {
  const nn::TensorFile file = nn::read_tensor_file(path);
  if (!file.meta.is_object() || file.meta.value("kind", std::string()) != "oiqa" ||
      !file.meta.contains("config")) {
    throw FormatError(path.string() + ": meta.kind: not an OIQA checkpoint");
  }
  OiqaModel model(config_from_json(file.meta["config"]));
  nn::load_params(model.head_.params(), file);
  return model;
}

nn::FitTrace fit(OiqaHead& head, const std::vector<OiqaSample>& data,
                 const nn::TrainOptions& opts, const nn::ParamList* params) {
  if (data.empty()) throw DataError("cannot train on an empty dataset");
  const nn::ParamList all = head.params();
  const nn::ParamList& train = params ? *params : all;
  auto batch_loss = [&] {
    std::vector<Tensor> losses;
    losses.reserve(data.size());
    for (const auto& s : data) losses.push_back(loss_l1(head.forward(s.views), s.label));
    return nn::scale(nn::add_n(losses), 1.0 / static_cast<double>(data.size()));
  };
  return nn::run_training(batch_loss, train, opts);
}

void export_viewport_features(const std::filesystem::path& path,
                              const ViewportFeatures& views) {
  if (views.size() != 6) throw ShapeError("expected 6 viewport features");
  std::vector<Tensor> rows;
  for (const Tensor& v : views) {
    if (v.rank() != 2 || v.shape() != views[0].shape()) {
      throw ShapeError("viewport features must share a [Q, D] shape");
    }
    rows.push_back(nn::reshape(v, {1, v.dim(0), v.dim(1)}));
  }
  nn::TensorFile file;
  file.meta = {{"kind", "viewport-features"}};
  file.tensors.emplace_back("viewports", nn::concat_rows(rows));
  nn::write_tensor_file(path, file);
}

ViewportFeatures import_viewport_features(const std::filesystem::path& path) {
  const nn::TensorFile file = nn::read_tensor_file(path);
  if (!file.has("viewports")) {
    throw FormatError(path.string() + ": viewports: missing tensor");
  }
  const Tensor& t = file.get("viewports");
  if (t.rank() != 3 || t.dim(0) != 6) {
    throw FormatError(path.string() + ": viewports: expected shape [6,Q,D], got " +
                      nn::shape_string(t.shape()));
  }
  ViewportFeatures out;
  for (int i = 0; i < 6; ++i) {
    out.push_back(nn::reshape(nn::slice_rows(t, i, 1), {t.dim(1), t.dim(2)}));
  }
  return out;
}

std::vector<ManifestRow> read_oiqa_manifest(const CsvTable& table,
                                            const std::filesystem::path& base_dir) {
  const std::size_t ci = table.column("input"), cp = table.column("prompt"),
                    cs = table.column("scene_id"), cg = table.column("generator_id");
  std::array<std::size_t, 3> cd{};
  for (int k = 0; k < 3; ++k) cd[k] = table.column(kScoreDimensions[k]);
  std::vector<ManifestRow> rows;
  for (const auto& r : table.rows()) {
    ManifestRow m;
    const std::filesystem::path in(r[ci]);
    m.input = (in.is_absolute() ? in : base_dir / in).string();
    m.prompt = r[cp];
    for (int k = 0; k < 3; ++k) m.label[k] = parse_double(r[cd[k]], kScoreDimensions[k]);
    m.scene = r[cs];
    m.generator = r[cg];
    rows.push_back(std::move(m));
  }
  if (rows.empty()) throw DataError("manifest has no rows");
  return rows;
}

Split split_by_group(const std::vector<std::string>& groups, double train_fraction,
                     std::uint64_t seed) {
  if (!(train_fraction >= 0.0 && train_fraction <= 1.0)) {
    throw RangeError("train fraction must lie in [0, 1]");
  }
  std::vector<std::string> unique = groups;
  std::sort(unique.begin(), unique.end());
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
  nn::Rng rng(seed);
  // Fisher-Yates with the toolkit generator keeps splits platform independent.
  for (std::size_t i = unique.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.next() % i);
    std::swap(unique[i - 1], unique[j]);
  }
  const auto n_train = static_cast<std::size_t>(std::lround(train_fraction * unique.size()));
  std::map<std::string, bool> is_train;
  for (std::size_t i = 0; i < unique.size(); ++i) is_train[unique[i]] = i < n_train;
  Split s;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    (is_train[groups[i]] ? s.train : s.test).push_back(i);
  }
  return s;
}

Split split_by_generator(const std::vector<std::string>& generators,
                         const std::string& held_out) {
  Split s;
  for (std::size_t i = 0; i < generators.size(); ++i) {
    (generators[i] == held_out ? s.test : s.train).push_back(i);
  }
  return s;
}

}  // namespace omniqa
