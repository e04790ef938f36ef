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

#include "omniqa/oisal.h"

#include <cmath>
#include <numeric>

#include "json.hpp"
#include "omniqa/error.h"
#include "omniqa/geometry.h"
#include "omniqa/nn/ops.h"
#include "omniqa/nn/tensor_io.h"

namespace omniqa {

using nn::Tensor;

void OisalConfig::validate() const {
  if (input_height < 1) throw RangeError("input_height must be positive");
  for (int w : widths) {
    if (w < 1) throw RangeError("decoder widths must be positive");
  }
  if (widths[0] % heads != 0) {
    throw RangeError("fusion width must be divisible by the attention heads");
  }
  if (upsample < 1) throw RangeError("upsample factor must be at least 1");
  if (!(alpha >= 0.0) || !(beta >= 0.0) || (alpha == 0.0 && beta == 0.0)) {
    throw RangeError("loss weights must be non-negative and not both zero");
  }
}

OisalDecoder::OisalDecoder(int dim, const OisalConfig& cfg)
    : dim_(dim), upsample_(cfg.upsample), text_injection_(cfg.text_injection) {
  cfg.validate();
  nn::Rng rng(cfg.seed ^ 0x6f6973616cULL);
  const auto& w = cfg.widths;
  ff_reduce_ = nn::Conv2d(2 * dim, w[0], 1, rng);
  text_proj_ = nn::Linear(dim, w[0], rng);
  ff_ln_ = nn::LayerNorm(w[0]);
  ff_attn_ = nn::MultiHeadAttention(w[0], cfg.heads, rng);
  for (int s = 0; s < 3; ++s) {
    tap_proj_[s] = nn::Conv2d(dim, w[s + 1], 1, rng);
    refine_[s] = nn::Conv2d(w[s] + w[s + 1], w[s + 1], 3, rng);
  }
  head_ = nn::Conv2d(w[3], 1, 1, rng);
}

Tensor OisalDecoder::feature_fusion(const Tensor& f4, const Tensor& f5,
                                    const Tensor& fused) const {
  if (f4.rank() != 3 || f4.shape() != f5.shape() || f4.dim(0) != dim_) {
    throw ShapeError("feature fusion needs two [" + std::to_string(dim_) +
                     ",H,W] grids, got " + nn::shape_string(f4.shape()) + " and " +
                     nn::shape_string(f5.shape()));
  }
  if (fused.rank() != 2 || fused.dim(1) != dim_) {
    throw ShapeError("fused tokens must be [Q," + std::to_string(dim_) + "], got " +
                     nn::shape_string(fused.shape()));
  }
  const int h = f4.dim(1), w = f4.dim(2);
  const Tensor x = ff_reduce_.forward(nn::concat_rows({f4, f5}));
  if (!text_injection_) return x;
  const int c = x.dim(0);
  const Tensor tokens = nn::transpose(nn::reshape(x, {c, h * w}));
  const Tensor context = text_proj_.forward(fused);
  const Tensor mixed = nn::add(tokens, ff_attn_.forward(ff_ln_.forward(tokens), context));
  return nn::reshape(nn::transpose(mixed), {c, h, w});
}

Tensor OisalDecoder::hfr(int stage, const Tensor& x, const Tensor& tap) const {
  if (tap.rank() != 3 || tap.dim(0) != dim_ || x.rank() != 3) {
    throw ShapeError("refine stage got feature " + nn::shape_string(x.shape()) +
                     " and tap " + nn::shape_string(tap.shape()));
  }
  const int h = x.dim(1) * upsample_, w = x.dim(2) * upsample_;
  const Tensor up = nn::resize_bilinear(x, h, w);
  const Tensor t = nn::resize_bilinear(tap_proj_[stage].forward(tap), h, w);
  return nn::gelu(refine_[stage].forward(nn::concat_rows({up, t})));
}

Tensor OisalDecoder::forward(const nn::EncodedFeatures& f, int out_h, int out_w) const {
  Tensor x = feature_fusion(f.taps[3], f.taps[4], f.fused);
  x = hfr(0, x, f.taps[2]);
  x = hfr(1, x, f.taps[1]);
  x = hfr(2, x, f.taps[0]);
  return nn::resize_bilinear(nn::sigmoid(head_.forward(x)), out_h, out_w);
}

nn::ParamList OisalDecoder::params() const {
  nn::ParamList out;
  ff_reduce_.collect("oisal.ff.reduce", out);
  if (text_injection_) {
    text_proj_.collect("oisal.ff.text_proj", out);
    ff_ln_.collect("oisal.ff.ln", out);
    ff_attn_.collect("oisal.ff.attn", out);
  }
  for (int s = 0; s < 3; ++s) {
    const std::string p = "oisal.hfr" + std::to_string(s + 1);
    tap_proj_[s].collect(p + ".tap_proj", out);
    refine_[s].collect(p + ".refine", out);
  }
  head_.collect("oisal.head", out);
  return out;
}

Tensor loss_sal(const Tensor& pred, const SaliencyMap& gt, double alpha, double beta,
                double eps) {
  if (pred.numel() != gt.size()) {
    throw ShapeError("saliency maps differ in shape: prediction " +
                     nn::shape_string(pred.shape()) + " vs ground truth " +
                     gt.shape_string());
  }
  const std::size_t n = gt.size();
  const double gsum = std::accumulate(gt.values.begin(), gt.values.end(), 0.0);
  if (!(gsum > 0.0)) throw DegenerateError("ground-truth map has zero mass");
  const double gmean = gsum / static_cast<double>(n);
  std::vector<double> p(n), b(n);
  double plogp = 0.0, sgg = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    p[i] = gt.values[i] / gsum;
    if (p[i] > 0.0) plogp += p[i] * std::log(p[i]);
    b[i] = gt.values[i] - gmean;
    sgg += b[i] * b[i];
  }
  if (sgg == 0.0) throw DegenerateError("CC undefined for a constant map");
  const int ni = static_cast<int>(n);
  const Tensor x = nn::reshape(pred, {ni});
  const Tensor total = nn::sum(x);
  if (!(total.item() > 0.0)) throw DegenerateError("predicted map has zero mass");

  const Tensor a = nn::sub(x, nn::mean(x));
  const Tensor spp = nn::sum(nn::mul(a, a));
  if (spp.item() == 0.0) throw DegenerateError("CC undefined for a constant map");
  const Tensor cov = nn::sum(nn::mul(a, Tensor::from({ni}, std::move(b))));
  const Tensor cc = nn::div(cov, nn::sqrt(nn::scale(spp, sgg)));

  const Tensor q = nn::div(x, total);
  const Tensor cross = nn::sum(nn::mul(nn::log(nn::add_scalar(q, eps)),
                                       Tensor::from({ni}, std::move(p))));
  const Tensor kld = nn::add_scalar(nn::scale(cross, -1.0), plogp);
  return nn::add(nn::add_scalar(nn::scale(cc, -alpha), alpha), nn::scale(kld, beta));
}

SaliencyMap tensor_to_map(const Tensor& t) {
  if (t.rank() != 3 || t.dim(0) != 1) {
    throw ShapeError("expected a [1,H,W] map, got " + nn::shape_string(t.shape()));
  }
  SaliencyMap m(t.dim(2), t.dim(1));
  std::copy(t.data().begin(), t.data().end(), m.values.begin());
  return m;
}

namespace {

nlohmann::json config_to_json(const OisalConfig& cfg) {
  return {{"encoder", nn::to_json(cfg.encoder)},
          {"input_height", cfg.input_height},
          {"widths", cfg.widths},
          {"upsample", cfg.upsample},
          {"heads", cfg.heads},
          {"text_injection", cfg.text_injection},
          {"alpha", cfg.alpha},
          {"beta", cfg.beta},
          {"seed", cfg.seed}};
}

OisalConfig config_from_json(const nlohmann::json& j) {
  OisalConfig cfg;
  try {
    cfg.encoder = nn::encoder_config_from_json(j.at("encoder"));
    cfg.input_height = j.at("input_height").get<int>();
    cfg.widths = j.at("widths").get<std::array<int, 4>>();
    cfg.upsample = j.at("upsample").get<int>();
    cfg.heads = j.at("heads").get<int>();
    cfg.text_injection = j.at("text_injection").get<bool>();
    cfg.alpha = j.at("alpha").get<double>();
    cfg.beta = j.at("beta").get<double>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.validate();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("OISal checkpoint config: ") + e.what());
  } catch (const RangeError& e) {
    throw FormatError(std::string("OISal checkpoint config: ") + e.what());
  }
  return cfg;
}

}  // namespace

OisalModel::OisalModel(OisalConfig cfg)
    : cfg_(std::move(cfg)), encoder_(cfg_.encoder), decoder_(cfg_.encoder.dim, cfg_) {
  if (cfg_.input_height % cfg_.encoder.patch != 0) {
    throw RangeError("input_height must be a multiple of the encoder patch size");
  }
}

nn::EncodedFeatures OisalModel::encode(const Raster& erp, const std::string& prompt) const {
  check_erp(erp);
  const int h = cfg_.input_height;
  if (erp.height() == h) return encoder_.encode(erp, prompt);
  return encoder_.encode(resize_bilinear(erp, 2 * h, h), prompt);
}

SaliencyMap OisalModel::predict(const nn::EncodedFeatures& f, int width,
                                int height) const {
  return tensor_to_map(decoder_.forward(f, height, width));
}

SaliencyMap OisalModel::predict(const Raster& erp, const std::string& prompt) const {
  return predict(encode(erp, prompt), erp.width(), erp.height());
}

void OisalModel::save(const std::filesystem::path& path) const {
  nn::TensorFile file = nn::params_to_file(decoder_.params());
  file.meta = {{"kind", "oisal"}, {"config", config_to_json(cfg_)}};
  nn::write_tensor_file(path, file);
}

OisalModel OisalModel::load(const std::filesystem::path& path) {
  const nn::TensorFile file = nn::read_tensor_file(path);
  if (!file.meta.is_object() || file.meta.value("kind", std::string()) != "oisal" ||
      !file.meta.contains("config")) {
    throw FormatError(path.string() + ": meta.kind: not an OISal checkpoint");
  }
  OisalModel model(config_from_json(file.meta["config"]));
  nn::load_params(model.decoder_.params(), file);
  return model;
}

nn::FitTrace fit(OisalDecoder& decoder, const std::vector<OisalSample>& data,
                 const OisalConfig& cfg, const nn::TrainOptions& opts) {
  if (data.empty()) throw DataError("cannot train on an empty dataset");
  auto batch_loss = [&] {
    std::vector<Tensor> losses;
    losses.reserve(data.size());
    for (const auto& s : data) {
      const Tensor pred = decoder.forward(s.features, s.gt.height, s.gt.width);
      losses.push_back(loss_sal(pred, s.gt, cfg.alpha, cfg.beta));
    }
    return nn::scale(nn::add_n(losses), 1.0 / static_cast<double>(data.size()));
  };
  return nn::run_training(batch_loss, decoder.params(), opts);
}

std::vector<SalManifestRow> read_oisal_manifest(const CsvTable& table,
                                                const std::filesystem::path& base_dir) {
  const std::size_t ci = table.column("input"), cp = table.column("prompt"),
                    cg = table.column("gt_map"), cs = table.column("scene_id");
  auto resolve = [&](const std::string& s) {
    const std::filesystem::path p(s);
    return (p.is_absolute() ? p : base_dir / p).string();
  };
  std::vector<SalManifestRow> rows;
  for (const auto& r : table.rows()) {
    rows.push_back({resolve(r[ci]), r[cp], resolve(r[cg]), r[cs]});
  }
  if (rows.empty()) throw DataError("manifest has no rows");
  return rows;
}

}  // namespace omniqa
