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

#include "omniqa/nn/encoder.h"

#include <cctype>
#include <cmath>
#include <string>

#include "omniqa/error.h"
#include "omniqa/nn/ops.h"

namespace omniqa::nn {
namespace {

// Sinusoidal code: first half of the channels encodes the row, second half
// the column.
Tensor grid_position_code(int gh, int gw, int dim) {
  const int quarter = dim / 4;
  std::vector<double> v(static_cast<std::size_t>(gh) * gw * dim, 0.0);
  for (int r = 0; r < gh; ++r) {
    for (int c = 0; c < gw; ++c) {
      double* row = v.data() + (static_cast<std::size_t>(r) * gw + c) * dim;
      for (int i = 0; i < quarter; ++i) {
        const double w = std::pow(10000.0, -static_cast<double>(i) / quarter);
        row[2 * i] = std::sin(r * w);
        row[2 * i + 1] = std::cos(r * w);
        row[dim / 2 + 2 * i] = std::sin(c * w);
        row[dim / 2 + 2 * i + 1] = std::cos(c * w);
      }
    }
  }
  return Tensor::from({gh * gw, dim}, std::move(v));
}

}  // namespace

std::array<int, 5> EncoderConfig::tap_layers() const {
  std::array<int, 5> out{};
  if (taps.empty()) {
    for (int k = 0; k < 5; ++k) {
      out[k] = static_cast<int>(std::lround(depth * (k + 1) / 5.0));
    }
    return out;
  }
  if (taps.size() != 5) {
    throw RangeError("encoder needs exactly 5 tap layers, got " +
                     std::to_string(taps.size()));
  }
  for (int k = 0; k < 5; ++k) out[k] = taps[k];
  return out;
}

void EncoderConfig::validate() const {
  if (patch < 1) throw RangeError("encoder patch size must be positive");
  if (dim < 4 || dim % 4 != 0) throw RangeError("encoder dim must be a positive multiple of 4");
  if (heads < 1 || dim % heads != 0) throw RangeError("encoder dim must be divisible by heads");
  if (depth < 5) throw RangeError("encoder depth must be at least 5 to host 5 taps");
  if (queries < 1) throw RangeError("encoder needs at least one query token");
  if (vocab < 1) throw RangeError("encoder vocabulary must be non-empty");
  if (max_text_tokens < 0) throw RangeError("max_text_tokens must be non-negative");
  const auto t = tap_layers();
  for (int k = 0; k < 5; ++k) {
    if (t[k] < 1 || t[k] > depth || (k > 0 && t[k] <= t[k - 1])) {
      throw RangeError("tap layers must be strictly increasing within [1, depth]");
    }
  }
}

nlohmann::json to_json(const EncoderConfig& cfg) {
  const auto t = cfg.tap_layers();
  return {{"patch", cfg.patch},     {"dim", cfg.dim},
          {"depth", cfg.depth},     {"heads", cfg.heads},
          {"queries", cfg.queries}, {"vocab", cfg.vocab},
          {"max_text_tokens", cfg.max_text_tokens},
          {"taps", std::vector<int>(t.begin(), t.end())},
          {"seed", cfg.seed}};
}

EncoderConfig encoder_config_from_json(const nlohmann::json& j) {
  EncoderConfig cfg;
  try {
    cfg.patch = j.at("patch").get<int>();
    cfg.dim = j.at("dim").get<int>();
    cfg.depth = j.at("depth").get<int>();
    cfg.heads = j.at("heads").get<int>();
    cfg.queries = j.at("queries").get<int>();
    cfg.vocab = j.at("vocab").get<int>();
    cfg.max_text_tokens = j.at("max_text_tokens").get<int>();
    cfg.taps = j.at("taps").get<std::vector<int>>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("encoder config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

std::vector<int> hash_tokens(std::string_view text, int vocab, int max_tokens) {
  std::vector<int> ids;
  std::uint64_t h = 0;
  bool in_word = false;
  auto flush = [&] {
    if (in_word && static_cast<int>(ids.size()) < max_tokens) {
      ids.push_back(static_cast<int>(h % static_cast<std::uint64_t>(vocab)));
    }
    in_word = false;
  };
  for (char ch : text) {
    const unsigned char c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      if (!in_word) {
        h = 0xcbf29ce484222325ULL;
        in_word = true;
      }
      h ^= static_cast<std::uint64_t>(std::tolower(c));
      h *= 0x100000001b3ULL;
    } else {
      flush();
    }
  }
  flush();
  return ids;
}

Tensor image_tensor(const Raster& image) {
  const int w = image.width(), h = image.height(), ch = image.channels();
  std::vector<double> v(3 * static_cast<std::size_t>(w) * h);
  const std::size_t plane = static_cast<std::size_t>(w) * h;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) {
        const double s = image.at(x, y, ch == 3 ? c : 0);
        v[c * plane + static_cast<std::size_t>(y) * w + x] = 2.0 * s - 1.0;
      }
    }
  }
  return Tensor::from({3, h, w}, std::move(v));
}

EncoderStub::EncoderStub(EncoderConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  taps_ = cfg_.tap_layers();
  Rng rng(cfg_.seed);
  const int d = cfg_.dim;
  patch_embed_ = Linear(3 * cfg_.patch * cfg_.patch, d, rng);
  for (int i = 0; i < cfg_.depth; ++i) blocks_.emplace_back(d, cfg_.heads, 2 * d, rng);
  image_ln_ = LayerNorm(d);
  query_tokens_ = init_fan_in({cfg_.queries, d}, 100, rng);
  text_table_ = init_fan_in({cfg_.vocab, d}, 1, rng);
  qf_ln_self_ = LayerNorm(d);
  qf_ln_cross_ = LayerNorm(d);
  qf_ln_mlp_ = LayerNorm(d);
  qf_ln_out_ = LayerNorm(d);
  qf_self_ = MultiHeadAttention(d, cfg_.heads, rng);
  qf_cross_ = MultiHeadAttention(d, cfg_.heads, rng);
  qf_mlp_ = Mlp(d, 2 * d, d, rng);
  set_trainable(params(), false);
}

ParamList EncoderStub::params() const {
  ParamList out;
  patch_embed_.collect("encoder.patch_embed", out);
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    blocks_[i].collect("encoder.block" + std::to_string(i + 1), out);
  }
  image_ln_.collect("encoder.image_ln", out);
  out.push_back({"encoder.query_tokens", query_tokens_});
  out.push_back({"encoder.text_table", text_table_});
  qf_ln_self_.collect("encoder.qformer.ln_self", out);
  qf_self_.collect("encoder.qformer.self", out);
  qf_ln_cross_.collect("encoder.qformer.ln_cross", out);
  qf_cross_.collect("encoder.qformer.cross", out);
  qf_ln_mlp_.collect("encoder.qformer.ln_mlp", out);
  qf_mlp_.collect("encoder.qformer.mlp", out);
  qf_ln_out_.collect("encoder.qformer.ln_out", out);
  return out;
}

Tensor EncoderStub::text_tokens(std::string_view prompt) const {
  const auto ids = hash_tokens(prompt, cfg_.vocab, cfg_.max_text_tokens);
  const int d = cfg_.dim;
  std::vector<double> v(ids.size() * d);
  auto table = text_table_.data();
  for (std::size_t t = 0; t < ids.size(); ++t) {
    for (int i = 0; i < d; ++i) {
      // Position code keeps word order visible to the query transformer.
      const double w = std::pow(10000.0, -static_cast<double>(i / 2) * 2.0 / d);
      const double pos = (i % 2 == 0) ? std::sin(t * w) : std::cos(t * w);
      v[t * d + i] = table[static_cast<std::size_t>(ids[t]) * d + i] + pos;
    }
  }
  return Tensor::from({static_cast<int>(ids.size()), d}, std::move(v));
}

EncodedFeatures EncoderStub::encode(const Raster& image, std::string_view prompt) const {
  const int p = cfg_.patch, d = cfg_.dim;
  const int w = image.width(), h = image.height();
  if (w % p != 0 || h % p != 0 || w == 0 || h == 0) {
    throw ShapeError("image " + std::to_string(h) + "x" + std::to_string(w) +
                     " is not divisible by patch size " + std::to_string(p));
  }
  const int gh = h / p, gw = w / p;
  const int ch = image.channels();
  const int pd = 3 * p * p;
  std::vector<double> patches(static_cast<std::size_t>(gh) * gw * pd);
  for (int r = 0; r < gh; ++r) {
    for (int c = 0; c < gw; ++c) {
      double* row = patches.data() + (static_cast<std::size_t>(r) * gw + c) * pd;
      for (int k = 0; k < 3; ++k) {
        for (int y = 0; y < p; ++y) {
          for (int x = 0; x < p; ++x) {
            const double s = image.at(c * p + x, r * p + y, ch == 3 ? k : 0);
            row[(k * p + y) * p + x] = 2.0 * s - 1.0;
          }
        }
      }
    }
  }
  Tensor x = add(patch_embed_.forward(Tensor::from({gh * gw, pd}, std::move(patches))),
                 scale(grid_position_code(gh, gw, d), 0.1));

  EncodedFeatures out;
  int next_tap = 0;
  for (int i = 0; i < cfg_.depth; ++i) {
    x = blocks_[i].forward(x);
    if (next_tap < 5 && taps_[next_tap] == i + 1) {
      out.taps[next_tap++] = reshape(transpose(x), {d, gh, gw});
    }
  }
  const Tensor image_tokens = image_ln_.forward(x);

  const Tensor text = text_tokens(prompt);
  Tensor q = text.dim(0) > 0 ? concat_rows({query_tokens_, text}) : query_tokens_;
  const Tensor hq = qf_ln_self_.forward(q);
  q = slice_rows(add(q, qf_self_.forward(hq, hq)), 0, cfg_.queries);
  q = add(q, qf_cross_.forward(qf_ln_cross_.forward(q), image_tokens));
  q = add(q, qf_mlp_.forward(qf_ln_mlp_.forward(q)));
  out.fused = qf_ln_out_.forward(q);
  return out;
}

}  // namespace omniqa::nn
