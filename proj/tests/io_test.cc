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


#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "omniqa/csv.h"
#include "omniqa/error.h"
#include "omniqa/nn/encoder.h"
#include "omniqa/nn/ops.h"
#include "omniqa/nn/tensor_io.h"
#include "omniqa/png_io.h"
#include "test_util.h"

namespace omniqa {
namespace {

namespace fs = std::filesystem;
using nn::Tensor;

nn::EncoderConfig small_encoder() {
  nn::EncoderConfig c;
  c.patch = 8;
  c.dim = 16;
  c.depth = 5;
  c.heads = 2;
  c.queries = 8;
  c.seed = 3;
  return c;
}

// Writes a tensor file whose header is supplied verbatim.
void write_raw(const fs::path& path, const nlohmann::json& header, const std::string& payload) {
  const std::string text = header.dump();
  const std::uint64_t len = text.size();
  std::ofstream out(path, std::ios::binary);
  out.write("OQTENSR1", 8);
  out.write(reinterpret_cast<const char*>(&len), 8);
  out << text << payload;
}

std::string message_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const FormatError& e) {
    return e.what();
  }
  return "";
}

TEST_CASE("PNG round trip at 8 and 16 bits") {
  test::TempDir dir;
  const Raster img = test::smooth_erp(16, 2);
  for (int depth : {8, 16}) {
    const fs::path p = dir.path() / ("x" + std::to_string(depth) + ".png");
    write_png(p, img, depth);
    const Raster back = read_png(p);
    REQUIRE(back.same_shape(img));
    const double tol = 0.5 / (depth == 8 ? 255.0 : 65535.0) + 1e-7;
    for (std::size_t i = 0; i < img.data().size(); ++i) {
      CHECK(std::abs(back.data()[i] - img.data()[i]) <= tol);
    }
  }
  const Raster g(5, 3, 1, 0.5f);
  write_png(dir.path() / "g.png", g);
  CHECK(read_png(dir.path() / "g.png").channels() == 1);
  CHECK_THROWS_AS(write_png(dir.path() / "b.png", g, 12), RangeError);
  std::ofstream(dir.path() / "junk.png") << "not a png";
  CHECK_THROWS_AS(read_png(dir.path() / "junk.png"), FormatError);
  CHECK_THROWS_AS(read_png(dir.path() / "missing.png"), FormatError);
}

TEST_CASE("ERP shape checks") {
  CHECK_NOTHROW(check_erp(Raster(8, 4, 3)));
  CHECK_THROWS_AS(check_erp(Raster(8, 5, 3)), ShapeError);
  CHECK_THROWS_AS(check_erp(Raster(8, 4, 2)), ShapeError);
}

TEST_CASE("CSV quoting survives a round trip") {
  CsvTable t({"a", "b"});
  t.add_row({"plain", "with, comma"});
  t.add_row({"quote \"q\"", "line\nbreak"});
  std::ostringstream out;
  t.write(out);
  std::istringstream in(out.str());
  const CsvTable back = CsvTable::parse(in);
  CHECK(back.header() == t.header());
  CHECK(back.rows() == t.rows());
  CHECK_THROWS_AS(t.add_row({"short"}), FormatError);
  std::istringstream ragged("a,b\n1\n");
  CHECK_THROWS_AS(CsvTable::parse(ragged), FormatError);
  std::istringstream open("a\n\"never closed\n");
  CHECK_THROWS_AS(CsvTable::parse(open), FormatError);
  CHECK_THROWS_AS(t.column("zzz"), FormatError);
}

TEST_CASE("numbers format shortest and parse strictly") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(parse_double(format_double(1.0 / 3.0), "x") == 1.0 / 3.0);
  CHECK_THROWS_AS(parse_double("1.5abc", "x"), FormatError);
  CHECK_THROWS_AS(parse_int("2.5", "n"), FormatError);
  CHECK(parse_int("-7", "n") == -7);
}

TEST_CASE("tensor files round trip exactly in f64 and to f32 precision") {
  test::TempDir dir;
  nn::TensorFile f;
  f.meta = {{"kind", "test"}};
  f.tensors.push_back({"a", Tensor::from({2, 3}, {1.0 / 3, 2, 3, 4, 5, 6e-9})});
  f.tensors.push_back({"b", Tensor::from({1}, {-0.1})});
  nn::write_tensor_file(dir.path() / "t.oqt", f);
  const nn::TensorFile back = nn::read_tensor_file(dir.path() / "t.oqt");
  CHECK(back.meta["kind"] == "test");
  CHECK(back.get("a").shape() == nn::Shape{2, 3});
  for (std::size_t i = 0; i < 6; ++i) CHECK(back.get("a").data()[i] == f.get("a").data()[i]);
  nn::write_tensor_file(dir.path() / "s.oqt", f, nn::DType::kF32);
  const nn::TensorFile s = nn::read_tensor_file(dir.path() / "s.oqt");
  CHECK(s.get("b").data()[0] == static_cast<double>(-0.1f));
  CHECK_THROWS_AS(back.get("c"), FormatError);
}

TEST_CASE("malformed tensor files name the offending field") {
  test::TempDir dir;
  const fs::path p = dir.path() / "bad.oqt";
  const nlohmann::json good = {{"format", "omniqa-tensors"},
                               {"version", 1},
                               {"meta", nlohmann::json::object()},
                               {"tensors",
                                {{{"name", "x"}, {"dtype", "f64"}, {"shape", {2}},
                                  {"offset", 0}, {"nbytes", 16}}}}};
  const std::string payload(16, '\0');
  write_raw(p, good, payload);
  CHECK_NOTHROW(nn::read_tensor_file(p));

  auto with = [&](const std::function<void(nlohmann::json&)>& edit, const std::string& body) {
    nlohmann::json h = good;
    edit(h);
    write_raw(p, h, body);
    return message_of([&] { nn::read_tensor_file(p); });
  };
  CHECK(with([](auto& h) { h["tensors"][0]["shape"] = {3}; }, payload).find("shape") != std::string::npos);
  CHECK(with([](auto& h) { h["tensors"][0]["dtype"] = "i8"; }, payload).find("dtype") != std::string::npos);
  CHECK(with([](auto& h) { h["version"] = 9; }, payload).find("version") != std::string::npos);
  CHECK(with([](auto& h) { h["format"] = "other"; }, payload).find("format") != std::string::npos);
  CHECK(with([](auto&) {}, payload.substr(0, 9)).find("offset") != std::string::npos);
  CHECK(with([](auto&) {}, payload + "xx").find("payload") != std::string::npos);

  std::ofstream(p, std::ios::binary) << "NOTATENSOR";
  CHECK(message_of([&] { nn::read_tensor_file(p); }).find("magic") != std::string::npos);
}

TEST_CASE("exported features import bit-identically and are validated") {
  test::TempDir dir;
  const nn::EncoderStub enc(small_encoder());
  const nn::EncodedFeatures f = enc.encode(test::smooth_erp(16, 4), "a red car");
  const fs::path p = dir.path() / "f.oqt";
  nn::export_features(p, f);
  const nn::EncodedFeatures back = nn::import_features(p);
  CHECK(back.fused.shape() == f.fused.shape());
  CHECK(std::equal(back.fused.data().begin(), back.fused.data().end(), f.fused.data().begin()));
  for (int k = 0; k < 5; ++k) {
    CHECK(back.taps[k].shape() == f.taps[k].shape());
    CHECK(std::equal(back.taps[k].data().begin(), back.taps[k].data().end(),
                     f.taps[k].data().begin()));
  }
  // Truncation anywhere in the payload is caught before anything is returned.
  std::filesystem::resize_file(p, std::filesystem::file_size(p) - 8);
  CHECK_THROWS_AS(nn::import_features(p), FormatError);

  nn::TensorFile wrong;
  wrong.tensors.push_back({"fused", f.fused});
  for (int k = 0; k < 5; ++k) {
    wrong.tensors.push_back({"f" + std::to_string(k + 1),
                             k == 2 ? Tensor::zeros({f.taps[k].dim(0) + 1, 2, 4}) : f.taps[k]});
  }
  nn::write_tensor_file(p, wrong);
  CHECK(message_of([&] { nn::import_features(p); }).find("f3") != std::string::npos);
}

TEST_CASE("parameter files restore values and reject shape mismatches") {
  test::TempDir dir;
  Tensor w = Tensor::from({2, 2}, {1, 2, 3, 4}, true);
  nn::ParamList params = {{"w", w}};
  nn::write_tensor_file(dir.path() / "p.oqt", nn::params_to_file(params));
  w.data()[0] = 99;
  nn::load_params(params, nn::read_tensor_file(dir.path() / "p.oqt"));
  CHECK(w.data()[0] == 1);
  Tensor other = Tensor::zeros({3});
  CHECK_THROWS_AS(nn::load_params({{"w", other}}, nn::read_tensor_file(dir.path() / "p.oqt")),
                  FormatError);
}

TEST_CASE("encoder output is deterministic with the declared shapes") {
  const nn::EncoderConfig cfg = small_encoder();
  const Raster img = test::smooth_erp(16, 5);  // 16 x 32 -> 2 x 4 patches
  const nn::EncodedFeatures a = nn::EncoderStub(cfg).encode(img, "sunset over water");
  const nn::EncodedFeatures b = nn::EncoderStub(cfg).encode(img, "sunset over water");
  CHECK(a.fused.shape() == nn::Shape{8, 16});
  CHECK(std::equal(a.fused.data().begin(), a.fused.data().end(), b.fused.data().begin()));
  for (int k = 0; k < 5; ++k) {
    CHECK(a.taps[k].shape() == nn::Shape{16, 2, 4});
    CHECK(std::equal(a.taps[k].data().begin(), a.taps[k].data().end(), b.taps[k].data().begin()));
  }
  nn::EncoderConfig other = cfg;
  other.seed = 4;
  const nn::EncodedFeatures c = nn::EncoderStub(other).encode(img, "sunset over water");
  CHECK_FALSE(std::equal(a.fused.data().begin(), a.fused.data().end(), c.fused.data().begin()));
}

TEST_CASE("the prompt reaches the fused tokens but not the image taps") {
  const nn::EncoderStub enc(small_encoder());
  const Raster img = test::smooth_erp(16, 6);
  const nn::EncodedFeatures a = enc.encode(img, "a quiet forest");
  const nn::EncodedFeatures b = enc.encode(img, "a crowded market");
  CHECK_FALSE(std::equal(a.fused.data().begin(), a.fused.data().end(), b.fused.data().begin()));
  for (int k = 0; k < 5; ++k) {
    CHECK(std::equal(a.taps[k].data().begin(), a.taps[k].data().end(), b.taps[k].data().begin()));
  }
}

TEST_CASE("encoder configuration is validated") {
  nn::EncoderConfig c = small_encoder();
  CHECK(c.tap_layers() == std::array<int, 5>{1, 2, 3, 4, 5});
  c.depth = 6;
  CHECK(c.tap_layers() == std::array<int, 5>{1, 2, 4, 5, 6});
  c.taps = {1, 3, 2, 5, 6};
  CHECK_THROWS_AS(c.validate(), RangeError);
  c.taps = {1, 2, 3};
  CHECK_THROWS_AS(c.validate(), RangeError);
  c.taps = {};
  c.depth = 4;
  CHECK_THROWS_AS(c.validate(), RangeError);
  c.depth = 5;
  c.queries = 0;
  CHECK_THROWS_AS(c.validate(), RangeError);
  const nn::EncoderConfig ok = small_encoder();
  const nn::EncoderConfig round = nn::encoder_config_from_json(nn::to_json(ok));
  CHECK(round.patch == ok.patch);
  CHECK(round.seed == ok.seed);
  CHECK_THROWS_AS(nn::EncoderStub(small_encoder()).encode(Raster(20, 10, 3), "x"), ShapeError);
}

TEST_CASE("text hashing is case-insensitive and bounded") {
  const auto a = nn::hash_tokens("A Red car!", 1024, 16);
  const auto b = nn::hash_tokens("a red CAR", 1024, 16);
  CHECK(a == b);
  CHECK(a.size() == 3);
  for (int t : a) CHECK((t >= 0 && t < 1024));
  CHECK(nn::hash_tokens("one two three four", 1024, 2).size() == 2);
}

}  // namespace
}  // namespace omniqa
