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


#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "doctest.h"
#include "omniqa/error.h"
#include "omniqa/png_io.h"
#include "omniqa/saliency.h"
#include "oracles.h"
#include "test_util.h"

namespace omniqa {
namespace {

double total(const SaliencyMap& m) {
  return std::accumulate(m.values.begin(), m.values.end(), 0.0);
}

PixelIndex argmax(const SaliencyMap& m) {
  PixelIndex best{0, 0};
  for (int y = 0; y < m.height; ++y) {
    for (int x = 0; x < m.width; ++x) {
      if (m.at(x, y) > m.at(best.x, best.y)) best = {x, y};
    }
  }
  return best;
}

std::vector<double> row(const SaliencyMap& m, int y) {
  std::vector<double> r(m.width);
  for (int x = 0; x < m.width; ++x) r[x] = m.at(x, y);
  return r;
}

FixationSet at_pixel(int x, int y, int w, int h) {
  return {"img", {pixel_to_direction({x, y}, w, h)}, {""}};
}

TEST_CASE("single fixation: unit mass and peak on the fixation pixel") {
  const FixationSet f = at_pixel(512, 256, 1024, 512);
  const SaliencyMap m = fixations_to_map(f, 1024, 512);
  CHECK(std::abs(total(m) - 1.0) < 1e-6);
  CHECK(argmax(m) == PixelIndex{512, 256});
  CHECK(m.normalization == Normalization::kDensity);
  const SaliencyMap c = fixations_to_map({"c", {{0.0, 0.0}}, {}}, 1024, 512);
  CHECK(argmax(c) == direction_to_pixel({0.0, 0.0}, 1024, 512));
}

TEST_CASE("coincident fixations equal one fixation after normalization") {
  FixationSet one{"a", {{20.0, -10.0}}, {}};
  FixationSet two{"a", {{20.0, -10.0}, {20.0, -10.0}}, {}};
  const SaliencyMap a = fixations_to_map(one, 128, 64), b = fixations_to_map(two, 128, 64);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a.values[i] - b.values[i]) < 1e-15);
}

TEST_CASE("horizontal spread doubles at 60 degrees latitude") {
  const int w = 1024, h = 512;
  BlurOptions blur;
  blur.sigma_deg = 2.0;
  const int y60 = 85;  // row centre at 60.1 degrees
  const SaliencyMap eq = fixations_to_map(at_pixel(300, 255, w, h), w, h, blur);
  const SaliencyMap hi = fixations_to_map(at_pixel(300, y60, w, h), w, h, blur);
  const double s_eq = oracle::fitted_sigma(row(eq, 255), 300);
  const double s_hi = oracle::fitted_sigma(row(hi, y60), 300);
  CHECK(std::abs(s_eq - blur.sigma_deg / 360.0 * w) < 0.05 * s_eq);
  CHECK(std::abs(s_hi / s_eq - 2.0) < 0.2);
}

TEST_CASE("mass is conserved for any number of fixations") {
  FixationSet f{"m", {}, {}};
  for (int k = 0; k < 40; ++k) {
    f.points.push_back({-180.0 + 9.0 * k, -85.0 + 4.25 * k});
    const SaliencyMap m = fixations_to_map(f, 256, 128);
    CHECK(std::abs(total(m) - 1.0) < 1e-6);
  }
}

TEST_CASE("shifting longitudes by whole pixels shifts the map") {
  const int w = 256, h = 128, k = 37;
  FixationSet a{"a", {{10.0, 5.0}, {-170.0, 40.0}, {175.0, -60.0}}, {}};
  FixationSet b = a;
  for (auto& p : b.points) p.longitude = wrap_longitude(p.longitude + 360.0 * k / w);
  BlurOptions blur;
  blur.sigma_deg = 3.0;
  const SaliencyMap ma = fixations_to_map(a, w, h, blur), mb = fixations_to_map(b, w, h, blur);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) CHECK(std::abs(ma.at(x, y) - mb.at((x + k) % w, y)) < 1e-12);
  }
}

TEST_CASE("adding a fixation never lowers the unnormalized map") {
  FixationSet f{"m", {{0.0, 0.0}}, {}};
  BlurOptions blur;
  blur.sigma_deg = 5.0;
  SaliencyMap prev = accumulate_fixations(f, 128, 64, blur);
  for (int k = 0; k < 5; ++k) {
    f.points.push_back({-150.0 + 60.0 * k, 30.0 - 15.0 * k});
    const SaliencyMap next = accumulate_fixations(f, 128, 64, blur);
    for (std::size_t i = 0; i < prev.size(); ++i) CHECK(next.values[i] >= prev.values[i]);
    prev = next;
  }
}

TEST_CASE("blur wraps across the seam") {
  BlurOptions blur;
  blur.sigma_deg = 4.0;
  const SaliencyMap m = fixations_to_map({"s", {{-179.9, 0.0}}, {}}, 128, 64, blur);
  CHECK(m.at(127, 32) > 0.1 * m.at(0, 32));
}

TEST_CASE("peak normalization") {
  const SaliencyMap d = fixations_to_map({"p", {{30.0, 30.0}, {-60.0, 0.0}}, {}}, 64, 32,
                                         {.sigma_deg = 10.0});
  const SaliencyMap p = to_peak_normalized(d);
  CHECK(*std::max_element(p.values.begin(), p.values.end()) == 1.0);
  CHECK(p.normalization == Normalization::kPeak);
  const SaliencyMap pp = to_peak_normalized(p);
  CHECK(pp.values == p.values);
  for (std::size_t i = 1; i < d.size(); ++i) {
    CHECK((d.values[i] < d.values[i - 1]) == (p.values[i] < p.values[i - 1]));
  }
  CHECK_THROWS_AS(to_peak_normalized(SaliencyMap(8, 4)), DegenerateError);
  CHECK_THROWS_AS(to_density(SaliencyMap(8, 4)), DegenerateError);
}

TEST_CASE("invalid fixation input") {
  CHECK_THROWS_AS(fixations_to_map({"e", {}, {}}, 64, 32), DataError);
  CHECK_THROWS_AS(fixations_to_map({"e", {{0, 0}}, {}}, 64, 30), ShapeError);
  CHECK_THROWS_AS(fixations_to_map({"e", {{0, 0}}, {}}, 64, 32, {.sigma_deg = 0.0}), RangeError);
  std::istringstream bad("image_id,longitude_deg,latitude_deg\na,10,95\n");
  CHECK_THROWS_AS(read_fixations(CsvTable::parse(bad)), RangeError);
}

TEST_CASE("fixation CSV groups points by image in file order") {
  std::istringstream in(
      "image_id,longitude_deg,latitude_deg,note\n"
      "b,10,20,blur\n"
      "a,-30,0,\n"
      "b,180,-5,seam\n");
  const auto sets = read_fixations(CsvTable::parse(in));
  REQUIRE(sets.size() == 2);
  CHECK(sets[0].image_id == "b");
  CHECK(sets[0].points.size() == 2);
  CHECK(sets[0].points[1].longitude == -180.0);
  CHECK(sets[0].notes[1] == "seam");
  CHECK(sets[1].points[0].longitude == -30.0);
}

TEST_CASE("float-map files keep shape, tag and 32-bit values") {
  test::TempDir dir;
  const SaliencyMap m = fixations_to_map({"f", {{0.0, 0.0}}, {}}, 64, 32, {.sigma_deg = 8.0});
  const auto path = dir.path() / "m.oqfm";
  write_float_map(path, m);
  const SaliencyMap back = read_float_map(path);
  CHECK(back.width == 64);
  CHECK(back.height == 32);
  CHECK(back.normalization == Normalization::kDensity);
  for (std::size_t i = 0; i < m.size(); ++i) {
    CHECK(back.values[i] == static_cast<double>(static_cast<float>(m.values[i])));
  }
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(0);
    f.write("XXXX", 4);
  }
  CHECK_THROWS_AS(read_float_map(path), FormatError);
  std::filesystem::resize_file(path, 20);
  CHECK_THROWS_AS(read_float_map(path), FormatError);
}

TEST_CASE("preview PNG is peak normalized") {
  test::TempDir dir;
  const SaliencyMap m = fixations_to_map({"f", {{0.0, 0.0}}, {}}, 64, 32, {.sigma_deg = 8.0});
  write_preview_png(dir.path() / "p.png", m);
  const SaliencyMap r = from_raster(to_gray(read_png(dir.path() / "p.png")));
  CHECK(*std::max_element(r.values.begin(), r.values.end()) == doctest::Approx(1.0));
}

}  // namespace
}  // namespace omniqa
