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

#include "omniqa/saliency.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <numbers>

#include "json.hpp"
#include "omniqa/error.h"
#include "omniqa/png_io.h"

namespace omniqa {
namespace {

constexpr char kFloatMapMagic[8] = {'O', 'Q', 'F', 'M', 'A', 'P', '0', '1'};

static_assert(std::endian::native == std::endian::little,
              "float-map IO assumes a little-endian host");

std::vector<double> gaussian_kernel(double sigma, int radius) {
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += k[i + radius];
  }
  for (double& v : k) v /= sum;
  return k;
}

}  // namespace

const char* to_string(Normalization n) {
  switch (n) {
    case Normalization::kDensity:
      return "density";
    case Normalization::kPeak:
      return "peak";
    case Normalization::kNone:
      break;
  }
  return "none";
}

Normalization parse_normalization(const std::string& s) {
  if (s == "density") return Normalization::kDensity;
  if (s == "peak") return Normalization::kPeak;
  if (s == "none") return Normalization::kNone;
  throw FormatError("unknown normalization tag '" + s + "'");
}

std::string SaliencyMap::shape_string() const {
  return std::to_string(height) + "x" + std::to_string(width);
}

void check_saliency(const SaliencyMap& map) {
  if (map.values.size() != static_cast<std::size_t>(map.width) * map.height) {
    throw ShapeError("saliency map payload does not match " + map.shape_string());
  }
  double sum = 0.0, peak = 0.0;
  for (double v : map.values) {
    if (!std::isfinite(v) || v < 0.0) {
      throw RangeError("saliency values must be finite and nonnegative");
    }
    sum += v;
    peak = std::max(peak, v);
  }
  if (map.normalization == Normalization::kDensity && std::abs(sum - 1.0) > 1e-6) {
    throw DataError("density-tagged map sums to " + format_double(sum));
  }
  if (map.normalization == Normalization::kPeak && std::abs(peak - 1.0) > 1e-6) {
    throw DataError("peak-tagged map has maximum " + format_double(peak));
  }
}

std::vector<FixationSet> read_fixations(const CsvTable& table) {
  const std::size_t ci = table.column("image_id");
  const std::size_t clon = table.column("longitude_deg");
  const std::size_t clat = table.column("latitude_deg");
  const bool has_note = table.has_column("note");
  const std::size_t cn = has_note ? table.column("note") : 0;
  std::vector<FixationSet> sets;
  std::map<std::string, std::size_t> lookup;
  for (const auto& row : table.rows()) {
    const double lon = parse_double(row[clon], "longitude_deg");
    const double lat = parse_double(row[clat], "latitude_deg");
    if (!(lon >= -180.0 && lon <= 180.0) || !(lat >= -90.0 && lat <= 90.0)) {
      throw RangeError("fixation (" + row[clon] + ", " + row[clat] +
                       ") for image '" + row[ci] + "' is out of range");
    }
    auto [it, inserted] = lookup.emplace(row[ci], sets.size());
    if (inserted) sets.push_back({row[ci], {}, {}});
    FixationSet& set = sets[it->second];
    set.points.push_back({wrap_longitude(lon), lat});
    set.notes.push_back(has_note ? row[cn] : std::string());
  }
  return sets;
}

std::vector<PixelIndex> fixation_pixels(const FixationSet& fix, int width,
                                        int height) {
  std::vector<PixelIndex> out;
  out.reserve(fix.points.size());
  for (const auto& p : fix.points) {
    out.push_back(direction_to_pixel(p, width, height));
  }
  return out;
}

SaliencyMap accumulate_fixations(const FixationSet& fix, int width, int height,
                                 const BlurOptions& opts) {
  if (fix.points.empty()) {
    throw DataError("fixation set '" + fix.image_id + "' has no points");
  }
  if (!(opts.sigma_deg > 0.0)) throw RangeError("sigma_deg must be positive");
  if (height < 1 || width != 2 * height) {
    throw ShapeError("saliency maps must be ERP shaped (width == 2*height)");
  }
  const double sigma = opts.sigma_deg / 360.0 * width;
  const int vr = std::max(1, static_cast<int>(std::ceil(opts.truncate * sigma)));
  const std::vector<double> vk = gaussian_kernel(sigma, vr);

  // Horizontal kernels depend only on the row.
  std::vector<std::vector<double>> hk(height);
  for (int r = 0; r < height; ++r) {
    const double lat = 90.0 - (r + 0.5) / height * 180.0;
    const double stretch =
        std::min(1.0 / std::cos(lat * std::numbers::pi / 180.0), opts.max_stretch);
    const double hs = sigma * stretch;
    int hr = std::max(1, static_cast<int>(std::ceil(opts.truncate * hs)));
    hr = std::min(hr, (width - 1) / 2);
    hk[r] = gaussian_kernel(hs, hr);
  }

  SaliencyMap map(width, height);
  for (const PixelIndex p : fixation_pixels(fix, width, height)) {
    for (int dy = -vr; dy <= vr; ++dy) {
      const int r = std::clamp(p.y + dy, 0, height - 1);
      const double wv = vk[dy + vr];
      const auto& k = hk[r];
      const int hr = static_cast<int>(k.size() / 2);
      for (int dx = -hr; dx <= hr; ++dx) {
        int c = (p.x + dx) % width;
        if (c < 0) c += width;
        map.at(c, r) += wv * k[dx + hr];
      }
    }
  }
  return map;
}

SaliencyMap fixations_to_map(const FixationSet& fix, int width, int height,
                             const BlurOptions& opts) {
  return to_density(accumulate_fixations(fix, width, height, opts));
}

SaliencyMap to_peak_normalized(const SaliencyMap& map) {
  const double peak =
      map.values.empty() ? 0.0 : *std::max_element(map.values.begin(), map.values.end());
  if (!(peak > 0.0)) throw DegenerateError("cannot peak-normalize an all-zero map");
  SaliencyMap out = map;
  for (double& v : out.values) v /= peak;
  out.normalization = Normalization::kPeak;
  return out;
}

SaliencyMap to_density(const SaliencyMap& map) {
  double sum = 0.0;
  for (double v : map.values) sum += v;
  if (!(sum > 0.0)) throw DegenerateError("cannot density-normalize an all-zero map");
  SaliencyMap out = map;
  for (double& v : out.values) v /= sum;
  out.normalization = Normalization::kDensity;
  return out;
}

void write_float_map(const std::filesystem::path& path, const SaliencyMap& map) {
  nlohmann::json header = {{"dtype", "f32"},
                           {"height", map.height},
                           {"width", map.width},
                           {"normalization", to_string(map.normalization)}};
  const std::string text = header.dump();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot create " + path.string());
  out.write(kFloatMapMagic, 8);
  const auto len = static_cast<std::uint32_t>(text.size());
  out.write(reinterpret_cast<const char*>(&len), 4);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  std::vector<float> payload(map.values.begin(), map.values.end());
  out.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size() * sizeof(float)));
  if (!out) throw FormatError("write failed for " + path.string());
}

SaliencyMap read_float_map(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open float map " + path.string());
  char magic[8];
  std::uint32_t len = 0;
  if (!in.read(magic, 8) || std::memcmp(magic, kFloatMapMagic, 8) != 0) {
    throw FormatError(path.string() + ": bad float-map magic");
  }
  if (!in.read(reinterpret_cast<char*>(&len), 4) || len > (1u << 20)) {
    throw FormatError(path.string() + ": bad float-map header length");
  }
  std::string text(len, '\0');
  if (!in.read(text.data(), len)) {
    throw FormatError(path.string() + ": truncated float-map header");
  }
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": float-map header is not JSON");
  }
  SaliencyMap map;
  try {
    if (header.at("dtype").get<std::string>() != "f32") {
      throw FormatError(path.string() + ": float-map dtype must be f32");
    }
    map.width = header.at("width").get<int>();
    map.height = header.at("height").get<int>();
    map.normalization =
        parse_normalization(header.at("normalization").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": float-map header field error: " +
                      e.what());
  }
  if (map.width <= 0 || map.height <= 0) {
    throw FormatError(path.string() + ": non-positive float-map extent");
  }
  std::vector<float> payload(static_cast<std::size_t>(map.width) * map.height);
  if (!in.read(reinterpret_cast<char*>(payload.data()),
               static_cast<std::streamsize>(payload.size() * sizeof(float)))) {
    throw FormatError(path.string() + ": truncated float-map payload");
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw FormatError(path.string() + ": trailing bytes after float-map payload");
  }
  map.values.assign(payload.begin(), payload.end());
  return map;
}

void write_preview_png(const std::filesystem::path& path, const SaliencyMap& map) {
  const double peak =
      map.values.empty() ? 0.0 : *std::max_element(map.values.begin(), map.values.end());
  Raster r(map.width, map.height, 1);
  auto out = r.data();
  for (std::size_t i = 0; i < map.values.size(); ++i) {
    out[i] = peak > 0.0 ? static_cast<float>(map.values[i] / peak) : 0.0f;
  }
  write_png(path, r, 16);
}

Raster to_raster(const SaliencyMap& map) {
  Raster r(map.width, map.height, 1);
  auto out = r.data();
  for (std::size_t i = 0; i < map.values.size(); ++i) {
    out[i] = static_cast<float>(map.values[i]);
  }
  return r;
}

SaliencyMap from_raster(const Raster& r, Normalization n) {
  if (r.channels() != 1) throw ShapeError("saliency raster must have one channel");
  SaliencyMap m(r.width(), r.height());
  auto in = r.data();
  for (std::size_t i = 0; i < m.values.size(); ++i) m.values[i] = in[i];
  m.normalization = n;
  return m;
}

}  // namespace omniqa
