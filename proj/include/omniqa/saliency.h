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

#ifndef OMNIQA_SALIENCY_H_
#define OMNIQA_SALIENCY_H_

#include <filesystem>
#include <string>
#include <vector>

#include "omniqa/csv.h"
#include "omniqa/geometry.h"
#include "omniqa/raster.h"

namespace omniqa {

enum class Normalization { kNone, kDensity, kPeak };

const char* to_string(Normalization n);
Normalization parse_normalization(const std::string& s);

// Single-channel, ERP-aligned, nonnegative map.
struct SaliencyMap {
  int width = 0;
  int height = 0;
  std::vector<double> values;  // row-major
  Normalization normalization = Normalization::kNone;

  SaliencyMap() = default;
  SaliencyMap(int w, int h, double fill = 0.0,
              Normalization n = Normalization::kNone)
      : width(w),
        height(h),
        values(static_cast<std::size_t>(w) * h, fill),
        normalization(n) {}

  double& at(int x, int y) {
    return values[static_cast<std::size_t>(y) * width + x];
  }
  double at(int x, int y) const {
    return values[static_cast<std::size_t>(y) * width + x];
  }
  std::size_t size() const { return values.size(); }
  bool same_shape(const SaliencyMap& o) const {
    return width == o.width && height == o.height;
  }
  std::string shape_string() const;
};

// Throws RangeError on negative or non-finite values and DataError when the
// normalization tag does not hold to 1e-6.
void check_saliency(const SaliencyMap& map);

// Distortion-click annotations for one image.
struct FixationSet {
  std::string image_id;
  std::vector<SphericalDirection> points;
  std::vector<std::string> notes;  // empty or parallel to points
};

// Reads columns image_id, longitude_deg, latitude_deg, note (note optional).
// Sets keep the first-seen image order.
std::vector<FixationSet> read_fixations(const CsvTable& table);

// Pixel indices of the fixation points on a width x height ERP grid.
std::vector<PixelIndex> fixation_pixels(const FixationSet& fix, int width,
                                        int height);

struct BlurOptions {
  double sigma_deg = 0.4;
  // Cap on the latitude-driven horizontal stretch, as a multiple of the
  // equatorial sigma.
  double max_stretch = 8.0;
  double truncate = 4.0;  // kernel radius in sigmas
};

// Sum of blurred unit impulses, without normalization. Each impulse spreads
// with vertical sigma sigma_deg/360*W and horizontal sigma scaled by
// 1/cos(row latitude); wraps across the +-180 seam, clamps at the poles.
SaliencyMap accumulate_fixations(const FixationSet& fix, int width,
                                 int height, const BlurOptions& opts = {});

// accumulate_fixations normalized to unit sum.
SaliencyMap fixations_to_map(const FixationSet& fix, int width, int height,
                             const BlurOptions& opts = {});

SaliencyMap to_peak_normalized(const SaliencyMap& map);
SaliencyMap to_density(const SaliencyMap& map);

// Float-map file: 8-byte magic "OQFMAP01", uint32 little-endian header
// length, JSON header {"dtype","height","normalization","width"}, then
// height*width little-endian float32 samples.
void write_float_map(const std::filesystem::path& path, const SaliencyMap& map);
SaliencyMap read_float_map(const std::filesystem::path& path);

// Peak-normalized 16-bit grayscale preview.
void write_preview_png(const std::filesystem::path& path,
                       const SaliencyMap& map);

// Conversions between SaliencyMap and single-channel rasters (no rescaling).
Raster to_raster(const SaliencyMap& map);
SaliencyMap from_raster(const Raster& r,
                        Normalization n = Normalization::kNone);

}  // namespace omniqa

#endif  // OMNIQA_SALIENCY_H_
