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

#include "omniqa/raster.h"

#include <cmath>
#include <string>

#include "omniqa/error.h"

namespace omniqa {

Raster::Raster(int width, int height, int channels, float fill)
    : width_(width), height_(height), channels_(channels) {
  if (width < 0 || height < 0 || channels < 0) {
    throw ShapeError("negative raster extent");
  }
  data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

void check_erp(const Raster& image) {
  if (image.height() < 1 || image.width() != 2 * image.height()) {
    throw ShapeError("ERP image must have width == 2*height, got " +
                     std::to_string(image.width()) + "x" +
                     std::to_string(image.height()));
  }
  if (image.channels() != 1 && image.channels() != 3) {
    throw ShapeError("ERP image must have 1 or 3 channels, got " +
                     std::to_string(image.channels()));
  }
  for (float v : image.data()) {
    if (!std::isfinite(v) || v < 0.0f || v > 1.0f) {
      throw RangeError("ERP sample outside [0,1]");
    }
  }
}

Raster to_gray(const Raster& image) {
  Raster out(image.width(), image.height(), 1);
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      float sum = 0.0f;
      for (float v : image.pixel(x, y)) sum += v;
      out.at(x, y) = sum / static_cast<float>(image.channels());
    }
  }
  return out;
}

}  // namespace omniqa
