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

#ifndef OMNIQA_RASTER_H_
#define OMNIQA_RASTER_H_

#include <cstddef>
#include <span>
#include <vector>

namespace omniqa {

// Row-major, channel-interleaved float image. Samples are nominally in [0,1].
class Raster {
 public:
  Raster() = default;
  Raster(int width, int height, int channels, float fill = 0.0f);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }
  bool empty() const { return data_.empty(); }

  float& at(int x, int y, int c = 0) { return data_[index(x, y, c)]; }
  float at(int x, int y, int c = 0) const { return data_[index(x, y, c)]; }

  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }
  std::span<float> pixel(int x, int y) {
    return std::span<float>(data_).subspan(index(x, y, 0), channels_);
  }
  std::span<const float> pixel(int x, int y) const {
    return std::span<const float>(data_).subspan(index(x, y, 0), channels_);
  }

  bool same_shape(const Raster& other) const {
    return width_ == other.width_ && height_ == other.height_ &&
           channels_ == other.channels_;
  }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  std::size_t index(int x, int y, int c) const {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<float> data_;
};

// An equirectangular panorama: a Raster with width == 2 * height and 1 or 3
// channels.
using ErpImage = Raster;

// Throws ShapeError unless `image` satisfies the ERP shape contract, and
// RangeError if any sample is non-finite or outside [0,1].
void check_erp(const Raster& image);

// Per-pixel channel mean.
Raster to_gray(const Raster& image);

}  // namespace omniqa

#endif  // OMNIQA_RASTER_H_
