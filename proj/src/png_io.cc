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

#include "omniqa/png_io.h"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "omniqa/error.h"

namespace omniqa {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void png_error_fn(png_structp png, png_const_charp msg) {
  auto* what = static_cast<std::string*>(png_get_error_ptr(png));
  *what = msg;
  png_longjmp(png, 1);
}

void png_warning_fn(png_structp, png_const_charp) {}

}  // namespace

Raster read_png(const std::filesystem::path& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw FormatError("cannot open PNG " + path.string());
  unsigned char sig[8];
  if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw FormatError("not a PNG file: " + path.string());
  }
  std::string what;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &what,
                                           png_error_fn, png_warning_fn);
  png_infop info = png_create_info_struct(png);
  Raster image;
  std::vector<png_bytep> rows;
  std::vector<unsigned char> buffer;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("PNG decode failed for " + path.string() + ": " + what);
  }
  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  const int color = png_get_color_type(png, info);
  int depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) {
    png_set_expand_gray_1_2_4_to_8(png);
  }
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color & PNG_COLOR_MASK_ALPHA || png_get_valid(png, info, PNG_INFO_tRNS)) {
    png_set_strip_alpha(png);
  }
  if (depth == 16) png_set_swap(png);  // host little-endian
  png_read_update_info(png, info);
  const int width = static_cast<int>(png_get_image_width(png, info));
  const int height = static_cast<int>(png_get_image_height(png, info));
  const int channels = png_get_channels(png, info);
  depth = png_get_bit_depth(png, info);
  const std::size_t row_bytes = png_get_rowbytes(png, info);
  buffer.resize(row_bytes * height);
  rows.resize(height);
  for (int y = 0; y < height; ++y) rows[y] = buffer.data() + row_bytes * y;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  if (channels != 1 && channels != 3) {
    throw FormatError("unsupported PNG channel layout in " + path.string());
  }
  image = Raster(width, height, channels);
  auto out = image.data();
  const std::size_t n = static_cast<std::size_t>(width) * height * channels;
  if (depth == 16) {
    for (std::size_t i = 0; i < n; ++i) {
      const unsigned lo = buffer[2 * i];
      const unsigned hi = buffer[2 * i + 1];
      out[i] = static_cast<float>((hi << 8) | lo) / 65535.0f;
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) out[i] = buffer[i] / 255.0f;
  }
  return image;
}

void write_png(const std::filesystem::path& path, const Raster& image,
               int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) {
    throw RangeError("PNG bit depth must be 8 or 16");
  }
  if (image.channels() != 1 && image.channels() != 3) {
    throw ShapeError("PNG output needs 1 or 3 channels");
  }
  const int width = image.width();
  const int height = image.height();
  const int bytes = bit_depth / 8;
  const std::size_t row_bytes =
      static_cast<std::size_t>(width) * image.channels() * bytes;
  std::vector<unsigned char> buffer(row_bytes * height);
  auto in = image.data();
  for (std::size_t i = 0; i < in.size(); ++i) {
    const float v = std::clamp(std::isfinite(in[i]) ? in[i] : 0.0f, 0.0f, 1.0f);
    if (bit_depth == 8) {
      buffer[i] = static_cast<unsigned char>(std::lround(v * 255.0f));
    } else {
      const auto q = static_cast<unsigned>(std::lround(v * 65535.0f));
      buffer[2 * i] = static_cast<unsigned char>(q >> 8);  // PNG is big-endian
      buffer[2 * i + 1] = static_cast<unsigned char>(q & 0xff);
    }
  }

  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) throw FormatError("cannot create PNG " + path.string());
  std::string what;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &what,
                                            png_error_fn, png_warning_fn);
  png_infop info = png_create_info_struct(png);
  std::vector<png_bytep> rows(height);
  for (int y = 0; y < height; ++y) rows[y] = buffer.data() + row_bytes * y;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw FormatError("PNG encode failed for " + path.string() + ": " + what);
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, width, height, bit_depth,
               image.channels() == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace omniqa
