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

#ifndef OMNIQA_PNG_IO_H_
#define OMNIQA_PNG_IO_H_

#include <filesystem>

#include "omniqa/raster.h"

namespace omniqa {

// Reads an 8- or 16-bit PNG into a [0,1] raster. Gray(+alpha) becomes one
// channel, everything else three; alpha is dropped.
Raster read_png(const std::filesystem::path& path);

// Writes a 1- or 3-channel raster, clamping samples to [0,1].
void write_png(const std::filesystem::path& path, const Raster& image,
               int bit_depth = 8);

}  // namespace omniqa

#endif  // OMNIQA_PNG_IO_H_
