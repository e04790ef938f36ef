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

// Reference inpainting client for tests and demos.
//
//   inpaint_client <mode> <job_dir>
//
// identity: copies each viewport to refined/. gray: sets masked pixels to
// 0.5. fail: exits with status 5. missing: writes nothing. wrongsize: writes
// 1x1 images.

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <string>

#include "omniqa/png_io.h"
#include "omniqa/raster.h"

namespace fs = std::filesystem;

int main(int argc, char** argv) {
  if (argc != 3) {
    std::fprintf(stderr, "usage: %s identity|gray|fail|missing|wrongsize <job_dir>\n", argv[0]);
    return 2;
  }
  const std::string mode = argv[1];
  const fs::path job = argv[2];
  if (mode == "fail") {
    std::fprintf(stderr, "client failure requested\n");
    return 5;
  }
  if (mode == "missing") return 0;
  for (int i = 0;; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "view_%02d.png", i);
    const fs::path view = job / "viewports" / name;
    if (!fs::exists(view)) break;
    omniqa::Raster img = omniqa::read_png(view);
    if (mode == "gray") {
      char mname[32];
      std::snprintf(mname, sizeof mname, "mask_%02d.png", i);
      const omniqa::Raster mask = omniqa::read_png(job / "masks" / mname);
      for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
          if (mask.at(x, y) > 0.5f) {
            for (float& v : img.pixel(x, y)) v = 0.5f;
          }
        }
      }
    } else if (mode == "wrongsize") {
      img = omniqa::Raster(1, 1, img.channels(), 0.5f);
    } else if (mode != "identity") {
      std::fprintf(stderr, "unknown mode %s\n", mode.c_str());
      return 2;
    }
    omniqa::write_png(job / "refined" / name, img);
  }
  return 0;
}
