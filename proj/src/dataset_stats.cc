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

#include "omniqa/dataset_stats.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "omniqa/error.h"

namespace omniqa {
namespace {

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double variance_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size());
}

}  // namespace

std::vector<double> luminance(const Raster& image, const LumaWeights& w) {
  if (image.empty()) throw ShapeError("empty image");
  std::vector<double> y(image.pixel_count());
  auto d = image.data();
  if (image.channels() == 1) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = d[i];
  } else if (image.channels() == 3) {
    for (std::size_t i = 0; i < y.size(); ++i) {
      y[i] = w.r * d[3 * i] + w.g * d[3 * i + 1] + w.b * d[3 * i + 2];
    }
  } else {
    throw ShapeError("features need a 1- or 3-channel image");
  }
  return y;
}

double sharpness(const Raster& image, const LumaWeights& w) {
  const std::vector<double> y = luminance(image, w);
  const int width = image.width();
  const int height = image.height();
  auto at = [&](int x, int yy) {
    x = std::clamp(x, 0, width - 1);
    yy = std::clamp(yy, 0, height - 1);
    return y[static_cast<std::size_t>(yy) * width + x];
  };
  std::vector<double> lap(y.size());
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      lap[static_cast<std::size_t>(r) * width + c] =
          at(c - 1, r) + at(c + 1, r) + at(c, r - 1) + at(c, r + 1) -
          4.0 * at(c, r);
    }
  }
  return variance_of(lap);
}

double brightness(const Raster& image, const LumaWeights& w) {
  return mean_of(luminance(image, w));
}

double colorfulness(const Raster& image) {
  if (image.channels() == 1) return 0.0;
  if (image.channels() != 3) throw ShapeError("colorfulness needs RGB");
  const std::size_t n = image.pixel_count();
  std::vector<double> rg(n), yb(n);
  auto d = image.data();
  for (std::size_t i = 0; i < n; ++i) {
    const double r = d[3 * i], g = d[3 * i + 1], b = d[3 * i + 2];
    rg[i] = r - g;
    yb[i] = 0.5 * (r + g) - b;
  }
  const double sd = std::sqrt(variance_of(rg) + variance_of(yb));
  const double mu = std::hypot(mean_of(rg), mean_of(yb));
  return sd + 0.3 * mu;
}

double contrast(const Raster& image, const LumaWeights& w) {
  return std::sqrt(variance_of(luminance(image, w)));
}

const char* feature_name(Feature f) {
  switch (f) {
    case Feature::kSharpness:
      return "sharpness";
    case Feature::kBrightness:
      return "brightness";
    case Feature::kColorfulness:
      return "colorfulness";
    case Feature::kContrast:
      return "contrast";
  }
  return "?";
}

double compute_feature(Feature f, const Raster& image, const LumaWeights& w) {
  switch (f) {
    case Feature::kSharpness:
      return sharpness(image, w);
    case Feature::kBrightness:
      return brightness(image, w);
    case Feature::kColorfulness:
      return colorfulness(image);
    case Feature::kContrast:
      return contrast(image, w);
  }
  return 0.0;
}

std::vector<double> relative_range(const std::vector<FeatureSamples>& dbs) {
  if (dbs.empty()) throw InsufficientDataError("relative_range needs a database");
  double global_max = -INFINITY;
  for (const auto& db : dbs) {
    if (db.values.empty()) {
      throw InsufficientDataError("database '" + db.database + "' has no samples");
    }
    global_max = std::max(global_max, *std::max_element(db.values.begin(), db.values.end()));
  }
  if (!(global_max > 0.0)) {
    throw DegenerateError("relative range undefined: global maximum is " +
                          format_double(global_max));
  }
  std::vector<double> out;
  for (const auto& db : dbs) {
    const auto [lo, hi] = std::minmax_element(db.values.begin(), db.values.end());
    out.push_back((*hi - *lo) / global_max);
  }
  return out;
}

double coverage_uniformity(const std::vector<double>& values, int bins,
                           double lo, double hi) {
  if (bins < 2) throw RangeError("coverage uniformity needs at least 2 bins");
  if (values.empty()) throw InsufficientDataError("coverage uniformity needs samples");
  std::vector<std::size_t> hist(bins, 0);
  const double span = hi - lo;
  for (double v : values) {
    int b = 0;
    if (span > 0.0) {
      b = static_cast<int>(std::floor((v - lo) / span * bins));
      b = std::clamp(b, 0, bins - 1);
    }
    ++hist[b];
  }
  // Equal occupied counts give entropy log(m) exactly, so a uniform
  // histogram yields exactly 1 and a single bin exactly 0.
  std::size_t occupied = 0, common = 0;
  bool equal = true;
  for (std::size_t c : hist) {
    if (c == 0) continue;
    ++occupied;
    if (common == 0) common = c;
    equal = equal && c == common;
  }
  if (equal) {
    return std::log(static_cast<double>(occupied)) /
           std::log(static_cast<double>(bins));
  }
  double u = 0.0;
  const double n = static_cast<double>(values.size());
  for (std::size_t c : hist) {
    if (c == 0) continue;
    const double p = c / n;
    u -= p * std::log(p);
  }
  return std::clamp(u / std::log(static_cast<double>(bins)), 0.0, 1.0);
}

std::vector<double> coverage_uniformity(const std::vector<FeatureSamples>& dbs,
                                        int bins) {
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& db : dbs) {
    for (double v : db.values) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  std::vector<double> out;
  for (const auto& db : dbs) out.push_back(coverage_uniformity(db.values, bins, lo, hi));
  return out;
}

std::vector<StatsRow> summarize(const std::vector<FeatureSamples>& per_db,
                                int bins) {
  std::vector<StatsRow> rows;
  for (Feature f : kAllFeatures) {
    std::vector<FeatureSamples> group;
    for (const auto& s : per_db) {
      if (s.feature == f) group.push_back(s);
    }
    if (group.empty()) continue;
    const auto r = relative_range(group);
    const auto u = coverage_uniformity(group, bins);
    for (std::size_t i = 0; i < group.size(); ++i) {
      rows.push_back({f, group[i].database, r[i], u[i]});
    }
  }
  return rows;
}

CsvTable summary_csv(const std::vector<StatsRow>& rows) {
  CsvTable t({"feature", "database", "R", "U"});
  for (const auto& r : rows) {
    t.add_row({feature_name(r.feature), r.database, format_double(r.relative_range),
               format_double(r.uniformity)});
  }
  return t;
}

}  // namespace omniqa
