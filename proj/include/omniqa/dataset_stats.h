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

#ifndef OMNIQA_DATASET_STATS_H_
#define OMNIQA_DATASET_STATS_H_

#include <array>
#include <string>
#include <vector>

#include "omniqa/csv.h"
#include "omniqa/raster.h"

namespace omniqa {

// Luma weights applied to RGB; defaults are ITU-R BT.709.
struct LumaWeights {
  double r = 0.2126;
  double g = 0.7152;
  double b = 0.0722;
};

// Single-channel images are used as their own luminance.
std::vector<double> luminance(const Raster& image, const LumaWeights& w = {});

// Variance of the 4-neighbour Laplacian of luminance (edge replicated).
double sharpness(const Raster& image, const LumaWeights& w = {});
// Mean luminance.
double brightness(const Raster& image, const LumaWeights& w = {});
// Hasler & Suesstrunk colorfulness on [0,1] RGB; zero for gray images.
double colorfulness(const Raster& image);
// Population standard deviation of luminance.
double contrast(const Raster& image, const LumaWeights& w = {});

enum class Feature { kSharpness, kBrightness, kColorfulness, kContrast };
inline constexpr std::array<Feature, 4> kAllFeatures = {
    Feature::kSharpness, Feature::kBrightness, Feature::kColorfulness,
    Feature::kContrast};
const char* feature_name(Feature f);
double compute_feature(Feature f, const Raster& image, const LumaWeights& w = {});

struct FeatureSamples {
  std::string database;
  Feature feature = Feature::kSharpness;
  std::vector<double> values;
};

// (max - min) of each database divided by the largest value over all
// databases. Throws DegenerateError if that maximum is not positive.
std::vector<double> relative_range(const std::vector<FeatureSamples>& dbs);

// Normalized entropy (log base `bins`) of the `bins`-bin histogram of
// `values` over [lo, hi]. Values equal to hi land in the last bin.
double coverage_uniformity(const std::vector<double>& values, int bins,
                           double lo, double hi);

// Uniformity of each database over the global range of all databases.
std::vector<double> coverage_uniformity(const std::vector<FeatureSamples>& dbs,
                                        int bins);

struct StatsRow {
  Feature feature;
  std::string database;
  double relative_range = 0.0;
  double uniformity = 0.0;
};

// Summary across databases; `per_db` holds one FeatureSamples per
// (database, feature) pair.
std::vector<StatsRow> summarize(const std::vector<FeatureSamples>& per_db,
                                int bins = 10);
CsvTable summary_csv(const std::vector<StatsRow>& rows);

}  // namespace omniqa

#endif  // OMNIQA_DATASET_STATS_H_
