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

#ifndef OMNIQA_GEOMETRY_H_
#define OMNIQA_GEOMETRY_H_

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "omniqa/raster.h"

namespace omniqa {

// Pixel <-> angle convention for an ERP of size W x H (pixel centers at
// half-integers):
//   longitude = (u + 0.5) / W * 360 - 180
//   latitude  = 90 - (v + 0.5) / H * 180
// World frame: +z is (lon 0, lat 0), +x is (lon 90, lat 0), +y is the north
// pole.

struct SphericalDirection {
  double longitude = 0.0;  // degrees, [-180, 180)
  double latitude = 0.0;   // degrees, [-90, 90]
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

Vec3 to_unit_vector(const SphericalDirection& dir);
SphericalDirection to_spherical(const Vec3& v);

// Wraps any longitude into [-180, 180).
double wrap_longitude(double degrees);

// Continuous ERP coordinates in pixel units; pixel (u, v) is centered at
// (u, v).
struct ErpPoint {
  double u = 0.0;
  double v = 0.0;
};

ErpPoint direction_to_erp(const SphericalDirection& dir, int erp_w, int erp_h);
SphericalDirection erp_to_direction(double u, double v, int erp_w, int erp_h);

// Integer pixel containing `dir`.
struct PixelIndex {
  int x = 0;
  int y = 0;
  friend bool operator==(const PixelIndex&, const PixelIndex&) = default;
};
PixelIndex direction_to_pixel(const SphericalDirection& dir, int erp_w,
                              int erp_h);
SphericalDirection pixel_to_direction(PixelIndex p, int erp_w, int erp_h);

struct ViewportSpec {
  std::string name;
  double yaw = 0.0;    // degrees, [-180, 180)
  double pitch = 0.0;  // degrees, [-90, 90]
  double fov = 90.0;   // horizontal field of view, degrees, (0, 180)
  int out_width = 384;
  int out_height = 384;
};

// Throws RangeError if the spec violates its invariants.
void check_viewport(const ViewportSpec& spec);

// Pinhole camera for a ViewportSpec. Yaw rotates about the world vertical
// axis, pitch about the rotated horizontal axis; no roll.
class ViewportCamera {
 public:
  explicit ViewportCamera(const ViewportSpec& spec);

  const ViewportSpec& spec() const { return spec_; }
  double focal() const { return focal_; }
  Vec3 axis() const { return forward_; }

  // World direction (not normalized) through continuous viewport coordinates
  // (x, y) where the center of pixel (i, j) is (i, j).
  Vec3 ray(double x, double y) const;

  // Projects a world direction into continuous viewport coordinates. Returns
  // nothing when the direction points away from the camera or falls outside
  // the image plane extent.
  std::optional<std::array<double, 2>> project(const Vec3& dir) const;

  // Cosine of the angle between `dir` (unit) and the view axis.
  double cos_to_axis(const Vec3& dir) const;

 private:
  ViewportSpec spec_;
  double focal_ = 1.0;
  double half_w_ = 1.0;  // tan(fov/2)
  double half_h_ = 1.0;
  Vec3 right_, up_, forward_;
};

// top, front, left, right, back, bottom.
std::vector<ViewportSpec> six_viewport_set(double fov, int res = 384);

// Eight equatorial views at yaw = -180 + 45k.
std::vector<ViewportSpec> eight_viewport_set(double fov, int res = 512);

// Bilinear ERP sample with longitude wraparound and latitude clamp. `u`, `v`
// are continuous pixel coordinates (pixel centers at integers).
void sample_erp_bilinear(const Raster& erp, double u, double v, float* out);

// Bilinear sample with clamping on both axes.
void sample_clamped_bilinear(const Raster& img, double x, double y, float* out);

// Resamples to width x height with half-pixel aligned bilinear filtering.
Raster resize_bilinear(const Raster& img, int width, int height);

Raster erp_to_viewport(const Raster& erp, const ViewportSpec& spec);

// Values sampled back onto the ERP grid plus blending weights. Pixels outside
// the view frustum keep `values` at the initialization value and have weight 0.
struct ErpPartial {
  Raster values;
  std::vector<float> weight;
};

struct ReprojectOptions {
  float init_value = 0.0f;
  // Weight floor inside the frustum; weights are max(cos^2(angle), floor).
  double weight_floor = 1e-3;
};

ErpPartial viewport_to_erp(const Raster& view, const ViewportSpec& spec,
                           int erp_w, int erp_h,
                           const ReprojectOptions& opts = {});

// Per-pixel weighted average of the partials. Throws CoverageError naming the
// first pixel that no partial covers.
Raster assemble_erp(const std::vector<ErpPartial>& partials);

// Same as assemble_erp, but pixels covered by no partial take their value from
// `base` instead of raising.
Raster assemble_erp_over(const Raster& base,
                         const std::vector<ErpPartial>& partials);

// Sum of partial weights per ERP pixel.
std::vector<float> coverage_weight(const std::vector<ErpPartial>& partials);

}  // namespace omniqa

#endif  // OMNIQA_GEOMETRY_H_
