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

#include "omniqa/geometry.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "omniqa/error.h"

namespace omniqa {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
// Slack on the frustum boundary so that directions exactly on a shared edge
// (e.g. cube seams at fov 90) count as inside.
constexpr double kEdgeSlack = 1e-9;

double dot(const Vec3& a, const Vec3& b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}

int wrap_index(int i, int n) {
  i %= n;
  return i < 0 ? i + n : i;
}

}  // namespace

Vec3 to_unit_vector(const SphericalDirection& dir) {
  const double lon = dir.longitude * kDeg;
  const double lat = dir.latitude * kDeg;
  return {std::cos(lat) * std::sin(lon), std::sin(lat),
          std::cos(lat) * std::cos(lon)};
}

SphericalDirection to_spherical(const Vec3& v) {
  const double norm = std::sqrt(dot(v, v));
  const double y = std::clamp(v.y / norm, -1.0, 1.0);
  return {wrap_longitude(std::atan2(v.x, v.z) / kDeg), std::asin(y) / kDeg};
}

double wrap_longitude(double degrees) {
  double w = std::fmod(degrees + 180.0, 360.0);
  if (w < 0.0) w += 360.0;
  if (w >= 360.0) w -= 360.0;
  return w - 180.0;
}

ErpPoint direction_to_erp(const SphericalDirection& dir, int erp_w, int erp_h) {
  return {(dir.longitude + 180.0) / 360.0 * erp_w - 0.5,
          (90.0 - dir.latitude) / 180.0 * erp_h - 0.5};
}

SphericalDirection erp_to_direction(double u, double v, int erp_w, int erp_h) {
  return {(u + 0.5) / erp_w * 360.0 - 180.0, 90.0 - (v + 0.5) / erp_h * 180.0};
}

PixelIndex direction_to_pixel(const SphericalDirection& dir, int erp_w,
                              int erp_h) {
  const int x = static_cast<int>(
      std::floor((wrap_longitude(dir.longitude) + 180.0) / 360.0 * erp_w));
  const int y =
      static_cast<int>(std::floor((90.0 - dir.latitude) / 180.0 * erp_h));
  return {wrap_index(x, erp_w), std::clamp(y, 0, erp_h - 1)};
}

SphericalDirection pixel_to_direction(PixelIndex p, int erp_w, int erp_h) {
  return erp_to_direction(p.x, p.y, erp_w, erp_h);
}

void check_viewport(const ViewportSpec& spec) {
  if (!(spec.fov > 0.0 && spec.fov < 180.0)) {
    throw RangeError("viewport fov must be in (0,180), got " +
                     std::to_string(spec.fov));
  }
  if (spec.out_width < 2 || spec.out_height < 2) {
    throw RangeError("viewport resolution must be at least 2x2");
  }
  if (!(spec.pitch >= -90.0 && spec.pitch <= 90.0)) {
    throw RangeError("viewport pitch must be in [-90,90]");
  }
}

ViewportCamera::ViewportCamera(const ViewportSpec& spec) : spec_(spec) {
  check_viewport(spec);
  half_w_ = std::tan(spec.fov * 0.5 * kDeg);
  focal_ = 0.5 * spec.out_width / half_w_;
  half_h_ = 0.5 * spec.out_height / focal_;
  const double yaw = spec.yaw * kDeg;
  const double pitch = spec.pitch * kDeg;
  const double sy = std::sin(yaw), cy = std::cos(yaw);
  const double sp = std::sin(pitch), cp = std::cos(pitch);
  forward_ = {cp * sy, sp, cp * cy};
  right_ = {cy, 0.0, -sy};
  up_ = {-sp * sy, cp, -sp * cy};
}

Vec3 ViewportCamera::ray(double x, double y) const {
  const double xc = (x + 0.5 - 0.5 * spec_.out_width) / focal_;
  const double yc = -(y + 0.5 - 0.5 * spec_.out_height) / focal_;
  return {right_.x * xc + up_.x * yc + forward_.x,
          right_.y * xc + up_.y * yc + forward_.y,
          right_.z * xc + up_.z * yc + forward_.z};
}

std::optional<std::array<double, 2>> ViewportCamera::project(
    const Vec3& dir) const {
  const double z = dot(dir, forward_);
  if (z <= 0.0) return std::nullopt;
  const double xc = dot(dir, right_) / z;
  const double yc = dot(dir, up_) / z;
  if (std::abs(xc) > half_w_ * (1.0 + kEdgeSlack) ||
      std::abs(yc) > half_h_ * (1.0 + kEdgeSlack)) {
    return std::nullopt;
  }
  return std::array<double, 2>{xc * focal_ + 0.5 * spec_.out_width - 0.5,
                               -yc * focal_ + 0.5 * spec_.out_height - 0.5};
}

double ViewportCamera::cos_to_axis(const Vec3& dir) const {
  return dot(dir, forward_) / std::sqrt(dot(dir, dir));
}

std::vector<ViewportSpec> six_viewport_set(double fov, int res) {
  if (!(fov > 0.0 && fov < 180.0)) {
    throw RangeError("fov must be in (0,180), got " + std::to_string(fov));
  }
  std::vector<ViewportSpec> views = {
      {"top", 0.0, 90.0, fov, res, res},
      {"front", 0.0, 0.0, fov, res, res},
      {"left", -90.0, 0.0, fov, res, res},
      {"right", 90.0, 0.0, fov, res, res},
      {"back", -180.0, 0.0, fov, res, res},
      {"bottom", 0.0, -90.0, fov, res, res},
  };
  for (const auto& v : views) check_viewport(v);
  return views;
}

std::vector<ViewportSpec> eight_viewport_set(double fov, int res) {
  if (!(fov > 0.0 && fov < 180.0)) {
    throw RangeError("fov must be in (0,180), got " + std::to_string(fov));
  }
  std::vector<ViewportSpec> views;
  for (int k = 0; k < 8; ++k) {
    ViewportSpec spec{"yaw" + std::to_string(-180 + 45 * k),
                      -180.0 + 45.0 * k, 0.0, fov, res, res};
    check_viewport(spec);
    views.push_back(spec);
  }
  return views;
}

void sample_erp_bilinear(const Raster& erp, double u, double v, float* out) {
  const int w = erp.width();
  const int h = erp.height();
  const double fu = std::floor(u);
  const double tx = u - fu;
  const int x0 = wrap_index(static_cast<int>(fu), w);
  const int x1 = wrap_index(x0 + 1, w);
  const double vc = std::clamp(v, 0.0, static_cast<double>(h - 1));
  const int y0 = static_cast<int>(std::floor(vc));
  const int y1 = std::min(y0 + 1, h - 1);
  const double ty = vc - y0;
  for (int c = 0; c < erp.channels(); ++c) {
    const double top = (1.0 - tx) * erp.at(x0, y0, c) + tx * erp.at(x1, y0, c);
    const double bot = (1.0 - tx) * erp.at(x0, y1, c) + tx * erp.at(x1, y1, c);
    out[c] = static_cast<float>((1.0 - ty) * top + ty * bot);
  }
}

void sample_clamped_bilinear(const Raster& img, double x, double y,
                             float* out) {
  const double xc = std::clamp(x, 0.0, static_cast<double>(img.width() - 1));
  const double yc = std::clamp(y, 0.0, static_cast<double>(img.height() - 1));
  const int x0 = static_cast<int>(std::floor(xc));
  const int y0 = static_cast<int>(std::floor(yc));
  const int x1 = std::min(x0 + 1, img.width() - 1);
  const int y1 = std::min(y0 + 1, img.height() - 1);
  const double tx = xc - x0;
  const double ty = yc - y0;
  for (int c = 0; c < img.channels(); ++c) {
    const double top = (1.0 - tx) * img.at(x0, y0, c) + tx * img.at(x1, y0, c);
    const double bot = (1.0 - tx) * img.at(x0, y1, c) + tx * img.at(x1, y1, c);
    out[c] = static_cast<float>((1.0 - ty) * top + ty * bot);
  }
}

Raster resize_bilinear(const Raster& img, int width, int height) {
  if (width < 1 || height < 1 || img.empty()) {
    throw ShapeError("resize_bilinear needs non-empty input and output");
  }
  Raster out(width, height, img.channels());
  const double sx = static_cast<double>(img.width()) / width;
  const double sy = static_cast<double>(img.height()) / height;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      sample_clamped_bilinear(img, (x + 0.5) * sx - 0.5, (y + 0.5) * sy - 0.5,
                              out.pixel(x, y).data());
    }
  }
  return out;
}

Raster erp_to_viewport(const Raster& erp, const ViewportSpec& spec) {
  if (erp.empty() || erp.width() != 2 * erp.height()) {
    throw ShapeError("erp_to_viewport expects a 2:1 ERP raster");
  }
  const ViewportCamera cam(spec);
  Raster out(spec.out_width, spec.out_height, erp.channels());
  const int w = erp.width();
  const int h = erp.height();
  for (int j = 0; j < spec.out_height; ++j) {
    for (int i = 0; i < spec.out_width; ++i) {
      const SphericalDirection dir = to_spherical(cam.ray(i, j));
      const ErpPoint p = direction_to_erp(dir, w, h);
      float* px = out.pixel(i, j).data();
      sample_erp_bilinear(erp, p.u, p.v, px);
      for (int c = 0; c < erp.channels(); ++c) px[c] = std::clamp(px[c], 0.0f, 1.0f);
    }
  }
  return out;
}

ErpPartial viewport_to_erp(const Raster& view, const ViewportSpec& spec,
                           int erp_w, int erp_h, const ReprojectOptions& opts) {
  if (erp_h < 1 || erp_w != 2 * erp_h) {
    throw ShapeError("viewport_to_erp expects erp_w == 2*erp_h");
  }
  if (view.width() != spec.out_width || view.height() != spec.out_height) {
    throw ShapeError("viewport raster does not match its spec (" +
                     std::to_string(view.width()) + "x" +
                     std::to_string(view.height()) + " vs " +
                     std::to_string(spec.out_width) + "x" +
                     std::to_string(spec.out_height) + ")");
  }
  const ViewportCamera cam(spec);
  ErpPartial part{Raster(erp_w, erp_h, view.channels(), opts.init_value),
                  std::vector<float>(static_cast<std::size_t>(erp_w) * erp_h,
                                     0.0f)};
  for (int v = 0; v < erp_h; ++v) {
    for (int u = 0; u < erp_w; ++u) {
      const Vec3 dir = to_unit_vector(pixel_to_direction({u, v}, erp_w, erp_h));
      const auto hit = cam.project(dir);
      if (!hit) continue;
      sample_clamped_bilinear(view, (*hit)[0], (*hit)[1],
                              part.values.pixel(u, v).data());
      const double c = cam.cos_to_axis(dir);
      part.weight[static_cast<std::size_t>(v) * erp_w + u] =
          static_cast<float>(std::max(c * c, opts.weight_floor));
    }
  }
  return part;
}

std::vector<float> coverage_weight(const std::vector<ErpPartial>& partials) {
  if (partials.empty()) return {};
  std::vector<float> total(partials.front().weight.size(), 0.0f);
  for (const auto& p : partials) {
    for (std::size_t i = 0; i < total.size(); ++i) total[i] += p.weight[i];
  }
  return total;
}

namespace {

Raster assemble_impl(const Raster* base,
                     const std::vector<ErpPartial>& partials) {
  if (partials.empty()) throw CoverageError("no partials to assemble");
  const Raster& first = partials.front().values;
  for (const auto& p : partials) {
    if (!p.values.same_shape(first) || p.weight.size() != first.pixel_count()) {
      throw ShapeError("assemble_erp: partials differ in shape");
    }
  }
  if (base != nullptr && !base->same_shape(first)) {
    throw ShapeError("assemble_erp: base image differs in shape");
  }
  const int w = first.width();
  const int h = first.height();
  const int ch = first.channels();
  Raster out(w, h, ch);
  std::vector<double> acc(ch);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const std::size_t idx = static_cast<std::size_t>(v) * w + u;
      double wsum = 0.0;
      std::fill(acc.begin(), acc.end(), 0.0);
      for (const auto& p : partials) {
        const double wt = p.weight[idx];
        if (wt <= 0.0) continue;
        wsum += wt;
        for (int c = 0; c < ch; ++c) acc[c] += wt * p.values.at(u, v, c);
      }
      if (wsum <= 0.0) {
        if (base == nullptr) {
          throw CoverageError("ERP pixel (" + std::to_string(u) + "," +
                              std::to_string(v) + ") is not covered by any view");
        }
        for (int c = 0; c < ch; ++c) out.at(u, v, c) = base->at(u, v, c);
        continue;
      }
      for (int c = 0; c < ch; ++c) {
        out.at(u, v, c) = static_cast<float>(acc[c] / wsum);
      }
    }
  }
  return out;
}

}  // namespace

Raster assemble_erp(const std::vector<ErpPartial>& partials) {
  return assemble_impl(nullptr, partials);
}

Raster assemble_erp_over(const Raster& base,
                         const std::vector<ErpPartial>& partials) {
  return assemble_impl(&base, partials);
}

}  // namespace omniqa
