/* Copyright 2026 The Squiggles Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "squiggles/raster.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include "squiggles/errors.h"

namespace squiggles {
namespace {

void CheckSize(int size) {
  if (size < 2) {
    throw Error(ErrorCode::kInvalidConfig,
                "resolution must be at least 2, got " + std::to_string(size));
  }
}

Image ToImage(const std::vector<double>& distance2, int size) {
  Image image(size);
  std::span<float> out = image.pixels();
  for (size_t p = 0; p < distance2.size(); ++p) {
    out[p] = static_cast<float>(Intensity(distance2[p], size));
  }
  return image;
}

}  // namespace

Image::Image(int size, std::vector<float> pixels)
    : size_(size), pixels_(std::move(pixels)) {
  if (static_cast<int>(pixels_.size()) != size * size) {
    throw Error(ErrorCode::kInvalidInput, "pixel count does not match size");
  }
}

NormalizedCurve Normalize(std::span<const Point> points) {
  if (points.empty()) {
    throw Error(ErrorCode::kDegenerateInput, "cannot normalize empty curve");
  }
  Normalization t;
  for (int k = 1; k < static_cast<int>(points.size()); ++k) {
    if (points[k].x < points[t.x_min].x) t.x_min = k;
    if (points[k].x > points[t.x_max].x) t.x_max = k;
    if (points[k].y < points[t.y_min].y) t.y_min = k;
    if (points[k].y > points[t.y_max].y) t.y_max = k;
  }
  const double extent_x = points[t.x_max].x - points[t.x_min].x;
  const double extent_y = points[t.y_max].y - points[t.y_min].y;
  t.x_dominant = extent_x >= extent_y;
  const double extent = t.x_dominant ? extent_x : extent_y;
  if (!(extent > 0.0)) {
    throw Error(ErrorCode::kDegenerateInput,
                "curve has zero extent on both axes");
  }
  t.scale = kCurveExtent / extent;
  t.mid_x = 0.5 * (points[t.x_max].x + points[t.x_min].x);
  t.mid_y = 0.5 * (points[t.y_max].y + points[t.y_min].y);

  NormalizedCurve out{Polyline(points.size()), t};
  for (size_t k = 0; k < points.size(); ++k) {
    out.points[k] = {t.scale * (points[k].x - t.mid_x) + 0.5,
                     t.scale * (points[k].y - t.mid_y) + 0.5};
  }
  return out;
}

NearestField ComputeNearestField(std::span<const Point> points, int size) {
  CheckSize(size);
  NearestField field{size,
                     std::vector<double>(size * size,
                                         std::numeric_limits<double>::infinity()),
                     std::vector<int>(size * size, 0)};
  for (int j = 0; j < size; ++j) {
    const double gy = GridCoordinate(j, size);
    for (int i = 0; i < size; ++i) {
      const double gx = GridCoordinate(i, size);
      const int p = Image::Offset(size, i, j);
      double best = std::numeric_limits<double>::infinity();
      int best_k = 0;
      for (int k = 0; k < static_cast<int>(points.size()); ++k) {
        const double d2 = SquaredDistance(gx, gy, points[k]);
        if (d2 < best) {
          best = d2;
          best_k = k;
        }
      }
      field.distance2[p] = best;
      field.nearest[p] = best_k;
    }
  }
  return field;
}

std::vector<double> RenderIntensities(std::span<const Point> points,
                                      int size) {
  NearestField field = ComputeNearestField(points, size);
  for (double& v : field.distance2) v = Intensity(v, size);
  return std::move(field.distance2);
}

Image Render(std::span<const Point> points, int size) {
  return ToImage(ComputeNearestField(points, size).distance2, size);
}

Image RenderTruncated(std::span<const Point> points, int size,
                      double radius_px) {
  CheckSize(size);
  if (!(radius_px >= kFloat32CutoffRadius)) {
    throw Error(ErrorCode::kInvalidConfig,
                "truncation radius " + std::to_string(radius_px) +
                    " is below the float32 cutoff of 10.20 pixel widths");
  }
  const double radius = radius_px / size;
  const double radius2 = radius * radius;
  const double span = size - 1;
  std::vector<double> best(size * size,
                           std::numeric_limits<double>::infinity());
  for (const Point& c : points) {
    // One extra pixel on each side absorbs rounding in the bounds.
    auto lower = [&](double v) {
      return std::max(0, static_cast<int>(std::floor(std::clamp((v - radius) * span, -2.0, span + 2.0))) - 1);
    };
    auto upper = [&](double v) {
      return std::min(size - 1, static_cast<int>(std::ceil(std::clamp((v + radius) * span, -2.0, span + 2.0))) + 1);
    };
    const int i_lo = lower(c.x), i_hi = upper(c.x);
    const int j_lo = lower(c.y), j_hi = upper(c.y);
    for (int j = j_lo; j <= j_hi; ++j) {
      const double gy = GridCoordinate(j, size);
      for (int i = i_lo; i <= i_hi; ++i) {
        const double d2 = SquaredDistance(GridCoordinate(i, size), gy, c);
        if (d2 > radius2) continue;
        double& slot = best[Image::Offset(size, i, j)];
        if (d2 < slot) slot = d2;
      }
    }
  }
  return ToImage(best, size);
}

Image RenderLatent(const Latent& latent, const CurveConfig& config, int size) {
  const Polyline curve = EvalCurve(latent, config.times);
  return RenderTruncated(Normalize(curve).points, size);
}

void WritePgm(const Image& image, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  }
  out << "P5\n" << image.size() << " " << image.size() << "\n255\n";
  std::vector<unsigned char> bytes(image.pixel_count());
  for (int p = 0; p < image.pixel_count(); ++p) {
    const double v = std::round(255.0 * image.pixels()[p]);
    bytes[p] = static_cast<unsigned char>(std::clamp(v, 0.0, 255.0));
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  if (!out) throw Error(ErrorCode::kIo, "failed writing " + path.string());
}

}  // namespace squiggles
