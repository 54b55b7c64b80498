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

// Curve points to grayscale pixels.
//
// The curve is scaled (aspect preserved) so its larger extent is 0.8 and
// centered in the unit square. Pixel (i, j), i for x and j for y, sits at
// grid coordinate (i / (n - 1), j / (n - 1)) and has intensity
//   X_ij = max_k exp(-n^2 * |g_ij - c_k|^2) = exp(-n^2 * min_k |g_ij - c_k|^2).
// Intensities are computed in double and stored as float. In float, any
// pixel farther than sqrt(150 ln 2) / n ~ 10.20 / n from every curve point
// rounds to exactly zero, which the truncated renderer exploits.
//
// Image storage is row-major with row = y and column = x, origin bottom-left:
// the first stored row is the top of the picture (j = n - 1).

#ifndef SQUIGGLES_RASTER_H_
#define SQUIGGLES_RASTER_H_

#include <cmath>
#include <filesystem>
#include <span>
#include <vector>

#include "squiggles/curve.h"

namespace squiggles {

inline constexpr int kDefaultResolution = 60;
inline constexpr double kCurveExtent = 0.8;
// Pixel widths beyond which float intensities underflow to zero.
inline constexpr double kFloat32CutoffRadius = 10.20;

class Image {
 public:
  Image() = default;
  explicit Image(int size) : size_(size), pixels_(size * size, 0.0f) {}
  Image(int size, std::vector<float> pixels);

  int size() const { return size_; }
  int pixel_count() const { return size_ * size_; }

  static int Offset(int size, int i, int j) { return (size - 1 - j) * size + i; }
  float at(int i, int j) const { return pixels_[Offset(size_, i, j)]; }
  float& at(int i, int j) { return pixels_[Offset(size_, i, j)]; }

  std::span<const float> pixels() const { return pixels_; }
  std::span<float> pixels() { return pixels_; }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int size_ = 0;
  std::vector<float> pixels_;
};

// Affine map applied by Normalize: p' = scale * (p - mid) + 0.5, with the
// extreme points that determined it.
struct Normalization {
  double scale = 1.0;
  double mid_x = 0.0;
  double mid_y = 0.0;
  int x_min = 0, x_max = 0, y_min = 0, y_max = 0;
  // True when the x extent set the scale (ties go to x).
  bool x_dominant = true;
};

struct NormalizedCurve {
  Polyline points;
  Normalization transform;
};

// Throws kDegenerateInput when every point is identical.
NormalizedCurve Normalize(std::span<const Point> points);

inline double GridCoordinate(int index, int size) {
  return static_cast<double>(index) / (size - 1);
}

inline double SquaredDistance(double gx, double gy, const Point& c) {
  const double dx = gx - c.x;
  const double dy = gy - c.y;
  return dx * dx + dy * dy;
}

// Per-pixel squared distance to the nearest curve point and that point's
// index (lowest index on ties). Arrays use Image storage order.
struct NearestField {
  int size = 0;
  std::vector<double> distance2;
  std::vector<int> nearest;
};

NearestField ComputeNearestField(std::span<const Point> points, int size);

inline double Intensity(double distance2, int size) {
  return std::exp(-static_cast<double>(size) * size * distance2);
}

// Double-precision intensities in Image storage order.
std::vector<double> RenderIntensities(std::span<const Point> points, int size);

// Exact render over every (pixel, point) pair. Throws kInvalidConfig if
// size < 2.
Image Render(std::span<const Point> points, int size);

// Visits only pixels within radius_px pixel widths of each point. Identical
// to Render bit for bit; radius_px below kFloat32CutoffRadius is rejected.
Image RenderTruncated(std::span<const Point> points, int size,
                      double radius_px = 10.5);

// Latent -> points -> normalized points -> image.
Image RenderLatent(const Latent& latent, const CurveConfig& config, int size);

// 8-bit binary PGM, intensity round(255 * X) clamped to [0, 255].
void WritePgm(const Image& image, const std::filesystem::path& path);

}  // namespace squiggles

#endif  // SQUIGGLES_RASTER_H_
