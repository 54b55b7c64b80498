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

#include "squiggles/diffgraph.h"

#include <cmath>
#include <string>

#include "squiggles/errors.h"

namespace squiggles {
namespace {

void CheckLength(size_t got, size_t want, const char* what) {
  if (got != want) {
    throw Error(ErrorCode::kInvalidInput,
                std::string(what) + " has " + std::to_string(got) +
                    " entries, expected " + std::to_string(want));
  }
}

// Normalized-point cotangents -> raw-point cotangents through
// p' = scale * (p - mid) + 0.5 with frozen extreme points.
Polyline NormalizeAdjoint(const Polyline& raw, const Normalization& t,
                          const Polyline& bar_normalized) {
  const size_t points = raw.size();
  Polyline bar(points);
  double bar_scale = 0.0, sum_x = 0.0, sum_y = 0.0;
  for (size_t k = 0; k < points; ++k) {
    const Point& g = bar_normalized[k];
    bar[k] = {t.scale * g.x, t.scale * g.y};
    bar_scale += g.x * (raw[k].x - t.mid_x) + g.y * (raw[k].y - t.mid_y);
    sum_x += g.x;
    sum_y += g.y;
  }
  const double bar_mid_x = -t.scale * sum_x;
  const double bar_mid_y = -t.scale * sum_y;
  bar[t.x_max].x += 0.5 * bar_mid_x;
  bar[t.x_min].x += 0.5 * bar_mid_x;
  bar[t.y_max].y += 0.5 * bar_mid_y;
  bar[t.y_min].y += 0.5 * bar_mid_y;
  // scale = 0.8 / extent.
  const double extent = t.x_dominant ? raw[t.x_max].x - raw[t.x_min].x
                                     : raw[t.y_max].y - raw[t.y_min].y;
  const double bar_extent = -t.scale / extent * bar_scale;
  if (t.x_dominant) {
    bar[t.x_max].x += bar_extent;
    bar[t.x_min].x -= bar_extent;
  } else {
    bar[t.y_max].y += bar_extent;
    bar[t.y_min].y -= bar_extent;
  }
  return bar;
}

Polyline NormalizeTangent(const Polyline& raw, const Normalization& t,
                          const Polyline& dot) {
  const double extent = t.x_dominant ? raw[t.x_max].x - raw[t.x_min].x
                                     : raw[t.y_max].y - raw[t.y_min].y;
  const double dot_extent = t.x_dominant ? dot[t.x_max].x - dot[t.x_min].x
                                         : dot[t.y_max].y - dot[t.y_min].y;
  const double dot_scale = -t.scale / extent * dot_extent;
  const double dot_mid_x = 0.5 * (dot[t.x_max].x + dot[t.x_min].x);
  const double dot_mid_y = 0.5 * (dot[t.y_max].y + dot[t.y_min].y);
  Polyline out(raw.size());
  for (size_t k = 0; k < raw.size(); ++k) {
    out[k] = {dot_scale * (raw[k].x - t.mid_x) + t.scale * (dot[k].x - dot_mid_x),
              dot_scale * (raw[k].y - t.mid_y) + t.scale * (dot[k].y - dot_mid_y)};
  }
  return out;
}

}  // namespace

std::pair<Image, PipelineTape> ForwardWithTape(const Latent& latent,
                                               const PipelineConfig& config) {
  PipelineTape tape;
  tape.config_ = config;
  tape.latent_ = latent;
  const SampleTimes& times = config.curve.times;
  const int points = times.size();
  const int terms = latent.terms();

  if (latent.variant() == Variant::kTaylor) {
    tape.curve_ = EvalTaylor(latent, times);
    tape.basis_.resize(static_cast<size_t>(points) * terms);
    for (int k = 0; k < points; ++k) {
      const double t = times.values()[k];
      double term = 1.0;
      for (int i = 0; i < terms; ++i) {
        term *= t / (i + 1);
        tape.basis_[k * terms + i] = term;
      }
    }
  } else {
    // Same accumulation order as EvalSineNet, so the points agree exactly.
    tape.curve_.assign(points, Point{});
    tape.sin_.resize(static_cast<size_t>(points) * terms);
    tape.cos_.resize(static_cast<size_t>(points) * terms);
    const auto a = latent.a();
    const auto b = latent.b();
    internal::ForEachSineTerm(
        latent, times,
        [&](int i, std::span<const double> s, std::span<const double> c) {
          for (int k = 0; k < points; ++k) {
            tape.curve_[k].x += a[i] * s[k];
            tape.curve_[k].y += b[i] * s[k];
            tape.sin_[i * points + k] = s[k];
            tape.cos_[i * points + k] = c[k];
          }
        });
  }

  tape.normalized_ = Normalize(tape.curve_);
  const int n = config.resolution;
  tape.field_ = ComputeNearestField(tape.normalized_.points, n);

  tape.intensities_.resize(n * n);
  Image image(n);
  for (int p = 0; p < n * n; ++p) {
    tape.intensities_[p] = Intensity(tape.field_.distance2[p], n);
    image.pixels()[p] = static_cast<float>(tape.intensities_[p]);
  }
  return {std::move(image), std::move(tape)};
}

std::vector<double> Vjp(const PipelineTape& tape,
                        std::span<const double> image_cotangent) {
  CheckLength(image_cotangent.size(), tape.pixel_count(), "image cotangent");
  const int n = tape.field_.size;
  const double two_n2 = 2.0 * n * n;
  const Polyline& c = tape.normalized_.points;
  const int points = static_cast<int>(c.size());

  Polyline bar_normalized(points);
  for (int j = 0; j < n; ++j) {
    const double gy = GridCoordinate(j, n);
    for (int i = 0; i < n; ++i) {
      const int p = Image::Offset(n, i, j);
      const double weight = image_cotangent[p] * tape.intensities_[p];
      if (weight == 0.0) continue;
      const int k = tape.field_.nearest[p];
      bar_normalized[k].x += weight * two_n2 * (GridCoordinate(i, n) - c[k].x);
      bar_normalized[k].y += weight * two_n2 * (gy - c[k].y);
    }
  }
  const Polyline bar = NormalizeAdjoint(tape.curve_, tape.normalized_.transform,
                                        bar_normalized);

  const Latent& z = tape.latent_;
  const int terms = z.terms();
  Latent grad(z.variant(), terms);
  if (z.variant() == Variant::kTaylor) {
    for (int k = 0; k < points; ++k) {
      for (int i = 0; i < terms; ++i) {
        grad.a()[i] += bar[k].x * tape.basis_[k * terms + i];
        grad.b()[i] += bar[k].y * tape.basis_[k * terms + i];
      }
    }
  } else {
    const auto t = tape.config_.curve.times.values();
    for (int i = 0; i < terms; ++i) {
      const double* s = &tape.sin_[i * points];
      const double* co = &tape.cos_[i * points];
      double ga = 0.0, gb = 0.0, gw = 0.0, gp = 0.0;
      for (int k = 0; k < points; ++k) {
        ga += bar[k].x * s[k];
        gb += bar[k].y * s[k];
        const double w = (z.a()[i] * bar[k].x + z.b()[i] * bar[k].y) * co[k];
        gw += w * t[k];
        gp += w;
      }
      grad.a()[i] = ga;
      grad.b()[i] = gb;
      grad.omega()[i] = gw;
      grad.phase()[i] = gp;
    }
  }
  const auto values = grad.values();
  return std::vector<double>(values.begin(), values.end());
}

std::vector<double> Jvp(const PipelineTape& tape,
                        std::span<const double> latent_tangent) {
  CheckLength(latent_tangent.size(), tape.latent_size(), "latent tangent");
  const Latent& z = tape.latent_;
  const int terms = z.terms();
  const int points = static_cast<int>(tape.curve_.size());
  const Latent dz(z.variant(), terms,
                  std::vector<double>(latent_tangent.begin(), latent_tangent.end()));

  Polyline dot(points);
  if (z.variant() == Variant::kTaylor) {
    for (int k = 0; k < points; ++k) {
      for (int i = 0; i < terms; ++i) {
        dot[k].x += dz.a()[i] * tape.basis_[k * terms + i];
        dot[k].y += dz.b()[i] * tape.basis_[k * terms + i];
      }
    }
  } else {
    const auto t = tape.config_.curve.times.values();
    for (int i = 0; i < terms; ++i) {
      const double* s = &tape.sin_[i * points];
      const double* co = &tape.cos_[i * points];
      for (int k = 0; k < points; ++k) {
        const double dangle = (dz.omega()[i] * t[k] + dz.phase()[i]) * co[k];
        dot[k].x += dz.a()[i] * s[k] + z.a()[i] * dangle;
        dot[k].y += dz.b()[i] * s[k] + z.b()[i] * dangle;
      }
    }
  }
  const Polyline dot_normalized =
      NormalizeTangent(tape.curve_, tape.normalized_.transform, dot);

  const int n = tape.field_.size;
  const double two_n2 = 2.0 * n * n;
  const Polyline& c = tape.normalized_.points;
  std::vector<double> out(n * n, 0.0);
  for (int j = 0; j < n; ++j) {
    const double gy = GridCoordinate(j, n);
    for (int i = 0; i < n; ++i) {
      const int p = Image::Offset(n, i, j);
      const int k = tape.field_.nearest[p];
      out[p] = tape.intensities_[p] * two_n2 *
               ((GridCoordinate(i, n) - c[k].x) * dot_normalized[k].x +
                (gy - c[k].y) * dot_normalized[k].y);
    }
  }
  return out;
}

}  // namespace squiggles
