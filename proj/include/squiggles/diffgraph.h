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

// Derivatives of the rendering pipeline latent -> points -> normalized
// points -> pixels.
//
// The forward pass records every selection it makes: the nearest curve point
// for each pixel (the max over points) and the extreme points that fix the
// normalization. Derivatives treat those selections as frozen, so gradients
// flow only through the selected element. Every stage has a hand-written
// adjoint (Vjp) and tangent map (Jvp).

#ifndef SQUIGGLES_DIFFGRAPH_H_
#define SQUIGGLES_DIFFGRAPH_H_

#include <span>
#include <utility>
#include <vector>

#include "squiggles/curve.h"
#include "squiggles/raster.h"

namespace squiggles {

struct PipelineConfig {
  CurveConfig curve = CurveConfig::Default(Variant::kSineNet);
  int resolution = kDefaultResolution;

  static PipelineConfig Default(Variant variant) {
    return {CurveConfig::Default(variant), kDefaultResolution};
  }
};

// Immutable record of one forward pass.
class PipelineTape {
 public:
  const PipelineConfig& config() const { return config_; }
  const Latent& latent() const { return latent_; }
  const Polyline& curve() const { return curve_; }
  const NormalizedCurve& normalized() const { return normalized_; }
  const NearestField& field() const { return field_; }
  // Double-precision intensities, Image storage order.
  const std::vector<double>& intensities() const { return intensities_; }

  int latent_size() const { return latent_.size(); }
  int pixel_count() const { return field_.size * field_.size; }

 private:
  friend std::pair<Image, PipelineTape> ForwardWithTape(const Latent&,
                                                        const PipelineConfig&);

  PipelineConfig config_;
  Latent latent_;
  Polyline curve_;
  NormalizedCurve normalized_;
  NearestField field_;
  std::vector<double> intensities_;
  // Taylor: basis[k * terms + i] = t_k^(i+1) / (i+1)!.
  // SineNet: sin/cos of term i at point k, stored at [i * points + k].
  std::vector<double> basis_;
  std::vector<double> sin_;
  std::vector<double> cos_;

  friend std::vector<double> Vjp(const PipelineTape&, std::span<const double>);
  friend std::vector<double> Jvp(const PipelineTape&, std::span<const double>);
};

// The image equals RenderLatent(latent, config.curve, config.resolution)
// bit for bit. Throws kDegenerateInput like Normalize.
std::pair<Image, PipelineTape> ForwardWithTape(const Latent& latent,
                                               const PipelineConfig& config);

// d<cotangent, X(z)>/dz. The cotangent is in Image storage order; a size
// mismatch throws kInvalidInput.
std::vector<double> Vjp(const PipelineTape& tape,
                        std::span<const double> image_cotangent);

// dX(z)/dz applied to a latent direction; result in Image storage order.
std::vector<double> Jvp(const PipelineTape& tape,
                        std::span<const double> latent_tangent);

}  // namespace squiggles

#endif  // SQUIGGLES_DIFFGRAPH_H_
