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

// l2 adversarial attacks in pixel and latent space, a Gaussian-noise
// baseline, decision-boundary distance estimates, and the split of a pixel
// perturbation into components along and across the data manifold.
//
// Attack iterates are kept in double precision so the l2 budget holds
// exactly; the classifier sees them rounded to float.

#ifndef SQUIGGLES_ATTACKS_H_
#define SQUIGGLES_ATTACKS_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "squiggles/curve.h"
#include "squiggles/diffgraph.h"
#include "squiggles/labeler.h"
#include "squiggles/model.h"

namespace squiggles {

inline constexpr std::array<double, 9> kEpsilonLadder = {
    0.01875, 0.0375, 0.075, 0.15, 0.3, 0.6, 1.2, 2.4, 4.8};

// kGaussian tags rows of the pixel-space Gaussian-noise baseline.
enum class AttackSpace { kPixel, kLatent, kGaussian };
const char* AttackSpaceName(AttackSpace space);
AttackSpace ParseAttackSpace(const std::string& name);

struct AttackConfig {
  double epsilon = 0.15;
  int iterations = 100;
  // Step size is epsilon * step_fraction.
  double step_fraction = 1.0 / 25;
  // Descend on the loss toward `target` instead of ascending on the true one.
  bool targeted = false;
  Label target = Label::kSimple;
  // Start from a random point of the ball (keyed by seed and sample index)
  // instead of the clean input.
  bool random_start = false;
  uint64_t seed = 0;
  // Samples are attacked in batches of this size, spread over `workers`.
  int batch_size = 32;
  int workers = 1;

  void Validate() const;
};

struct PixelAttack {
  std::vector<double> image;
  double perturbation_norm = 0.0;
  float clean_prediction = 0.0f;
  float adversarial_prediction = 0.0f;
  int skipped_steps = 0;  // iterations with an exactly zero gradient
};

// `images` holds images.size() / pixel_count images; `labels` one per image.
std::vector<PixelAttack> PgdPixel(const Model& model, std::span<const float> images,
                                  std::span<const Label> labels, const AttackConfig& config);

// Pixel perturbation of exact norm epsilon along a standard Gaussian
// direction keyed by (seed, sample index).
std::vector<double> GaussianAttack(std::span<const float> image, double epsilon,
                                   uint64_t seed, uint64_t sample_index);

struct LatentAttack {
  Latent latent;
  Image image;
  Label label_after = Label::kSimple;  // ground truth of the attacked latent
  double perturbation_norm = 0.0;
  float clean_prediction = 0.0f;
  float adversarial_prediction = 0.0f;
  int skipped_steps = 0;
};

std::vector<LatentAttack> PgdLatent(const Model& model, std::span<const Latent> latents,
                                    std::span<const Label> labels,
                                    const PipelineConfig& pipeline, const AttackConfig& config);

// Smallest ladder epsilon whose targeted latent attack (toward the other
// label, gradients from `proxy`) changes the ground-truth label; nullopt when
// none does. Ladder entries are tried in ascending order.
std::vector<std::optional<double>> EstimateBoundaryDistances(
    const Model& proxy, std::span<const Latent> latents, std::span<const Label> labels,
    const PipelineConfig& pipeline, std::span<const double> ladder = kEpsilonLadder,
    AttackConfig base = {});

struct ManifoldSplit {
  std::vector<double> on_manifold;   // J * latent_step, up to rounding
  std::vector<double> off_manifold;  // delta - on_manifold
  std::vector<double> latent_step;
  int iterations = 0;
  // |J^T (delta - J * latent_step)| relative to |J^T delta|.
  double residual = 0.0;
  bool converged = false;
};

// Least-squares projection of a pixel perturbation onto the range of the
// pipeline Jacobian at the tape's latent, by conjugate gradients on the
// normal equations. Iteration stops once |J^T off| <= tolerance * |J^T delta|
// or the Krylov space stops growing; `converged` reports the former.
ManifoldSplit DecomposePerturbation(const PipelineTape& tape, std::span<const double> delta,
                                    int max_iterations = 2000, double tolerance = 1e-10);

struct AttackRecord {
  uint64_t sample_index = 0;
  AttackSpace space = AttackSpace::kPixel;
  double epsilon = 0.0;
  double clean_prediction = 0.0;
  double adversarial_prediction = 0.0;
  Label label_before = Label::kSimple;
  Label label_after = Label::kSimple;
  double perturbation_norm = 0.0;
};

void WriteAttackCsv(std::span<const AttackRecord> records, const std::filesystem::path& path);

}  // namespace squiggles

#endif  // SQUIGGLES_ATTACKS_H_
