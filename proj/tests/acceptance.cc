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

// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits nonzero if any fails. Trained checkpoints are cached under --cache so
// reruns skip training; delete the directory to start from scratch.
//
//   acceptance [--cache DIR] [--cli PATH] [--only 1,4,7]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "CLI11.hpp"
#include "oracles.h"
#include "squiggles/attacks.h"
#include "squiggles/datastore.h"
#include "squiggles/diffgraph.h"
#include "squiggles/labeler.h"
#include "squiggles/model.h"
#include "squiggles/raster.h"
#include "squiggles/random.h"

namespace squiggles {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Format(const char* fmt, auto... args) {
  char buffer[512];
  std::snprintf(buffer, sizeof(buffer), fmt, args...);
  return buffer;
}

double Dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double Norm(std::span<const double> v) { return std::sqrt(Dot(v, v)); }

double Median(std::vector<double> v) {
  if (v.empty()) return NAN;
  std::sort(v.begin(), v.end());
  const size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::vector<double> RandomVector(size_t size, uint64_t seed, uint64_t index) {
  RandomStream rng(seed, index, StreamTag::kGaussianAttack);
  std::vector<double> v(size);
  for (double& x : v) x = rng.NextNormal();
  return v;
}

// ------------------------------------------------------------ experiment

constexpr uint64_t kTrainSeed = 1;
constexpr uint64_t kHeldOutSeed = 2;
constexpr size_t kSmallTrain = 32768;
constexpr size_t kLargeTrain = 327680;
constexpr size_t kHeldOut = 10000;
constexpr double kNoiseSigma = 0.08;
constexpr int kAttackSamples = 150;
constexpr int kBoundaryGroup = 40;

// Desk models see 64 x kDeskSteps presentations. Short runs leave the
// classifier undertrained and unusually hard to attack in pixel space.
constexpr int64_t kDeskSteps = 20000;
constexpr int64_t kProxySteps = 3000;

TrainConfig DeskTraining(int64_t steps, double sigma) {
  TrainConfig c;
  c.batch_size = 64;
  c.steps = steps;
  c.init_lr = 2e-3;
  c.noise_sigma = sigma;
  c.allow_epochs = true;
  c.log_every = 0;
  c.seed = 5;
  return c;
}

class Experiment {
 public:
  explicit Experiment(fs::path cache) : cache_(std::move(cache)) { fs::create_directories(cache_); }

  const GeneratedDataset& held_out() {
    if (!held_out_) {
      held_out_ = std::make_unique<GeneratedDataset>(CurveConfig::Default(Variant::kSineNet),
                                                     kDefaultResolution, kHeldOutSeed, 0,
                                                     kHeldOut);
    }
    return *held_out_;
  }

  // The desk model: sigma = 0 on the large set.
  const Model& desk() {
    return Trained("desk", Variant::kSineNet, kLargeTrain, kDeskSteps, 0.0);
  }
  // Same configuration on the small set.
  const Model& small() {
    return Trained("small", Variant::kSineNet, kSmallTrain, kDeskSteps, 0.0);
  }
  const Model& noisy() {
    return Trained("noisy", Variant::kSineNet, kLargeTrain, kDeskSteps, kNoiseSigma);
  }
  // Boundary estimates on SineNet latents take gradients from a Taylor model.
  const Model& proxy() {
    return Trained("proxy", Variant::kTaylor, kSmallTrain, kProxySteps, 0.0);
  }

  const std::vector<double>& DeskScores() {
    if (desk_scores_.empty()) desk_scores_ = PredictDataset(desk(), held_out());
    return desk_scores_;
  }

  // First kAttackSamples held-out samples.
  struct Subset {
    std::vector<Latent> latents;
    std::vector<Label> labels;
    std::vector<float> images;
  };
  const Subset& attack_set() {
    if (subset_.labels.empty()) subset_ = Take(kAttackSamples);
    return subset_;
  }

  // Latent PGD on the desk model at every ladder budget.
  const std::vector<std::vector<LatentAttack>>& LatentLadder() {
    if (latent_ladder_.empty()) {
      const Subset& s = attack_set();
      for (double eps : kEpsilonLadder) {
        AttackConfig c;
        c.epsilon = eps;
        latent_ladder_.push_back(
            PgdLatent(desk(), s.latents, s.labels, PipelineConfig::Default(Variant::kSineNet), c));
      }
    }
    return latent_ladder_;
  }

  const std::vector<PixelAttack>& DeskPixelAttack(size_t rung) {
    auto& slot = pixel_[rung];
    if (slot.empty()) {
      AttackConfig c;
      c.epsilon = kEpsilonLadder[rung];
      slot = PgdPixel(desk(), attack_set().images, attack_set().labels, c);
    }
    return slot;
  }

  Subset Take(size_t count) {
    Subset s;
    const size_t pixels = kDefaultResolution * kDefaultResolution;
    s.images.resize(count * pixels);
    for (size_t i = 0; i < count; ++i) {
      const Sample sample = held_out().sample(i);
      s.latents.push_back(sample.latent);
      s.labels.push_back(sample.label);
      held_out().FillImage(i, s.images.data() + i * pixels);
    }
    return s;
  }

 private:
  const Model& Trained(const std::string& role, Variant variant, size_t count, int64_t steps,
                       double sigma) {
    auto it = models_.find(role);
    if (it != models_.end()) return it->second;
    const uint64_t seed = kTrainSeed;
    const TrainConfig config = DeskTraining(steps, sigma);
    const fs::path path =
        cache_ / Format("%s-%s-seed%llu-n%zu-steps%lld-batch%d-lr%g-sigma%g.ckpt", role.c_str(),
                        std::string(VariantName(variant)).c_str(),
                        static_cast<unsigned long long>(seed), count,
                        static_cast<long long>(config.steps), config.batch_size, config.init_lr,
                        sigma);
    if (fs::exists(path)) {
      std::printf("  [%s] cached checkpoint %s\n", role.c_str(), path.filename().c_str());
    } else {
      std::printf("  [%s] training on %zu %s samples...\n", role.c_str(), count,
                  std::string(VariantName(variant)).c_str());
      std::fflush(stdout);
      const GeneratedDataset train(CurveConfig::Default(variant), kDefaultResolution, seed, 0,
                                   count);
      const TrainResult result = Train(config, train, nullptr);
      const fs::path partial = path.string() + ".partial";
      SaveCheckpoint(result.model, partial);
      fs::rename(partial, path);
    }
    return models_.emplace(role, LoadCheckpoint(path)).first->second;
  }

  fs::path cache_;
  std::unique_ptr<GeneratedDataset> held_out_;
  std::map<std::string, Model> models_;
  std::vector<double> desk_scores_;
  Subset subset_;
  std::vector<std::vector<LatentAttack>> latent_ladder_;
  std::map<size_t, std::vector<PixelAttack>> pixel_;
};

size_t Rung(double eps) {
  for (size_t r = 0; r < kEpsilonLadder.size(); ++r) {
    if (kEpsilonLadder[r] == eps) return r;
  }
  std::abort();
}

double Accuracy(std::span<const float> predictions, std::span<const Label> labels) {
  size_t correct = 0;
  for (size_t k = 0; k < labels.size(); ++k) {
    correct += (predictions[k] >= 0.5f) == (labels[k] == Label::kSelfIntersecting);
  }
  return static_cast<double>(correct) / labels.size();
}

double PixelAccuracy(const std::vector<PixelAttack>& attacks, std::span<const Label> labels) {
  std::vector<float> p;
  for (const PixelAttack& a : attacks) p.push_back(a.adversarial_prediction);
  return Accuracy(p, labels);
}

// ------------------------------------------------------------- criteria

Outcome LabelDistribution(Experiment&) {
  constexpr size_t kCount = 1000000;
  // Target fractions of self-intersecting curves.
  const std::pair<Variant, double> targets[] = {{Variant::kSineNet, 0.348},
                                                {Variant::kTaylor, 0.216}};
  Outcome out{true, ""};
  for (const auto& [variant, target] : targets) {
    const GeneratedDataset data(CurveConfig::Default(variant), kDefaultResolution, 2026, 0,
                                kCount);
    size_t crossing = 0;
    for (size_t i = 0; i < data.size(); ++i) crossing += data.label(i) == Label::kSelfIntersecting;
    const double fraction = static_cast<double>(crossing) / kCount;
    out.pass &= std::abs(fraction - target) <= 0.005;
    out.detail += Format("%s %.2f%% (target %.1f%% +/- 0.5)  ",
                         std::string(VariantName(variant)).c_str(), 100 * fraction, 100 * target);
  }
  return out;
}

Outcome LabelerOracle(Experiment&) {
  Outcome out{true, ""};
  for (Variant variant : {Variant::kSineNet, Variant::kTaylor}) {
    const CurveConfig config = CurveConfig::Default(variant);
    int disagreements = 0, positives = 0;
    for (uint64_t i = 0; i < 10000; ++i) {
      const Polyline c = EvalCurve(SampleLatent(config, {77, i}), config.times);
      const bool fast = LabelCurve(c) == Label::kSelfIntersecting;
      positives += fast;
      disagreements += fast != oracle::BruteForceSelfIntersecting(c);
    }
    out.pass &= disagreements == 0;
    out.detail += Format("%s: %d/10000 disagree (%d crossing)  ",
                         std::string(VariantName(variant)).c_str(), disagreements, positives);
  }
  return out;
}

Outcome RasterCutoff(Experiment&) {
  constexpr int n = kDefaultResolution;
  const double cutoff = 10.20 / n;
  int curves = 0, nonzero_far = 0, mismatched = 0;
  size_t far_pixels = 0;
  for (Variant variant : {Variant::kSineNet, Variant::kTaylor}) {
    const CurveConfig config = CurveConfig::Default(variant);
    for (uint64_t i = 0; i < 500; ++i, ++curves) {
      const Polyline points =
          Normalize(EvalCurve(SampleLatent(config, {78, i}), config.times)).points;
      const Image full = Render(points, n);
      mismatched += !(RenderTruncated(points, n, 10.5) == full);
      for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) {
          const double gx = GridCoordinate(k, n), gy = GridCoordinate(j, n);
          double nearest = INFINITY;
          for (const Point& p : points) nearest = std::min(nearest, std::hypot(gx - p.x, gy - p.y));
          if (nearest <= cutoff) continue;
          ++far_pixels;
          nonzero_far += full.at(k, j) != 0.0f;
        }
      }
    }
  }
  return {nonzero_far == 0 && mismatched == 0,
          Format("%d curves, %zu far pixels, %d nonzero, %d truncated mismatches", curves,
                 far_pixels, nonzero_far, mismatched)};
}

Latent Shift(const Latent& z, std::span<const double> v, double h) {
  Latent out = z;
  for (int i = 0; i < z.size(); ++i) out.values()[i] += h * v[i];
  return out;
}

bool SameSelections(const PipelineTape& base, const PipelineTape& other) {
  const Normalization& a = base.normalized().transform;
  const Normalization& b = other.normalized().transform;
  if (a.x_min != b.x_min || a.x_max != b.x_max || a.y_min != b.y_min || a.y_max != b.y_max ||
      a.x_dominant != b.x_dominant) {
    return false;
  }
  for (int p = 0; p < base.pixel_count(); ++p) {
    if (base.intensities()[p] < 1e-20 && other.intensities()[p] < 1e-20) continue;
    if (base.field().nearest[p] != other.field().nearest[p]) return false;
  }
  return true;
}

Outcome Gradients(Experiment&) {
  constexpr double h = 1e-5;
  Outcome out{true, ""};
  for (Variant variant : {Variant::kTaylor, Variant::kSineNet}) {
    const PipelineConfig config = PipelineConfig::Default(variant);
    // Taylor: every coordinate. SineNet: random directions.
    const int directions = variant == Variant::kTaylor ? config.curve.latent_size() : 6;
    int checked = 0;
    double worst_jvp = 0, worst_vjp = 0, worst_adjoint = 0;
    for (uint64_t index = 0; checked < 100 && index < 1000; ++index) {
      const Latent z = SampleLatent(config.curve, {79, index});
      const auto [image, tape] = ForwardWithTape(z, config);
      const std::vector<double> u = RandomVector(tape.pixel_count(), 80, index);
      const std::vector<double> grad = Vjp(tape, u);
      std::vector<double> jvp_diff, jvp_ref, vjp_a, vjp_n;
      bool tie_free = true;
      for (int d = 0; d < directions && tie_free; ++d) {
        std::vector<double> v(z.size(), 0.0);
        if (variant == Variant::kTaylor) {
          v[d] = 1.0;
        } else {
          v = RandomVector(z.size(), 81, index * 64 + d);
        }
        const auto [ip, plus] = ForwardWithTape(Shift(z, v, h), config);
        const auto [im, minus] = ForwardWithTape(Shift(z, v, -h), config);
        tie_free = SameSelections(tape, plus) && SameSelections(tape, minus);
        const std::vector<double> jv = Jvp(tape, v);
        for (int p = 0; p < tape.pixel_count(); ++p) {
          const double fd = (plus.intensities()[p] - minus.intensities()[p]) / (2 * h);
          jvp_diff.push_back(jv[p] - fd);
          jvp_ref.push_back(jv[p]);
        }
        vjp_a.push_back(Dot(grad, v));
        vjp_n.push_back((Dot(u, plus.intensities()) - Dot(u, minus.intensities())) / (2 * h));
        const double lhs = Dot(u, jv), rhs = vjp_a.back();
        worst_adjoint = std::max(worst_adjoint, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
      }
      if (!tie_free) continue;
      ++checked;
      worst_jvp = std::max(worst_jvp, Norm(jvp_diff) / Norm(jvp_ref));
      for (size_t i = 0; i < vjp_a.size(); ++i) vjp_n[i] -= vjp_a[i];
      worst_vjp = std::max(worst_vjp, Norm(vjp_n) / Norm(vjp_a));
    }
    out.pass &= checked >= 100 && worst_jvp < 1e-4 && worst_vjp < 1e-4 && worst_adjoint <= 1e-10;
    out.detail += Format("%s: %d latents, max rel err jvp %.1e vjp %.1e, adjoint %.1e  ",
                         std::string(VariantName(variant)).c_str(), checked, worst_jvp, worst_vjp,
                         worst_adjoint);
  }
  return out;
}

Outcome NoiseNorm(Experiment&) {
  constexpr int kDraws = 20000;
  std::vector<float> image(kDefaultResolution * kDefaultResolution);
  double total = 0.0;
  for (int k = 0; k < kDraws; ++k) {
    std::fill(image.begin(), image.end(), 0.0f);
    AddPixelNoise(41, k, kNoiseSigma, false, image);
    double s = 0.0;
    for (float x : image) s += static_cast<double>(x) * x;
    total += std::sqrt(s);
  }
  const double mean = total / kDraws;
  return {std::abs(mean - 4.8) <= 0.05, Format("mean norm %.4f over %d draws (4.8 +/- 0.05)",
                                                mean, kDraws)};
}

Outcome TrainingDirection(Experiment& x) {
  const auto t0 = std::chrono::steady_clock::now();
  const Evaluation small = Evaluate(x.small(), x.held_out());
  const Evaluation large = Evaluate(x.desk(), x.held_out());
  const double minutes =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / 60;
  return {small.accuracy < large.accuracy && small.accuracy >= 0.8 && large.accuracy >= 0.8,
          Format("held-out accuracy %zu samples %.2f%% < %zu samples %.2f%% (auc %.4f, %.4f; "
                 "%.1f min)",
                 kSmallTrain, 100 * small.accuracy, kLargeTrain, 100 * large.accuracy,
                 small.roc_auc, large.roc_auc, minutes)};
}

Outcome Directionality(Experiment& x) {
  const auto& s = x.attack_set();
  const int batch = static_cast<int>(s.labels.size());
  const double clean = Accuracy(x.desk().Predict(s.images, batch), s.labels);
  const double drop = clean - PixelAccuracy(x.DeskPixelAttack(Rung(0.15)), s.labels);

  AttackConfig c;
  c.epsilon = 0.15;
  const double noisy_clean = Accuracy(x.noisy().Predict(s.images, batch), s.labels);
  const double noisy_drop =
      noisy_clean - PixelAccuracy(PgdPixel(x.noisy(), s.images, s.labels, c), s.labels);

  bool dominated = true;
  std::string ladder;
  const size_t pixels = kDefaultResolution * kDefaultResolution;
  for (size_t r = 0; r < kEpsilonLadder.size(); ++r) {
    const double pgd_error = 1.0 - PixelAccuracy(x.DeskPixelAttack(r), s.labels);
    std::vector<float> noisy(s.images.size());
    for (int k = 0; k < batch; ++k) {
      const std::span<const float> image(s.images.data() + k * pixels, pixels);
      const std::vector<double> y = GaussianAttack(image, kEpsilonLadder[r], 43, k);
      for (size_t i = 0; i < pixels; ++i) noisy[k * pixels + i] = static_cast<float>(y[i]);
    }
    const double gauss_error = 1.0 - Accuracy(x.desk().Predict(noisy, batch), s.labels);
    dominated &= pgd_error >= gauss_error;
    ladder += Format(" %g:%.2f/%.2f", kEpsilonLadder[r], pgd_error, gauss_error);
  }
  return {drop >= 0.30 && noisy_drop <= drop / 3 && dominated,
          Format("eps 0.15 drop sigma=0 %.1f pts (clean %.1f%%), sigma=%.2f %.1f pts (clean %.1f%%); "
                 "pgd/gaussian error:%s",
                 100 * drop, 100 * clean, kNoiseSigma, 100 * noisy_drop, 100 * noisy_clean,
                 ladder.c_str())};
}

Outcome ManifoldScarcity(Experiment& x) {
  const auto& s = x.attack_set();
  const double pixel_error = 1.0 - PixelAccuracy(x.DeskPixelAttack(Rung(0.15)), s.labels);
  double best = 0.0;
  bool monotone = true;
  double previous = 1.0;
  std::string ladder;
  for (size_t r = 0; r < kEpsilonLadder.size(); ++r) {
    const auto& attacks = x.LatentLadder()[r];
    size_t errors = 0, unchanged = 0;
    for (size_t k = 0; k < attacks.size(); ++k) {
      errors += (attacks[k].adversarial_prediction >= 0.5f) !=
                (attacks[k].label_after == Label::kSelfIntersecting);
      unchanged += attacks[k].label_after == s.labels[k];
    }
    const double error = static_cast<double>(errors) / attacks.size();
    const double kept = static_cast<double>(unchanged) / attacks.size();
    best = std::max(best, error);
    monotone &= kept <= previous;
    previous = kept;
    ladder += Format(" %g:%.3f/%.3f", kEpsilonLadder[r], error, kept);
  }
  return {best <= pixel_error / 4 && monotone,
          Format("latent best error %.3f vs pixel eps 0.15 error %.3f; error/unchanged:%s", best,
                 pixel_error, ladder.c_str())};
}

Outcome BoundaryOrdering(Experiment& x) {
  const auto& scores = x.DeskScores();
  std::vector<size_t> errors, correct;
  for (size_t i = 0; i < scores.size(); ++i) {
    const bool right = (scores[i] >= 0.5) == (x.held_out().label(i) == Label::kSelfIntersecting);
    auto& group = right ? correct : errors;
    if (group.size() < kBoundaryGroup) group.push_back(i);
  }
  std::vector<Latent> latents;
  std::vector<Label> labels;
  for (const auto* group : {&errors, &correct}) {
    for (size_t i : *group) {
      const Sample s = x.held_out().sample(i);
      latents.push_back(s.latent);
      labels.push_back(s.label);
    }
  }
  // Each sample's latent-attack error at the smallest budget that made one.
  std::set<size_t> taken;
  size_t adversarial = 0;
  for (const auto& rung : x.LatentLadder()) {
    for (size_t k = 0; k < rung.size(); ++k) {
      const LatentAttack& a = rung[k];
      if ((a.adversarial_prediction >= 0.5f) == (a.label_after == Label::kSelfIntersecting)) continue;
      if (!taken.insert(k).second) continue;
      latents.push_back(a.latent);
      labels.push_back(a.label_after);
      ++adversarial;
    }
  }
  const auto distances = EstimateBoundaryDistances(
      x.proxy(), latents, labels, PipelineConfig::Default(Variant::kSineNet));
  // A sample the ladder never flips sits beyond its top rung.
  auto group = [&](size_t first, size_t count) {
    std::vector<double> d;
    for (size_t k = first; k < first + count; ++k) {
      d.push_back(distances[k] ? *distances[k] : 2 * kEpsilonLadder.back());
    }
    return Median(d);
  };
  const double gen = group(0, errors.size());
  const double random = group(errors.size(), correct.size());
  const double latent = group(errors.size() + correct.size(), adversarial);
  return {errors.size() > 0 && adversarial > 0 && gen < random && gen <= latent && latent <= random,
          Format("median boundary distance: generalization errors %g (n=%zu) <= latent-attack "
                 "errors %g (n=%zu) <= correct %g (n=%zu)",
                 gen, errors.size(), latent, adversarial, random, correct.size())};
}

Eigen::MatrixXd DenseJacobian(const PipelineTape& tape) {
  Eigen::MatrixXd j(tape.pixel_count(), tape.latent_size());
  for (int c = 0; c < tape.latent_size(); ++c) {
    std::vector<double> e(tape.latent_size(), 0.0);
    e[c] = 1.0;
    const auto col = Jvp(tape, e);
    j.col(c) = Eigen::Map<const Eigen::VectorXd>(col.data(), col.size());
  }
  return j;
}

Outcome ManifoldDecomposition(Experiment& x) {
  double worst_orth = 0, worst_pyth = 0, worst_dense = 0;
  int full = 0, unconverged = 0;
  // Pixel attacks on the desk model, decomposed at their clean latents.
  const auto& s = x.attack_set();
  const auto& attacks = x.DeskPixelAttack(Rung(0.15));
  const size_t pixels = kDefaultResolution * kDefaultResolution;
  for (size_t k = 0; k < 20; ++k, ++full) {
    const auto [image, tape] =
        ForwardWithTape(s.latents[k], PipelineConfig::Default(Variant::kSineNet));
    std::vector<double> delta(pixels);
    for (size_t i = 0; i < pixels; ++i) delta[i] = attacks[k].image[i] - s.images[k * pixels + i];
    const ManifoldSplit split = DecomposePerturbation(tape, delta);
    unconverged += !split.converged;
    const double on2 = Dot(split.on_manifold, split.on_manifold);
    const double off2 = Dot(split.off_manifold, split.off_manifold);
    worst_orth = std::max(worst_orth, std::abs(Dot(split.on_manifold, split.off_manifold)) /
                                          std::sqrt(on2 * off2));
    worst_pyth = std::max(worst_pyth, std::abs(Dot(delta, delta) - on2 - off2) / Dot(delta, delta));
  }
  // Taylor curves at 16x16 against an SVD of the dense Jacobian.
  PipelineConfig toy = PipelineConfig::Default(Variant::kTaylor);
  toy.resolution = 16;
  for (uint64_t index = 0; index < 20; ++index) {
    const auto [image, tape] = ForwardWithTape(SampleLatent(toy.curve, {82, index}), toy);
    const Eigen::MatrixXd j = DenseJacobian(tape);
    const std::vector<double> d = RandomVector(tape.pixel_count(), 83, index);
    const Eigen::Map<const Eigen::VectorXd> delta(d.data(), d.size());
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(j, Eigen::ComputeThinU);
    Eigen::Index rank = 0;
    while (rank < svd.singularValues().size() &&
           svd.singularValues()[rank] > 1e-10 * svd.singularValues()[0]) {
      ++rank;
    }
    const Eigen::MatrixXd u = svd.matrixU().leftCols(rank);
    const Eigen::VectorXd on = u * (u.transpose() * delta);
    const ManifoldSplit split = DecomposePerturbation(tape, d);
    unconverged += !split.converged;
    const Eigen::Map<const Eigen::VectorXd> got(split.on_manifold.data(), d.size());
    worst_dense = std::max(worst_dense, (got - on).norm() / on.norm());
  }
  return {unconverged == 0 && worst_orth <= 1e-6 && worst_pyth <= 1e-6 && worst_dense <= 1e-5,
          Format("%d pixel attacks: orthogonality %.1e, pythagoras %.1e; 16x16 dense max rel "
                 "err %.1e; %d unconverged",
                 full, worst_orth, worst_pyth, worst_dense, unconverged)};
}

std::string Slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome Determinism(const fs::path& cli, const fs::path& scratch) {
  fs::remove_all(scratch);
  fs::create_directories(scratch);
  // Library level: shards written with different worker counts.
  ShardSpec spec;
  spec.seed = 84;
  spec.first_index = 1000;
  spec.count = 700;
  spec.embed_images = true;
  spec.workers = 1;
  GenerateShard(spec, scratch / "a.sqgl");
  spec.workers = 3;
  GenerateShard(spec, scratch / "b.sqgl");
  bool shards_equal = Slurp(scratch / "a.sqgl") == Slurp(scratch / "b.sqgl");
  ShardReader reader(scratch / "a.sqgl");
  ShardRecord record;
  for (uint64_t r = 0; reader.Next(&record); ++r) {
    const Sample s = RegenerateRecord(reader.header(), r);
    shards_equal &= s.index == record.index && s.label == record.label;
  }

  // CLI level: every command, then replay of every manifest.
  const std::vector<std::string> commands = {
      "generate --variant sinenet --seed 85 --count 400 --shard-size 150 --out-dir data",
      "generate --variant taylor --seed 86 --count 200 --out-dir proxy-data",
      "train --data data --eval data --out m.ckpt --steps 30 --batch-size 16 --lr 2e-3 "
      "--widths 4,8 --allow-epochs --log-every 10 --sigma 0.08",
      "train --data proxy-data --out p.ckpt --steps 10 --batch-size 16 --widths 4,8 "
      "--allow-epochs",
      "attack --checkpoint m.ckpt --data data --mode pixel --count 6 --iterations 8 --out "
      "pixel.csv",
      "attack --checkpoint m.ckpt --data data --mode gaussian --count 6 --out gaussian.csv",
      "attack --checkpoint m.ckpt --data data --mode latent --epsilon 0.3 --epsilon 1.2 "
      "--count 4 --iterations 5 --out latent.csv",
      "attack --checkpoint m.ckpt --proxy p.ckpt --data data --mode boundary --count 4 "
      "--iterations 5 --adversarial-epsilon 1.2 --out boundary.csv",
      "render --data data --indices 1,2 --overlay --checkpoint m.ckpt --iterations 4 --out-dir r",
  };
  auto run = [&](const std::string& args) {
    const std::string command = "cd '" + scratch.string() + "' && '" + cli.string() + "' " +
                                args + " > /dev/null 2>> stderr.txt";
    return std::system(command.c_str()) == 0;
  };
  bool ran = true;
  for (const auto& c : commands) ran &= run(c);
  std::map<fs::path, std::string> before;
  std::vector<fs::path> manifests;
  for (const auto& entry : fs::recursive_directory_iterator(scratch)) {
    const fs::path rel = fs::relative(entry.path(), scratch);
    const std::string name = rel.filename().string();
    if (!entry.is_regular_file() || name == "stderr.txt" || (name.ends_with(".sqgl") && rel.parent_path().empty())) {
      continue;
    }
    if (name.ends_with("manifest.json")) {
      manifests.push_back(rel);
      continue;
    }
    before[rel] = Slurp(entry.path());
  }
  for (const auto& [rel, bytes] : before) fs::remove(scratch / rel);
  // Manifests replay in the order the runs happened.
  for (const auto& m : {"data/manifest.json", "proxy-data/manifest.json", "m.ckpt.manifest.json",
                        "p.ckpt.manifest.json", "pixel.csv.manifest.json",
                        "gaussian.csv.manifest.json", "latent.csv.manifest.json",
                        "boundary.csv.manifest.json", "r/manifest.json"}) {
    ran &= run(std::string("replay ") + m);
  }
  size_t csvs = 0, identical = 0, files = 0, identical_files = 0;
  for (const auto& [rel, bytes] : before) {
    const bool same = fs::exists(scratch / rel) && Slurp(scratch / rel) == bytes;
    ++files;
    identical_files += same;
    if (rel.extension() == ".csv") {
      ++csvs;
      identical += same;
    }
  }
  const bool pass = shards_equal && ran && manifests.size() == 9 && csvs >= 10 &&
                    identical_files == files;
  if (pass) fs::remove_all(scratch);
  return {pass, Format("shard regeneration %s; %zu manifests replayed, %zu/%zu CSVs and %zu/%zu "
                       "outputs identical%s",
                       shards_equal ? "byte-identical" : "DIFFERS", manifests.size(), identical,
                       csvs, identical_files, files, ran ? "" : "; a command failed")};
}

}  // namespace
}  // namespace squiggles

int main(int argc, char** argv) {
  using namespace squiggles;
  CLI::App app{"Acceptance criteria"};
  std::string cache = "acceptance-cache";
  std::string cli = SQUIGGLES_BINARY;
  std::vector<int> only;
  app.add_option("--cache", cache, "Checkpoint cache directory");
  app.add_option("--cli", cli, "squiggles binary");
  app.add_option("--only", only, "Criteria to run")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  Experiment experiment{fs::path(cache)};
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"label distribution", [&] { return LabelDistribution(experiment); }},
      {"labeler oracle equivalence", [&] { return LabelerOracle(experiment); }},
      {"rasterizer float32 cutoff", [&] { return RasterCutoff(experiment); }},
      {"gradient correctness", [&] { return Gradients(experiment); }},
      {"noise norm", [&] { return NoiseNorm(experiment); }},
      {"training direction", [&] { return TrainingDirection(experiment); }},
      {"adversarial directionality", [&] { return Directionality(experiment); }},
      {"on-manifold scarcity", [&] { return ManifoldScarcity(experiment); }},
      {"boundary-distance ordering", [&] { return BoundaryOrdering(experiment); }},
      {"manifold decomposition", [&] { return ManifoldDecomposition(experiment); }},
      {"determinism", [&] { return Determinism(cli, fs::path(cache) / "determinism"); }},
  };
  int failures = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    const int number = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), number) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criteria[i].second();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += !outcome.pass;
    std::printf("%s  criterion %2d  %-28s %s [%.0fs]\n", outcome.pass ? "PASS" : "FAIL", number,
                criteria[i].first, outcome.detail.c_str(), seconds);
    std::fflush(stdout);
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
