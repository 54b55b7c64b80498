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

#include "squiggles/attacks.h"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "squiggles/errors.h"
#include "squiggles/parallel.h"
#include "squiggles/random.h"

namespace squiggles {
namespace {

double Norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double Dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Pulls x back onto the ball of radius epsilon around x0. Returns |x - x0|.
double ProjectToBall(std::span<const double> x0, std::span<double> x, double epsilon) {
  double norm2 = 0.0;
  for (size_t i = 0; i < x.size(); ++i) norm2 += (x[i] - x0[i]) * (x[i] - x0[i]);
  double norm = std::sqrt(norm2);
  if (norm > epsilon) {
    const double scale = epsilon / norm;
    for (size_t i = 0; i < x.size(); ++i) x[i] = x0[i] + (x[i] - x0[i]) * scale;
    norm2 = 0.0;
    for (size_t i = 0; i < x.size(); ++i) norm2 += (x[i] - x0[i]) * (x[i] - x0[i]);
    norm = std::sqrt(norm2);
  }
  return norm;
}

// Moves x by `step` along +-g/|g|. Returns false (and leaves x) when g = 0.
bool NormalizedStep(std::span<double> x, std::span<const double> g, double step, bool descend) {
  const double norm = Norm(g);
  if (norm == 0.0) return false;
  const double scale = (descend ? -step : step) / norm;
  for (size_t i = 0; i < x.size(); ++i) x[i] += scale * g[i];
  return true;
}

void RandomStart(std::span<const double> x0, std::span<double> x, double epsilon,
                 uint64_t seed, uint64_t index) {
  RandomStream rng(seed, index, StreamTag::kGaussianAttack);
  std::vector<double> d(x.size());
  for (double& v : d) v = rng.NextNormal();
  const double radius = epsilon * rng.NextUniform() / Norm(d);
  for (size_t i = 0; i < x.size(); ++i) x[i] = x0[i] + radius * d[i];
}

// Power-iteration estimate of |J|_2 for the pipeline Jacobian.
double LargestSingularValue(const PipelineTape& tape) {
  RandomStream rng(0, 0, StreamTag::kGaussianAttack);
  std::vector<double> v(tape.latent_size());
  for (double& x : v) x = rng.NextNormal();
  double sigma = 0.0;
  for (int it = 0; it < 8; ++it) {
    const double norm = Norm(v);
    if (norm == 0.0) break;
    for (double& x : v) x /= norm;
    const std::vector<double> jv = Jvp(tape, v);
    sigma = Norm(jv);
    v = Vjp(tape, jv);
  }
  return sigma;
}

float TargetFor(const AttackConfig& config, Label label) {
  return static_cast<float>(LabelValue(config.targeted ? config.target : label));
}

// Runs fn(begin, end) over batches of [0, count), spread over workers.
template <typename Fn>
void ForEachBatch(size_t count, const AttackConfig& config, Fn&& fn) {
  const size_t batch = config.batch_size;
  const size_t batches = (count + batch - 1) / batch;
  ParallelFor(0, batches, config.workers, [&](size_t b) {
    fn(b * batch, std::min(count, (b + 1) * batch));
  });
}

std::vector<float> ToFloat(std::span<const double> v) {
  return std::vector<float>(v.begin(), v.end());
}

}  // namespace

const char* AttackSpaceName(AttackSpace space) {
  switch (space) {
    case AttackSpace::kPixel:
      return "pixel";
    case AttackSpace::kLatent:
      return "latent";
    case AttackSpace::kGaussian:
      return "gaussian";
  }
  return "unknown";
}

AttackSpace ParseAttackSpace(const std::string& name) {
  if (name == "pixel") return AttackSpace::kPixel;
  if (name == "latent") return AttackSpace::kLatent;
  if (name == "gaussian") return AttackSpace::kGaussian;
  throw Error(ErrorCode::kInvalidConfig, "unknown attack space '" + name + "'");
}

void AttackConfig::Validate() const {
  if (!(epsilon >= 0) || !std::isfinite(epsilon) || iterations < 1 ||
      !(step_fraction > 0) || batch_size < 1) {
    throw Error(ErrorCode::kInvalidConfig, "invalid attack configuration");
  }
}

std::vector<PixelAttack> PgdPixel(const Model& model, std::span<const float> images,
                                  std::span<const Label> labels, const AttackConfig& config) {
  config.Validate();
  const size_t pixels = model.pixel_count();
  if (images.size() != labels.size() * pixels) {
    throw Error(ErrorCode::kInvalidInput, "image batch does not match labels or resolution");
  }
  std::vector<PixelAttack> out(labels.size());
  const double step = config.epsilon * config.step_fraction;

  ForEachBatch(labels.size(), config, [&](size_t begin, size_t end) {
    const int batch = static_cast<int>(end - begin);
    const std::span<const float> clean = images.subspan(begin * pixels, batch * pixels);
    const std::vector<double> x0(clean.begin(), clean.end());
    std::vector<double> x = x0;
    std::vector<float> targets(batch), input(batch * pixels), grad(batch * pixels);
    for (int k = 0; k < batch; ++k) targets[k] = TargetFor(config, labels[begin + k]);
    const std::vector<float> clean_pred = model.Predict(clean, batch);

    if (config.epsilon > 0) {
      if (config.random_start) {
        for (int k = 0; k < batch; ++k) {
          RandomStart(std::span(x0).subspan(k * pixels, pixels),
                      std::span(x).subspan(k * pixels, pixels), config.epsilon, config.seed,
                      begin + k);
        }
      }
      std::vector<double> g(pixels);
      for (int it = 0; it < config.iterations; ++it) {
        std::copy(x.begin(), x.end(), input.begin());
        model.LossAndGradient(input, targets, batch, {}, grad);
        for (int k = 0; k < batch; ++k) {
          std::copy_n(grad.begin() + k * pixels, pixels, g.begin());
          const std::span<double> xk = std::span(x).subspan(k * pixels, pixels);
          if (!NormalizedStep(xk, g, step, config.targeted)) {
            ++out[begin + k].skipped_steps;
            continue;
          }
          ProjectToBall(std::span(x0).subspan(k * pixels, pixels), xk, config.epsilon);
        }
      }
    }
    std::copy(x.begin(), x.end(), input.begin());
    const std::vector<float> adv_pred = model.Predict(input, batch);
    for (int k = 0; k < batch; ++k) {
      PixelAttack& r = out[begin + k];
      r.image.assign(x.begin() + k * pixels, x.begin() + (k + 1) * pixels);
      double norm2 = 0.0;
      for (size_t i = 0; i < pixels; ++i) {
        norm2 += (r.image[i] - x0[k * pixels + i]) * (r.image[i] - x0[k * pixels + i]);
      }
      r.perturbation_norm = std::sqrt(norm2);
      r.clean_prediction = clean_pred[k];
      r.adversarial_prediction = adv_pred[k];
    }
  });
  return out;
}

std::vector<double> GaussianAttack(std::span<const float> image, double epsilon,
                                   uint64_t seed, uint64_t sample_index) {
  if (!(epsilon >= 0)) throw Error(ErrorCode::kInvalidConfig, "negative epsilon");
  std::vector<double> out(image.begin(), image.end());
  if (epsilon == 0) return out;
  RandomStream rng(seed, sample_index, StreamTag::kGaussianAttack);
  std::vector<double> g(image.size());
  for (double& v : g) v = rng.NextNormal();
  const double scale = epsilon / Norm(g);
  for (size_t i = 0; i < out.size(); ++i) out[i] += scale * g[i];
  return out;
}

std::vector<LatentAttack> PgdLatent(const Model& model, std::span<const Latent> latents,
                                    std::span<const Label> labels,
                                    const PipelineConfig& pipeline, const AttackConfig& config) {
  config.Validate();
  if (latents.size() != labels.size()) {
    throw Error(ErrorCode::kInvalidInput, "latents and labels differ in length");
  }
  if (pipeline.resolution != model.architecture().input_size) {
    throw Error(ErrorCode::kInvalidInput, "pipeline resolution does not match the model");
  }
  const size_t pixels = model.pixel_count();
  const double step = config.epsilon * config.step_fraction;
  std::vector<LatentAttack> out(latents.size());

  ForEachBatch(latents.size(), config, [&](size_t begin, size_t end) {
    const int batch = static_cast<int>(end - begin);
    std::vector<Latent> z(latents.begin() + begin, latents.begin() + end);
    std::vector<float> targets(batch), input(batch * pixels), grad(batch * pixels);
    for (int k = 0; k < batch; ++k) targets[k] = TargetFor(config, labels[begin + k]);
    std::vector<PipelineTape> tapes(batch);
    auto render_all = [&] {
      for (int k = 0; k < batch; ++k) {
        auto [image, tape] = ForwardWithTape(z[k], pipeline);
        std::copy(image.pixels().begin(), image.pixels().end(), input.begin() + k * pixels);
        tapes[k] = std::move(tape);
      }
    };
    render_all();
    const std::vector<float> clean_pred = model.Predict(input, batch);

    if (config.epsilon > 0) {
      if (config.random_start) {
        for (int k = 0; k < batch; ++k) {
          RandomStart(latents[begin + k].values(), z[k].values(), config.epsilon, config.seed,
                      begin + k);
        }
        render_all();
      }
      for (int it = 0; it < config.iterations; ++it) {
        model.LossAndGradient(input, targets, batch, {}, grad);
        for (int k = 0; k < batch; ++k) {
          const std::vector<double> pixel_grad(grad.begin() + k * pixels,
                                               grad.begin() + (k + 1) * pixels);
          const std::vector<double> g = Vjp(tapes[k], pixel_grad);
          if (!NormalizedStep(z[k].values(), g, step, config.targeted)) {
            ++out[begin + k].skipped_steps;
            continue;
          }
          ProjectToBall(latents[begin + k].values(), z[k].values(), config.epsilon);
          auto [image, tape] = ForwardWithTape(z[k], pipeline);
          std::copy(image.pixels().begin(), image.pixels().end(), input.begin() + k * pixels);
          tapes[k] = std::move(tape);
        }
      }
    }
    const std::vector<float> adv_pred = model.Predict(input, batch);
    for (int k = 0; k < batch; ++k) {
      LatentAttack& r = out[begin + k];
      r.latent = z[k];
      r.image = Image(pipeline.resolution,
                      std::vector<float>(input.begin() + k * pixels,
                                         input.begin() + (k + 1) * pixels));
      r.label_after = LabelCurve(tapes[k].curve());
      std::vector<double> diff(z[k].size());
      for (int i = 0; i < z[k].size(); ++i) {
        diff[i] = z[k].values()[i] - latents[begin + k].values()[i];
      }
      r.perturbation_norm = Norm(diff);
      r.clean_prediction = clean_pred[k];
      r.adversarial_prediction = adv_pred[k];
    }
  });
  return out;
}

std::vector<std::optional<double>> EstimateBoundaryDistances(
    const Model& proxy, std::span<const Latent> latents, std::span<const Label> labels,
    const PipelineConfig& pipeline, std::span<const double> ladder, AttackConfig base) {
  if (latents.size() != labels.size()) {
    throw Error(ErrorCode::kInvalidInput, "latents and labels differ in length");
  }
  std::vector<std::optional<double>> out(latents.size());
  std::vector<size_t> open(latents.size());
  for (size_t i = 0; i < open.size(); ++i) open[i] = i;
  for (double epsilon : ladder) {
    if (open.empty()) break;
    // Group the unresolved samples by target label so one config serves each.
    for (Label from : {Label::kSimple, Label::kSelfIntersecting}) {
      std::vector<size_t> group;
      std::vector<Latent> z;
      std::vector<Label> y;
      for (size_t i : open) {
        if (labels[i] != from) continue;
        group.push_back(i);
        z.push_back(latents[i]);
        y.push_back(labels[i]);
      }
      if (group.empty()) continue;
      AttackConfig config = base;
      config.epsilon = epsilon;
      config.targeted = true;
      config.target = FlipLabel(from);
      const std::vector<LatentAttack> attacks = PgdLatent(proxy, z, y, pipeline, config);
      for (size_t g = 0; g < group.size(); ++g) {
        if (attacks[g].label_after != from) out[group[g]] = epsilon;
      }
    }
    std::erase_if(open, [&](size_t i) { return out[i].has_value(); });
  }
  return out;
}

ManifoldSplit DecomposePerturbation(const PipelineTape& tape, std::span<const double> delta,
                                    int max_iterations, double tolerance) {
  if (delta.size() != static_cast<size_t>(tape.pixel_count())) {
    throw Error(ErrorCode::kInvalidInput, "perturbation does not match the image size");
  }
  // Conjugate gradients on J^T J x = J^T delta. The k-th iterate minimizes
  // |J x - delta| over the Krylov space K_k = span{s_0, ..., s_{k-1}} of the
  // normal residuals s = J^T (delta - J x). The Jacobian's spectrum spans
  // many decades, so plain CG recurrences lose conjugacy; instead both the
  // Krylov basis V and the image basis Q = orth(J V) are kept orthonormal
  // explicitly (Gram-Schmidt, applied twice) and each iterate is the exact
  // least-squares solution over K_k.
  const size_t dim = tape.latent_size();
  const size_t pixels = delta.size();
  ManifoldSplit split;
  std::vector<std::vector<double>> v_basis, q_basis;
  std::vector<std::vector<double>> r_columns;  // R of J V = Q R, by column
  std::vector<double> qtb;                     // Q^T delta
  split.on_manifold.assign(pixels, 0.0);
  split.off_manifold.assign(delta.begin(), delta.end());

  auto orthogonalize = [](std::vector<double>& x, const std::vector<std::vector<double>>& basis,
                          std::vector<double>* coefficients) {
    if (coefficients) coefficients->assign(basis.size(), 0.0);
    for (int pass = 0; pass < 2; ++pass) {
      for (size_t j = 0; j < basis.size(); ++j) {
        const double c = Dot(basis[j], x);
        for (size_t i = 0; i < x.size(); ++i) x[i] -= c * basis[j][i];
        if (coefficients) (*coefficients)[j] += c;
      }
    }
  };

  // Normal residuals below this multiple of |r| are rounding noise: r is then
  // orthogonal to the range as far as double precision can tell.
  const double noise = 1e-12 * LargestSingularValue(tape);
  std::vector<double> s = Vjp(tape, delta);
  const double s0 = Norm(s);
  split.converged = s0 <= noise * Norm(delta);
  split.residual = split.converged ? 0.0 : 1.0;
  while (!split.converged && split.iterations < max_iterations && v_basis.size() < dim) {
    orthogonalize(s, v_basis, nullptr);
    const double s_norm = Norm(s);
    if (s_norm == 0.0) break;
    for (double& x : s) x /= s_norm;
    std::vector<double> column = Jvp(tape, s);
    const double column_norm = Norm(column);
    std::vector<double> coefficients;
    orthogonalize(column, q_basis, &coefficients);
    const double fresh = Norm(column);
    // The new direction adds nothing outside the current image basis.
    if (fresh <= 1e-13 * column_norm) break;
    for (double& x : column) x /= fresh;
    coefficients.push_back(fresh);
    v_basis.push_back(std::move(s));
    q_basis.push_back(std::move(column));
    r_columns.push_back(std::move(coefficients));
    const std::vector<double>& q = q_basis.back();
    const double c = Dot(q, delta);
    qtb.push_back(c);
    for (size_t i = 0; i < pixels; ++i) {
      split.on_manifold[i] += c * q[i];
      split.off_manifold[i] = delta[i] - split.on_manifold[i];
    }
    ++split.iterations;
    s = Vjp(tape, split.off_manifold);
    split.residual = Norm(s) / s0;
    if (split.residual <= tolerance || Norm(s) <= noise * Norm(split.off_manifold)) {
      split.converged = true;
    }
  }

  // x = V y with R y = Q^T delta.
  const size_t k = v_basis.size();
  std::vector<double> y(k, 0.0);
  for (size_t row = k; row-- > 0;) {
    double acc = qtb[row];
    for (size_t col = row + 1; col < k; ++col) acc -= r_columns[col][row] * y[col];
    y[row] = acc / r_columns[row][row];
  }
  split.latent_step.assign(dim, 0.0);
  for (size_t j = 0; j < k; ++j) {
    for (size_t i = 0; i < dim; ++i) split.latent_step[i] += y[j] * v_basis[j][i];
  }
  return split;
}

void WriteAttackCsv(std::span<const AttackRecord> records, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  out.precision(17);
  out << "sample_index,space,epsilon,clean_pred,adv_pred,y_true_before,y_true_after,"
         "perturbation_norm\n";
  for (const AttackRecord& r : records) {
    out << r.sample_index << ',' << AttackSpaceName(r.space) << ',' << r.epsilon << ','
        << r.clean_prediction << ',' << r.adversarial_prediction << ','
        << LabelValue(r.label_before) << ',' << LabelValue(r.label_after) << ','
        << r.perturbation_norm << '\n';
  }
  out.close();
  if (!out) throw Error(ErrorCode::kIo, path.string() + ": cannot write attack results");
}

}  // namespace squiggles
