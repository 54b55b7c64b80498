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

#include "squiggles/curve.h"

#include <cmath>
#include <numbers>
#include <string>

#include "squiggles/errors.h"

namespace squiggles {

std::string_view VariantName(Variant variant) {
  return variant == Variant::kTaylor ? "taylor" : "sinenet";
}

Variant ParseVariant(std::string_view name) {
  if (name == "taylor") return Variant::kTaylor;
  if (name == "sinenet") return Variant::kSineNet;
  throw Error(ErrorCode::kInvalidConfig,
              "unknown variant '" + std::string(name) + "'");
}

Latent::Latent(Variant variant, int terms)
    : Latent(variant, terms,
             std::vector<double>(BlocksPerTerm(variant) * terms, 0.0)) {}

Latent::Latent(Variant variant, int terms, std::vector<double> values)
    : variant_(variant), terms_(terms), values_(std::move(values)) {
  if (terms < 1) {
    throw Error(ErrorCode::kInvalidConfig, "latent needs at least one term");
  }
  if (static_cast<int>(values_.size()) != BlocksPerTerm(variant) * terms) {
    throw Error(ErrorCode::kInvalidInput,
                "latent length " + std::to_string(values_.size()) +
                    " does not match " + std::string(VariantName(variant)) +
                    " with " + std::to_string(terms) + " terms");
  }
}

std::span<const double> Latent::Block(int block) const {
  if (block >= BlocksPerTerm(variant_)) return {};
  return std::span<const double>(values_).subspan(block * terms_, terms_);
}

std::span<double> Latent::Block(int block) {
  if (block >= BlocksPerTerm(variant_)) return {};
  return std::span<double>(values_).subspan(block * terms_, terms_);
}

bool Latent::AllFinite() const {
  for (double v : values_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

SampleTimes SampleTimes::Uniform(double lo, double hi, int count) {
  if (count < 2 || !(hi > lo)) {
    throw Error(ErrorCode::kInvalidConfig,
                "sample times need count >= 2 and hi > lo");
  }
  std::vector<double> t(count);
  const double step = (hi - lo) / (count - 1);
  for (int k = 0; k < count; ++k) t[k] = lo + k * step;
  t.back() = hi;
  return SampleTimes(std::move(t), step);
}

SampleTimes SampleTimes::Default(Variant variant) {
  return variant == Variant::kTaylor ? Uniform(-3.0, 3.0) : Uniform(-2.0, 2.0);
}

CurveConfig CurveConfig::Default(Variant variant) {
  return CurveConfig{variant,
                     variant == Variant::kTaylor ? kDefaultTaylorTerms
                                                 : kDefaultSineTerms,
                     SampleTimes::Default(variant)};
}

Latent SampleTaylor(const SampleKey& key, int terms) {
  Latent latent(Variant::kTaylor, terms);
  RandomStream a = key.Stream(StreamTag::kTaylorA);
  RandomStream b = key.Stream(StreamTag::kTaylorB);
  for (double& v : latent.a()) v = a.NextUniform(-1.0, 1.0);
  for (double& v : latent.b()) v = b.NextUniform(-1.0, 1.0);
  return latent;
}

Latent SampleSineNet(const SampleKey& key, int terms) {
  Latent latent(Variant::kSineNet, terms);
  RandomStream a = key.Stream(StreamTag::kSineAmplitudeA);
  RandomStream b = key.Stream(StreamTag::kSineAmplitudeB);
  RandomStream omega = key.Stream(StreamTag::kSineFrequency);
  RandomStream phase = key.Stream(StreamTag::kSinePhase);
  for (double& v : latent.a()) v = a.NextNormal();
  for (double& v : latent.b()) v = b.NextNormal();
  for (double& v : latent.omega()) v = omega.NextNormal();
  for (double& v : latent.phase()) {
    v = phase.NextUniform(0.0, 2.0 * std::numbers::pi);
  }
  return latent;
}

Latent SampleLatent(const CurveConfig& config, const SampleKey& key) {
  return config.variant == Variant::kTaylor ? SampleTaylor(key, config.terms)
                                            : SampleSineNet(key, config.terms);
}

Polyline EvalTaylor(const Latent& latent, const SampleTimes& times) {
  const int n = latent.terms();
  // a_i / i! for i = 1..n, stored at [i - 1].
  std::vector<double> ca(n), cb(n);
  double inv_factorial = 1.0;
  for (int i = 1; i <= n; ++i) {
    inv_factorial /= i;
    ca[i - 1] = latent.a()[i - 1] * inv_factorial;
    cb[i - 1] = latent.b()[i - 1] * inv_factorial;
  }
  Polyline out(times.size());
  for (int k = 0; k < times.size(); ++k) {
    const double t = times.values()[k];
    double x = 0.0, y = 0.0;
    for (int i = n - 1; i >= 0; --i) {
      x = x * t + ca[i];
      y = y * t + cb[i];
    }
    out[k] = {x * t, y * t};
  }
  return out;
}

Polyline EvalSineNet(const Latent& latent, const SampleTimes& times) {
  const auto a = latent.a();
  const auto b = latent.b();
  Polyline out(times.size());
  internal::ForEachSineTerm(
      latent, times,
      [&](int i, std::span<const double> s, std::span<const double>) {
        for (size_t k = 0; k < out.size(); ++k) {
          out[k].x += a[i] * s[k];
          out[k].y += b[i] * s[k];
        }
      });
  return out;
}

Polyline EvalCurve(const Latent& latent, const SampleTimes& times) {
  return latent.variant() == Variant::kTaylor ? EvalTaylor(latent, times)
                                              : EvalSineNet(latent, times);
}

}  // namespace squiggles
