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

// Latent codes and the two curve families.
//
// Taylor:  x(t) = sum_{i=1..n} a_i t^i / i!,  y(t) likewise with b.
// SineNet: (x, y)(t) = sum_{i=1..n} (a_i, b_i) sin(omega_i t + phi_i).
//
// All curve math runs in double precision.

#ifndef SQUIGGLES_CURVE_H_
#define SQUIGGLES_CURVE_H_

#include <cmath>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "squiggles/random.h"

namespace squiggles {

enum class Variant : uint8_t { kTaylor = 0, kSineNet = 1 };

std::string_view VariantName(Variant variant);
// Accepts "taylor" or "sinenet"; throws kInvalidConfig otherwise.
Variant ParseVariant(std::string_view name);

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

using Polyline = std::vector<Point>;

inline constexpr int kDefaultTaylorTerms = 7;
inline constexpr int kDefaultSineTerms = 300;
inline constexpr int kDefaultCurvePoints = 100;

// Number of latent blocks per term: Taylor (a, b), SineNet (a, b, omega, phi).
inline constexpr int BlocksPerTerm(Variant variant) {
  return variant == Variant::kTaylor ? 2 : 4;
}

// A latent code stored flat so attacks can treat it as a vector. Block layout
// is [a | b] for Taylor and [a | b | omega | phi] for SineNet. Phases are kept
// unconstrained; the sinusoid reads them mod 2*pi.
class Latent {
 public:
  Latent() = default;
  Latent(Variant variant, int terms);
  Latent(Variant variant, int terms, std::vector<double> values);

  Variant variant() const { return variant_; }
  int terms() const { return terms_; }
  int size() const { return static_cast<int>(values_.size()); }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  std::span<const double> a() const { return Block(0); }
  std::span<const double> b() const { return Block(1); }
  std::span<const double> omega() const { return Block(2); }
  std::span<const double> phase() const { return Block(3); }
  std::span<double> a() { return Block(0); }
  std::span<double> b() { return Block(1); }
  std::span<double> omega() { return Block(2); }
  std::span<double> phase() { return Block(3); }

  bool AllFinite() const;

  friend bool operator==(const Latent&, const Latent&) = default;

 private:
  std::span<const double> Block(int block) const;
  std::span<double> Block(int block);

  Variant variant_ = Variant::kTaylor;
  int terms_ = 0;
  std::vector<double> values_;
};

// Fixed evaluation times: `count` evenly spaced values over [lo, hi].
class SampleTimes {
 public:
  static SampleTimes Uniform(double lo, double hi,
                             int count = kDefaultCurvePoints);
  // [-3, 3] for Taylor, [-2, 2] for SineNet, 100 points.
  static SampleTimes Default(Variant variant);

  std::span<const double> values() const { return values_; }
  int size() const { return static_cast<int>(values_.size()); }
  double lo() const { return values_.front(); }
  double hi() const { return values_.back(); }
  double step() const { return step_; }

  bool operator==(const SampleTimes&) const = default;

 private:
  SampleTimes(std::vector<double> values, double step)
      : values_(std::move(values)), step_(step) {}

  std::vector<double> values_;
  double step_ = 0.0;
};

struct CurveConfig {
  Variant variant = Variant::kSineNet;
  int terms = kDefaultSineTerms;
  SampleTimes times = SampleTimes::Default(Variant::kSineNet);

  static CurveConfig Default(Variant variant);
  int latent_size() const { return BlocksPerTerm(variant) * terms; }
  bool operator==(const CurveConfig&) const = default;
};

// Coefficients i.i.d. uniform on [-1, 1).
Latent SampleTaylor(const SampleKey& key, int terms = kDefaultTaylorTerms);
// a, b, omega i.i.d. standard normal; phi i.i.d. uniform on [0, 2*pi).
Latent SampleSineNet(const SampleKey& key, int terms = kDefaultSineTerms);
Latent SampleLatent(const CurveConfig& config, const SampleKey& key);

Polyline EvalTaylor(const Latent& latent, const SampleTimes& times);
Polyline EvalSineNet(const Latent& latent, const SampleTimes& times);
Polyline EvalCurve(const Latent& latent, const SampleTimes& times);

namespace internal {

// Calls fn(i, sin_i, cos_i) for each SineNet term i, where sin_i[k] and
// cos_i[k] are sin/cos(omega_i * t_k + phi_i). Angles advance by the
// angle-addition recurrence and are re-anchored with exact sin/cos every
// kSineAnchorStride points and at the last point.
inline constexpr int kSineAnchorStride = 16;

template <typename Fn>
void ForEachSineTerm(const Latent& latent, const SampleTimes& times, Fn&& fn) {
  const int points = times.size();
  std::vector<double> s(points), c(points);
  const auto t = times.values();
  for (int i = 0; i < latent.terms(); ++i) {
    const double omega = latent.omega()[i];
    const double phase = latent.phase()[i];
    const double delta = omega * times.step();
    const double sin_delta = std::sin(delta);
    const double cos_delta = std::cos(delta);
    for (int k = 0; k < points; ++k) {
      if (k % kSineAnchorStride == 0 || k == points - 1) {
        const double angle = omega * t[k] + phase;
        s[k] = std::sin(angle);
        c[k] = std::cos(angle);
      } else {
        s[k] = s[k - 1] * cos_delta + c[k - 1] * sin_delta;
        c[k] = c[k - 1] * cos_delta - s[k - 1] * sin_delta;
      }
    }
    fn(i, std::span<const double>(s), std::span<const double>(c));
  }
}

}  // namespace internal

}  // namespace squiggles

#endif  // SQUIGGLES_CURVE_H_
