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

#include "squiggles/random.h"

#include <cmath>
#include <numbers>

namespace squiggles {
namespace {

constexpr uint32_t kPhiloxW32A = 0x9E3779B9;
constexpr uint32_t kPhiloxW32B = 0xBB67AE85;
constexpr uint32_t kPhiloxM4x32A = 0xD2511F53;
constexpr uint32_t kPhiloxM4x32B = 0xCD9E8D57;

inline void MulHiLo(uint32_t a, uint32_t b, uint32_t* lo, uint32_t* hi) {
  const uint64_t product = static_cast<uint64_t>(a) * b;
  *lo = static_cast<uint32_t>(product);
  *hi = static_cast<uint32_t>(product >> 32);
}

inline PhiloxBlock Round(const PhiloxBlock& ctr, const PhiloxKey& key) {
  uint32_t lo0, hi0, lo1, hi1;
  MulHiLo(kPhiloxM4x32A, ctr[0], &lo0, &hi0);
  MulHiLo(kPhiloxM4x32B, ctr[2], &lo1, &hi1);
  return {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
}

}  // namespace

PhiloxBlock Philox4x32(PhiloxBlock counter, PhiloxKey key) {
  for (int round = 0; round < 10; ++round) {
    counter = Round(counter, key);
    key[0] += kPhiloxW32A;
    key[1] += kPhiloxW32B;
  }
  return counter;
}

RandomStream::RandomStream(uint64_t seed, uint64_t index, StreamTag tag)
    : key_{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32)},
      counter_{0, static_cast<uint32_t>(tag), static_cast<uint32_t>(index),
               static_cast<uint32_t>(index >> 32)} {}

void RandomStream::Refill() {
  buffer_ = Philox4x32(counter_, key_);
  ++counter_[0];
  position_ = 0;
}

uint32_t RandomStream::NextU32() {
  if (position_ == 4) Refill();
  return buffer_[position_++];
}

uint64_t RandomStream::NextU64() {
  const uint64_t hi = NextU32();
  const uint64_t lo = NextU32();
  return (hi << 32) | lo;
}

double RandomStream::NextUniform() {
  return static_cast<double>(NextU64() >> 11) * 0x1.0p-53;
}

double RandomStream::NextUniform(double lo, double hi) {
  return lo + (hi - lo) * NextUniform();
}

double RandomStream::NextNormal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  // u1 in (0, 1] keeps the logarithm finite.
  const double u1 = static_cast<double>((NextU64() >> 11) + 1) * 0x1.0p-53;
  const double u2 = NextUniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_normal_ = radius * std::sin(angle);
  has_cached_normal_ = true;
  return radius * std::cos(angle);
}

}  // namespace squiggles
