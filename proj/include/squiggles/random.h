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

// Counter-based random streams.
//
// Every random draw in the project is a pure function of
// (global seed, sample index, field tag, draw position). A stream is cheap to
// construct, so callers build one per field instead of threading a mutable
// generator through the code. This makes generation independent of worker
// count and ordering.
//
// The block function is Philox4x32-10 (Salmon et al., SC'11). Counter layout:
//   word 0: draw block within the stream
//   word 1: field tag
//   word 2: sample index, low 32 bits
//   word 3: sample index, high 32 bits
// Key: global seed split into low/high 32-bit halves.

#ifndef SQUIGGLES_RANDOM_H_
#define SQUIGGLES_RANDOM_H_

#include <array>
#include <cstdint>

namespace squiggles {

using PhiloxBlock = std::array<uint32_t, 4>;
using PhiloxKey = std::array<uint32_t, 2>;

// Ten rounds of Philox4x32 on `counter` under `key`.
PhiloxBlock Philox4x32(PhiloxBlock counter, PhiloxKey key);

// Field tags. Values are part of the on-disk determinism contract; never
// renumber them.
enum class StreamTag : uint32_t {
  kTaylorA = 1,
  kTaylorB = 2,
  kSineAmplitudeA = 3,
  kSineAmplitudeB = 4,
  kSineFrequency = 5,
  kSinePhase = 6,
  kTrainingNoise = 16,
  kGaussianAttack = 17,
  kParameterInit = 32,
  kShuffle = 33,
};

class RandomStream {
 public:
  RandomStream(uint64_t seed, uint64_t index, StreamTag tag);

  uint32_t NextU32();
  uint64_t NextU64();
  // Uniform on [0, 1) with 53 random bits.
  double NextUniform();
  // Uniform on [lo, hi).
  double NextUniform(double lo, double hi);
  // Standard normal via Box-Muller; draws come in pairs, the second is cached.
  double NextNormal();

 private:
  void Refill();

  PhiloxKey key_;
  PhiloxBlock counter_;
  PhiloxBlock buffer_{};
  int position_ = 4;
  bool has_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

// (seed, index) pair identifying one sample's randomness.
struct SampleKey {
  uint64_t seed = 0;
  uint64_t index = 0;

  RandomStream Stream(StreamTag tag) const {
    return RandomStream(seed, index, tag);
  }
};

}  // namespace squiggles

#endif  // SQUIGGLES_RANDOM_H_
