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

// Little-endian encoding helpers shared by the binary file formats.

#ifndef SQUIGGLES_BYTES_H_
#define SQUIGGLES_BYTES_H_

#include <bit>
#include <cstddef>
#include <cstdint>
#include <type_traits>

namespace squiggles::internal {

template <typename T>
void PutLE(char* out, T value) {
  using U = std::make_unsigned_t<T>;
  U u = static_cast<U>(value);
  for (size_t b = 0; b < sizeof(T); ++b) {
    out[b] = static_cast<char>((u >> (8 * b)) & 0xFF);
  }
}

template <typename T>
T GetLE(const char* in) {
  using U = std::make_unsigned_t<T>;
  U u = 0;
  for (size_t b = 0; b < sizeof(T); ++b) {
    u |= static_cast<U>(static_cast<unsigned char>(in[b])) << (8 * b);
  }
  return static_cast<T>(u);
}

inline void PutFloat(char* out, float value) {
  PutLE<uint32_t>(out, std::bit_cast<uint32_t>(value));
}

inline float GetFloat(const char* in) {
  return std::bit_cast<float>(GetLE<uint32_t>(in));
}

}  // namespace squiggles::internal

#endif  // SQUIGGLES_BYTES_H_
