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

// Ground-truth labels: is the piecewise-linear curve through the points
// self-intersecting?
//
// Semantics, applied after collapsing runs of identical consecutive points:
//  - Two non-adjacent segments that share any point (proper crossing,
//    endpoint touch or collinear overlap) make the curve self-intersecting.
//    This includes a closed curve whose first and last points coincide.
//  - Adjacent segments meet at their shared vertex; that alone is fine, but
//    folding back along the same line (overlap beyond the vertex) counts.
// All decisions use exact orientation predicates.

#ifndef SQUIGGLES_LABELER_H_
#define SQUIGGLES_LABELER_H_

#include <cstdint>
#include <span>
#include <vector>

#include "squiggles/curve.h"

namespace squiggles {

enum class Label : uint8_t { kSimple = 0, kSelfIntersecting = 1 };

inline int LabelValue(Label label) { return static_cast<int>(label); }
inline Label FlipLabel(Label label) {
  return label == Label::kSimple ? Label::kSelfIntersecting : Label::kSimple;
}

// Throws kInvalidInput for fewer than 3 points or non-finite coordinates.
Label LabelCurve(std::span<const Point> points);

struct Crossing {
  Point at;
  // Segment s joins points s and s + 1 of the input.
  int first_segment = 0;
  int second_segment = 0;
};

// Every intersection location between non-adjacent segments. A collinear
// overlap is reported by the two ends of the shared piece.
std::vector<Crossing> IntersectionPoints(std::span<const Point> points);

}  // namespace squiggles

#endif  // SQUIGGLES_LABELER_H_
