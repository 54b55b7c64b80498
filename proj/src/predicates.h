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

// Exact orientation predicate for double-precision points.
//
// A floating-point filter answers almost every query; near-degenerate inputs
// fall back to exact expansion arithmetic (error-free TwoSum/TwoProduct,
// Shewchuk-style expansions) so the sign is always the sign of the real
// determinant of the given doubles.

#ifndef SQUIGGLES_PREDICATES_H_
#define SQUIGGLES_PREDICATES_H_

#include "squiggles/curve.h"

namespace squiggles::internal {

// +1 if a, b, c turn counter-clockwise, -1 if clockwise, 0 if collinear.
int Orient2d(const Point& a, const Point& b, const Point& c);

// True if p lies on the closed segment [a, b], given that a, b, p are
// collinear. Comparisons only, hence exact.
bool OnSegmentIfCollinear(const Point& a, const Point& b, const Point& p);

// Closed-segment intersection test (touching and collinear overlap count).
bool SegmentsIntersect(const Point& p1, const Point& p2, const Point& q1,
                       const Point& q2);

}  // namespace squiggles::internal

#endif  // SQUIGGLES_PREDICATES_H_
