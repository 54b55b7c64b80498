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

#include "predicates.h"

#include <algorithm>
#include <array>
#include <cmath>

namespace squiggles::internal {
namespace {

constexpr double kEpsilon = 0x1.0p-53;
constexpr double kOrientBound = (3.0 + 16.0 * kEpsilon) * kEpsilon;

struct Pair {
  double hi;
  double lo;
};

inline Pair TwoSum(double a, double b) {
  const double s = a + b;
  const double bv = s - a;
  const double av = s - bv;
  return {s, (a - av) + (b - bv)};
}

inline Pair TwoDiff(double a, double b) { return TwoSum(a, -b); }

inline Pair TwoProduct(double a, double b) {
  const double p = a * b;
  return {p, std::fma(a, b, -p)};
}

// Adds `value` into a nonoverlapping expansion (increasing magnitude).
// Returns the new length.
int GrowExpansion(double* e, int length, double value) {
  double q = value;
  for (int i = 0; i < length; ++i) {
    const Pair s = TwoSum(q, e[i]);
    e[i] = s.lo;
    q = s.hi;
  }
  e[length] = q;
  return length + 1;
}

int SignOfExactSum(const double* terms, int count) {
  std::array<double, 40> expansion{};
  int length = 0;
  for (int i = 0; i < count; ++i) {
    length = GrowExpansion(expansion.data(), length, terms[i]);
  }
  // The most significant nonzero component carries the sign.
  for (int i = length - 1; i >= 0; --i) {
    if (expansion[i] > 0) return 1;
    if (expansion[i] < 0) return -1;
  }
  return 0;
}

int Orient2dExact(const Point& a, const Point& b, const Point& c) {
  const Pair bax = TwoDiff(b.x, a.x);
  const Pair bay = TwoDiff(b.y, a.y);
  const Pair cax = TwoDiff(c.x, a.x);
  const Pair cay = TwoDiff(c.y, a.y);
  // (bax)(cay) - (bay)(cax), each factor an exact two-term sum.
  std::array<double, 16> terms{};
  int n = 0;
  const double l1[2] = {bax.hi, bax.lo};
  const double l2[2] = {cay.hi, cay.lo};
  const double r1[2] = {bay.hi, bay.lo};
  const double r2[2] = {cax.hi, cax.lo};
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const Pair lp = TwoProduct(l1[i], l2[j]);
      const Pair rp = TwoProduct(r1[i], r2[j]);
      terms[n++] = lp.hi;
      terms[n++] = lp.lo;
      terms[n++] = -rp.hi;
      terms[n++] = -rp.lo;
    }
  }
  return SignOfExactSum(terms.data(), n);
}

}  // namespace

int Orient2d(const Point& a, const Point& b, const Point& c) {
  const double left = (b.x - a.x) * (c.y - a.y);
  const double right = (b.y - a.y) * (c.x - a.x);
  const double det = left - right;
  const double bound = kOrientBound * (std::abs(left) + std::abs(right));
  if (det > bound) return 1;
  if (-det > bound) return -1;
  return Orient2dExact(a, b, c);
}

bool OnSegmentIfCollinear(const Point& a, const Point& b, const Point& p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
         std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
}

bool SegmentsIntersect(const Point& p1, const Point& p2, const Point& q1,
                       const Point& q2) {
  const int d1 = Orient2d(q1, q2, p1);
  const int d2 = Orient2d(q1, q2, p2);
  const int d3 = Orient2d(p1, p2, q1);
  const int d4 = Orient2d(p1, p2, q2);
  if (d1 * d2 < 0 && d3 * d4 < 0) return true;
  if (d1 == 0 && OnSegmentIfCollinear(q1, q2, p1)) return true;
  if (d2 == 0 && OnSegmentIfCollinear(q1, q2, p2)) return true;
  if (d3 == 0 && OnSegmentIfCollinear(p1, p2, q1)) return true;
  if (d4 == 0 && OnSegmentIfCollinear(p1, p2, q2)) return true;
  return false;
}

}  // namespace squiggles::internal
