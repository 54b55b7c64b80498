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

// Slow, independent reference implementations used only by tests.

#ifndef SQUIGGLES_TESTS_ORACLES_H_
#define SQUIGGLES_TESTS_ORACLES_H_

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "squiggles/curve.h"

namespace squiggles::oracle {

// Term-by-term Taylor evaluation with explicit powers and factorials.
inline Polyline NaiveTaylor(const Latent& z, const SampleTimes& times) {
  Polyline out;
  for (double t : times.values()) {
    double x = 0.0, y = 0.0;
    for (int i = 1; i <= z.terms(); ++i) {
      const double basis = std::pow(t, i) / std::tgamma(i + 1.0);
      x += z.a()[i - 1] * basis;
      y += z.b()[i - 1] * basis;
    }
    out.push_back({x, y});
  }
  return out;
}

// Direct sin() per term and point.
inline Polyline NaiveSineNet(const Latent& z, const SampleTimes& times) {
  Polyline out;
  for (double t : times.values()) {
    double x = 0.0, y = 0.0;
    for (int i = 0; i < z.terms(); ++i) {
      const double s = std::sin(z.omega()[i] * t + z.phase()[i]);
      x += z.a()[i] * s;
      y += z.b()[i] * s;
    }
    out.push_back({x, y});
  }
  return out;
}

// ||a - b|| / ||b|| over all coordinates.
inline double RelativeError(const Polyline& a, const Polyline& b) {
  double num = 0.0, den = 0.0;
  for (size_t k = 0; k < b.size(); ++k) {
    num += (a[k].x - b[k].x) * (a[k].x - b[k].x) +
           (a[k].y - b[k].y) * (a[k].y - b[k].y);
    den += b[k].x * b[k].x + b[k].y * b[k].y;
  }
  return den == 0.0 ? std::sqrt(num) : std::sqrt(num / den);
}

// Orientation in exact rational arithmetic.
inline int ExactOrient(const Point& a, const Point& b, const Point& c) {
  const mpq_class ax(a.x), ay(a.y), bx(b.x), by(b.y), cx(c.x), cy(c.y);
  const mpq_class det = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax);
  return sgn(det);
}

inline bool Within(double lo, double hi, double v) {
  return std::min(lo, hi) <= v && v <= std::max(lo, hi);
}

inline bool ExactSegmentsTouch(const Point& p1, const Point& p2,
                               const Point& q1, const Point& q2) {
  if (std::max(p1.x, p2.x) < std::min(q1.x, q2.x) ||
      std::max(q1.x, q2.x) < std::min(p1.x, p2.x) ||
      std::max(p1.y, p2.y) < std::min(q1.y, q2.y) ||
      std::max(q1.y, q2.y) < std::min(p1.y, p2.y)) {
    return false;
  }
  const int o1 = ExactOrient(p1, p2, q1);
  const int o2 = ExactOrient(p1, p2, q2);
  const int o3 = ExactOrient(q1, q2, p1);
  const int o4 = ExactOrient(q1, q2, p2);
  if (o1 != o2 && o3 != o4 && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0) {
    return true;
  }
  auto on = [](const Point& a, const Point& b, const Point& p) {
    return Within(a.x, b.x, p.x) && Within(a.y, b.y, p.y);
  };
  return (o1 == 0 && on(p1, p2, q1)) || (o2 == 0 && on(p1, p2, q2)) ||
         (o3 == 0 && on(q1, q2, p1)) || (o4 == 0 && on(q1, q2, p2));
}

// All-pairs reference labeler with the same semantics as LabelCurve:
// consecutive repeats collapse; non-adjacent segments may not meet; adjacent
// segments may not fold back onto each other.
inline bool BruteForceSelfIntersecting(const Polyline& input) {
  Polyline v;
  for (const Point& p : input) {
    if (v.empty() || !(v.back() == p)) v.push_back(p);
  }
  const int segments = static_cast<int>(v.size()) - 1;
  for (int i = 0; i < segments; ++i) {
    for (int j = i + 1; j < segments; ++j) {
      if (j == i + 1) {
        const Point& a = v[i];
        const Point& m = v[i + 1];
        const Point& c = v[i + 2];
        if (ExactOrient(a, m, c) != 0) continue;
        // Collinear: fold-back iff (a - m) and (c - m) point the same way.
        const mpq_class dot = (mpq_class(a.x) - m.x) * (mpq_class(c.x) - m.x) +
                              (mpq_class(a.y) - m.y) * (mpq_class(c.y) - m.y);
        if (sgn(dot) > 0) return true;
        continue;
      }
      if (ExactSegmentsTouch(v[i], v[i + 1], v[j], v[j + 1])) return true;
    }
  }
  return false;
}

// Distance from p to the closed segment [a, b].
inline double DistanceToSegment(const Point& p, const Point& a, const Point& b) {
  const double vx = b.x - a.x, vy = b.y - a.y;
  const double len2 = vx * vx + vy * vy;
  double t = len2 > 0 ? ((p.x - a.x) * vx + (p.y - a.y) * vy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.x - (a.x + t * vx), p.y - (a.y + t * vy));
}

}  // namespace squiggles::oracle

#endif  // SQUIGGLES_TESTS_ORACLES_H_
