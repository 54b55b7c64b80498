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

#include "squiggles/labeler.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "predicates.h"
#include "squiggles/errors.h"

namespace squiggles {
namespace {

using internal::OnSegmentIfCollinear;
using internal::Orient2d;
using internal::SegmentsIntersect;

struct Vertex {
  Point p;
  int source = 0;  // first index of this point in the caller's input
};

std::vector<Vertex> CollapseRepeats(std::span<const Point> points) {
  if (points.size() < 3) {
    throw Error(ErrorCode::kInvalidInput, "labeling needs at least 3 points");
  }
  std::vector<Vertex> out;
  out.reserve(points.size());
  for (size_t k = 0; k < points.size(); ++k) {
    const Point& p = points[k];
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw Error(ErrorCode::kInvalidInput, "non-finite curve coordinate");
    }
    if (out.empty() || !(out.back().p == p)) {
      out.push_back({p, static_cast<int>(k)});
    }
  }
  return out;
}

// Segments s and s + 1 share vertex s + 1; they overlap beyond it when the
// three vertices are collinear and the outer two lie on the same side.
bool FoldsBack(const Point& a, const Point& shared, const Point& c) {
  if (Orient2d(a, shared, c) != 0) return false;
  if (a.x != shared.x) return (a.x < shared.x) == (c.x < shared.x);
  return (a.y < shared.y) == (c.y < shared.y);
}

struct Box {
  double xmin, xmax, ymin, ymax;
};

// Calls visit(i, j) with i < j - 1 for every pair of non-adjacent segments
// whose bounding boxes overlap. Sweep over x with candidates sorted by xmin;
// stops as soon as visit returns true.
template <typename Visit>
bool SweepPairs(const std::vector<Vertex>& v, Visit&& visit) {
  const int segments = static_cast<int>(v.size()) - 1;
  std::vector<Box> boxes(segments);
  for (int s = 0; s < segments; ++s) {
    const Point& a = v[s].p;
    const Point& b = v[s + 1].p;
    boxes[s] = {std::min(a.x, b.x), std::max(a.x, b.x), std::min(a.y, b.y),
                std::max(a.y, b.y)};
  }
  std::vector<int> order(segments);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int l, int r) {
    return boxes[l].xmin < boxes[r].xmin ||
           (boxes[l].xmin == boxes[r].xmin && l < r);
  });
  for (int oi = 0; oi < segments; ++oi) {
    const int i = order[oi];
    const Box& bi = boxes[i];
    for (int oj = oi + 1; oj < segments; ++oj) {
      const int j = order[oj];
      const Box& bj = boxes[j];
      if (bj.xmin > bi.xmax) break;
      if (bj.ymin > bi.ymax || bi.ymin > bj.ymax) continue;
      if (std::abs(i - j) < 2) continue;
      if (visit(std::min(i, j), std::max(i, j))) return true;
    }
  }
  return false;
}

// Fills `out` with the points shared by two intersecting segments.
void SharedPoints(const Point& p1, const Point& p2, const Point& q1,
                  const Point& q2, std::vector<Point>& out) {
  out.clear();
  const int d1 = Orient2d(q1, q2, p1);
  const int d2 = Orient2d(q1, q2, p2);
  const int d3 = Orient2d(p1, p2, q1);
  const int d4 = Orient2d(p1, p2, q2);
  if (d1 * d2 < 0 && d3 * d4 < 0) {
    const double a1 = (q2.x - q1.x) * (p1.y - q1.y) - (q2.y - q1.y) * (p1.x - q1.x);
    const double a2 = (q2.x - q1.x) * (p2.y - q1.y) - (q2.y - q1.y) * (p2.x - q1.x);
    const double t = a1 / (a1 - a2);
    out.push_back({p1.x + t * (p2.x - p1.x), p1.y + t * (p2.y - p1.y)});
    return;
  }
  auto add = [&](const Point& p) {
    if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
  };
  if (d1 == 0 && OnSegmentIfCollinear(q1, q2, p1)) add(p1);
  if (d2 == 0 && OnSegmentIfCollinear(q1, q2, p2)) add(p2);
  if (d3 == 0 && OnSegmentIfCollinear(p1, p2, q1)) add(q1);
  if (d4 == 0 && OnSegmentIfCollinear(p1, p2, q2)) add(q2);
}

}  // namespace

Label LabelCurve(std::span<const Point> points) {
  const std::vector<Vertex> v = CollapseRepeats(points);
  const int segments = static_cast<int>(v.size()) - 1;
  for (int s = 0; s + 1 < segments; ++s) {
    if (FoldsBack(v[s].p, v[s + 1].p, v[s + 2].p)) {
      return Label::kSelfIntersecting;
    }
  }
  const bool hit = SweepPairs(v, [&](int i, int j) {
    return SegmentsIntersect(v[i].p, v[i + 1].p, v[j].p, v[j + 1].p);
  });
  return hit ? Label::kSelfIntersecting : Label::kSimple;
}

std::vector<Crossing> IntersectionPoints(std::span<const Point> points) {
  const std::vector<Vertex> v = CollapseRepeats(points);
  std::vector<Crossing> crossings;
  std::vector<Point> shared;
  SweepPairs(v, [&](int i, int j) {
    SharedPoints(v[i].p, v[i + 1].p, v[j].p, v[j + 1].p, shared);
    for (const Point& p : shared) {
      crossings.push_back({p, v[i + 1].source - 1, v[j + 1].source - 1});
    }
    return false;
  });
  std::sort(crossings.begin(), crossings.end(),
            [](const Crossing& l, const Crossing& r) {
              return l.first_segment != r.first_segment
                         ? l.first_segment < r.first_segment
                         : l.second_segment < r.second_segment;
            });
  return crossings;
}

}  // namespace squiggles
