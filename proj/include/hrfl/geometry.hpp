/*
 * Copyright 2026 The hrfl Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <algorithm>
#include <optional>

#include "hrfl/core.hpp"

namespace hrfl {

/// A point of the space-time plane.
struct SpaceTimePoint {
  double x{};
  double t{};

  friend bool operator==(const SpaceTimePoint&, const SpaceTimePoint&) = default;
  friend SpaceTimePoint operator+(SpaceTimePoint a, SpaceTimePoint b) { return {a.x + b.x, a.t + b.t}; }
  friend SpaceTimePoint operator-(SpaceTimePoint a, SpaceTimePoint b) { return {a.x - b.x, a.t - b.t}; }
  friend SpaceTimePoint operator*(double s, SpaceTimePoint a) { return {s * a.x, s * a.t}; }
};

inline constexpr SpaceTimePoint kOrigin{0.0, 0.0};

/// The trajectory {(x + v t, t)} of a traveller through x at time 0.
/// Lines parallel to the space axis have no representation.
struct LineParam {
  double x{};
  double v{};

  [[nodiscard]] double position_at(double t) const { return x + v * t; }
};

struct Segment {
  SpaceTimePoint a;
  SpaceTimePoint b;

  [[nodiscard]] bool degenerate() const { return a == b; }
  [[nodiscard]] Segment reversed() const { return {b, a}; }
};

enum class Side { kLeft, kRight };
enum class Crossing { kPlus, kMinus, kNoCross };
enum class Orientation { kPlus, kMinus, kBoth };

/// The right half-plane {x >= line.x + t line.v} is closed.
inline Side side_of(const LineParam& line, const SpaceTimePoint& p) {
  return p.x >= line.x + p.t * line.v ? Side::kRight : Side::kLeft;
}

namespace detail {

/// +1 for a Plus crossing, -1 for Minus, 0 otherwise. No degeneracy check.
inline int crossing_sign(double lx, double lv, const SpaceTimePoint& a, const SpaceTimePoint& b) {
  const bool a_right = a.x >= lx + a.t * lv;
  const bool b_right = b.x >= lx + b.t * lv;
  return static_cast<int>(b_right) - static_cast<int>(a_right);
}

}  // namespace detail

/// Orientation of the crossing of `seg` by `line`; nullopt for a degenerate segment.
inline std::optional<Crossing> classify_crossing(const LineParam& line, const Segment& seg) {
  if (seg.degenerate()) return std::nullopt;
  switch (detail::crossing_sign(line.x, line.v, seg.a, seg.b)) {
    case 1:
      return Crossing::kPlus;
    case -1:
      return Crossing::kMinus;
    default:
      return Crossing::kNoCross;
  }
}

/// Pivot of a point for velocity v: the intercept of the line through p with slope v.
inline double pivot(double v, const SpaceTimePoint& p) { return p.x - v * p.t; }

/**
 * Intercepts x for which l(x, v) meets `seg`: the closed interval between
 * the two endpoint pivots. Plus crossings occupy (pivot(a), pivot(b)] when
 * pivot(b) > pivot(a), Minus crossings the mirror image.
 */
inline Interval crossing_interval(double v, const Segment& seg) {
  const double pa = pivot(v, seg.a);
  const double pb = pivot(v, seg.b);
  return {std::min(pa, pb), std::max(pa, pb)};
}

}  // namespace hrfl
