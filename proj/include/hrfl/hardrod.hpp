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
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <queue>
#include <vector>

#include "hrfl/core.hpp"
#include "hrfl/summation.hpp"

namespace hrfl {

/// A rod occupying (y, y + r) and moving at velocity v.
struct Rod {
  double y{};
  double v{};
  double r{};

  friend bool operator==(const Rod&, const Rod&) = default;
};

using GasConfiguration = std::vector<PhasePoint>;
using RodConfiguration = std::vector<Rod>;

namespace detail {

inline void require_nonnegative_marks(const GasConfiguration& x) {
  for (const auto& p : x) {
    require(detail::all_finite(p.x, p.v, p.r), "configuration must be finite");
    require(p.r >= 0, "hard rods need nonnegative lengths");
  }
}

inline void require_nonnegative_lengths(const RodConfiguration& y) {
  for (const auto& p : y) {
    require(detail::all_finite(p.y, p.v, p.r), "configuration must be finite");
    require(p.r >= 0, "hard rods need nonnegative lengths");
  }
}

/**
 * S(< c) = sum of r over sites strictly left of c, for any c, after one
 * sort. m_z^x = S(< x) - S(< z).
 */
class LengthBelow {
 public:
  LengthBelow(const std::vector<double>& sites, const std::vector<double>& lengths) {
    std::vector<std::size_t> idx(sites.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return sites[a] < sites[b]; });
    sorted_.reserve(sites.size());
    prefix_.assign(1, 0.0);
    CompensatedSum acc;
    for (std::size_t i : idx) {
      sorted_.push_back(sites[i]);
      acc.add(lengths[i]);
      prefix_.push_back(acc.value());
    }
  }

  [[nodiscard]] double operator()(double c) const {
    const auto k = std::lower_bound(sorted_.begin(), sorted_.end(), c) - sorted_.begin();
    return prefix_[static_cast<std::size_t>(k)];
  }

 private:
  std::vector<double> sorted_;
  std::vector<double> prefix_;
};

inline LengthBelow gas_lengths(const GasConfiguration& x) {
  std::vector<double> s;
  std::vector<double> r;
  s.reserve(x.size());
  r.reserve(x.size());
  for (const auto& p : x) {
    s.push_back(p.x);
    r.push_back(p.r);
  }
  return {s, r};
}

inline LengthBelow rod_lengths(const RodConfiguration& y) {
  std::vector<double> s;
  std::vector<double> r;
  s.reserve(y.size());
  r.reserve(y.size());
  for (const auto& p : y) {
    s.push_back(p.y);
    r.push_back(p.r);
  }
  return {s, r};
}

}  // namespace detail

/// T_t: every particle moves ballistically.
inline GasConfiguration ideal_gas_evolve(const GasConfiguration& x, double t) {
  GasConfiguration out = x;
  for (auto& p : out) p.x += p.v * t;
  return out;
}

/// m_z^x: signed sum of r over z <= x~ < x minus x <= x~ < z.
inline double mass(const GasConfiguration& x, double z, double at) {
  CompensatedSum acc;
  for (const auto& p : x) {
    if (z <= p.x && p.x < at) acc.add(p.r);
    if (at <= p.x && p.x < z) acc.add(-p.r);
  }
  return acc.value();
}

/// D_z: x -> x + m_z^x.
inline RodConfiguration dilate(const GasConfiguration& x, double z) {
  detail::require_nonnegative_marks(x);
  const auto below = detail::gas_lengths(x);
  const double base = below(z);
  RodConfiguration out;
  out.reserve(x.size());
  for (const auto& p : x) out.push_back({p.x + (below(p.x) - base), p.v, p.r});
  return out;
}

/// True when no rod has z strictly inside.
inline bool no_rod_contains(const RodConfiguration& y, double z) {
  return std::none_of(y.begin(), y.end(), [z](const Rod& rod) { return rod.y < z && z < rod.y + rod.r; });
}

/// C_z: y -> y - m_z^y(Y). Inverse of D_z on configurations with no rod containing z.
inline GasConfiguration contract(const RodConfiguration& y, double z) {
  detail::require_nonnegative_lengths(y);
  detail::require(no_rod_contains(y, z), "contraction point lies inside a rod");
  const auto below = detail::rod_lengths(y);
  const double base = below(z);
  GasConfiguration out;
  out.reserve(y.size());
  for (const auto& rod : y) out.push_back({rod.y - (below(rod.y) - base), rod.v, rod.r});
  return out;
}

/**
 * Signed rod length crossing the line l(x, v) during [0, t]. A particle
 * starting on the line counts as to its right, matching the half-open
 * convention of m, so flux equals the left-limit surface increment
 * exactly.
 */
inline double flux(const GasConfiguration& gas, double x, double v, double t) {
  const double end = x + v * t;
  CompensatedSum acc;
  for (const auto& p : gas) {
    const double pe = p.x + t * p.v;
    if (p.x >= x && pe < end) acc.add(p.r);
    if (p.x < x && pe >= end) acc.add(-p.r);
  }
  return acc.value();
}

/// Position at time t of the quasi-particle started at x with velocity v.
inline double quasi_particle_position(const GasConfiguration& gas, double x, double v, double t) {
  return x + mass(gas, 0.0, x) + v * t + flux(gas, x, v, t);
}

/**
 * Left-limit surface H_N((x + v t)-, t) at each particle's own position,
 * unit weights: sum r over lines strictly left at time t minus lines
 * strictly left of the origin at time 0.
 */
inline std::vector<double> surface_heights(const GasConfiguration& gas, double t) {
  const std::size_t n = gas.size();
  std::vector<double> pos(n);
  for (std::size_t i = 0; i < n; ++i) pos[i] = gas[i].x + t * gas[i].v;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pos[a] < pos[b]; });
  ExactSum acc;
  for (const auto& p : gas) {
    if (0.0 > p.x) acc.add(-p.r);
  }
  std::vector<double> out(n);
  std::size_t j = 0;
  for (std::size_t k = 0; k < n;) {
    const double here = pos[order[k]];
    while (j < n && pos[order[j]] < here) acc.add(gas[order[j++]].r);
    const double h = acc.value();
    while (k < n && pos[order[k]] == here) out[order[k++]] = h;
  }
  return out;
}

/// Literal O(n^2) version of the same heights.
inline std::vector<double> surface_heights_naive(const GasConfiguration& gas, double t) {
  std::vector<double> out(gas.size());
  for (std::size_t i = 0; i < gas.size(); ++i) {
    const double bx = gas[i].x + t * gas[i].v;
    ExactSum acc;
    for (const auto& p : gas) {
      const int s = static_cast<int>(bx > p.x + t * p.v) - static_cast<int>(0.0 > p.x);
      if (s != 0) acc.add(s > 0 ? p.r : -p.r);
    }
    out[i] = acc.value();
  }
  return out;
}

/// Surface representation: (x + v t + H_N((x + v t)-, t), v, r) for every particle.
inline RodConfiguration evolve_surface(const GasConfiguration& gas, double t, bool naive = false) {
  detail::require_nonnegative_marks(gas);
  const auto h = naive ? surface_heights_naive(gas, t) : surface_heights(gas, t);
  RodConfiguration out;
  out.reserve(gas.size());
  for (std::size_t i = 0; i < gas.size(); ++i) {
    out.push_back({gas[i].x + gas[i].v * t + h[i], gas[i].v, gas[i].r});
  }
  return out;
}

/// Open intervals pairwise disjoint (up to `tol` of overlap) and lengths >= 0.
inline bool is_hard_rod_configuration(const RodConfiguration& y, double tol = 0.0) {
  for (const auto& rod : y) {
    if (!(rod.r >= 0) || !detail::all_finite(rod.y, rod.v, rod.r)) return false;
  }
  std::vector<std::size_t> idx(y.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return y[a].y < y[b].y || (y[a].y == y[b].y && y[a].r < y[b].r);
  });
  for (std::size_t k = 1; k < idx.size(); ++k) {
    const Rod& left = y[idx[k - 1]];
    const Rod& right = y[idx[k]];
    if (right.y < left.y + left.r - tol) return false;
  }
  return true;
}

struct EventOptions {
  double simultaneity_tol = 1e-12;  ///< interacting contacts closer than this in time are an error
  double overlap_tol = 1e-9;        ///< overlap beyond this is an invariant violation
};

struct EventResult {
  RodConfiguration rods;
  std::size_t collisions = 0;
};

/**
 * Event-driven oracle. Adjacent rods touch when the right end of the
 * faster left rod meets the left end of the slower right rod; then the
 * slow rod takes the fast rod's left end and the fast rod takes the slow
 * rod's right end. Negative t runs the dynamics backwards.
 */
inline EventResult evolve_events_counted(const RodConfiguration& input, double t, const EventOptions& opts = {}) {
  detail::require_nonnegative_lengths(input);
  detail::require(std::isfinite(t), "time must be finite");
  if (!is_hard_rod_configuration(input, opts.overlap_tol)) {
    throw InvariantError("input rods overlap");
  }
  const double sign = t < 0 ? -1.0 : 1.0;
  const double horizon = std::abs(t);
  const std::size_t n = input.size();

  // per rod: position at reference time, velocity (sign-adjusted), length
  std::vector<double> y0(n);
  std::vector<double> t0(n, 0.0);
  std::vector<double> vel(n);
  std::vector<double> len(n);
  for (std::size_t i = 0; i < n; ++i) {
    y0[i] = input[i].y;
    vel[i] = sign * input[i].v;
    len[i] = input[i].r;
  }
  auto at = [&](std::size_t i, double time) { return y0[i] + vel[i] * (time - t0[i]); };

  std::vector<std::size_t> slot(n);
  std::iota(slot.begin(), slot.end(), std::size_t{0});
  std::sort(slot.begin(), slot.end(), [&](std::size_t a, std::size_t b) {
    return y0[a] < y0[b] || (y0[a] == y0[b] && len[a] < len[b]);
  });

  struct Event {
    double time;
    std::size_t pair;  // slots pair, pair + 1
    std::uint64_t stamp;
    bool operator>(const Event& o) const { return time > o.time || (time == o.time && pair > o.pair); }
  };
  std::priority_queue<Event, std::vector<Event>, std::greater<>> queue;
  std::vector<std::uint64_t> stamp(n > 0 ? n - 1 : 0, 0);

  auto schedule = [&](std::size_t k, double now) {
    if (k + 1 >= n) return;
    ++stamp[k];
    const std::size_t a = slot[k];
    const std::size_t b = slot[k + 1];
    const double closing = vel[a] - vel[b];
    if (!(closing > 0)) return;
    const double gap = at(b, now) - (at(a, now) + len[a]);
    if (gap < -opts.overlap_tol) throw InvariantError("rods overlap during evolution");
    const double when = now + std::max(gap, 0.0) / closing;
    if (when <= horizon) queue.push({when, k, stamp[k]});
  };
  for (std::size_t k = 0; k + 1 < n; ++k) schedule(k, 0.0);

  std::size_t collisions = 0;
  auto valid = [&](const Event& e) { return e.stamp == stamp[e.pair]; };
  while (!queue.empty()) {
    const Event e = queue.top();
    queue.pop();
    if (!valid(e)) continue;
    // reject interacting near-simultaneous contacts
    while (!queue.empty() && !valid(queue.top())) queue.pop();
    if (!queue.empty()) {
      const Event& next = queue.top();
      const std::size_t d = next.pair > e.pair ? next.pair - e.pair : e.pair - next.pair;
      if (d <= 1 && next.time - e.time < opts.simultaneity_tol) {
        throw NumericalError("simultaneous collisions of neighbouring rods; regenerate the sample");
      }
    }
    const std::size_t k = e.pair;
    const std::size_t fast = slot[k];
    const std::size_t slow = slot[k + 1];
    const double fast_left = at(fast, e.time);
    const double slow_right = at(slow, e.time) + len[slow];
    y0[slow] = fast_left;
    y0[fast] = slow_right - len[fast];
    t0[slow] = e.time;
    t0[fast] = e.time;
    std::swap(slot[k], slot[k + 1]);
    ++collisions;
    ++stamp[k];
    if (k > 0) schedule(k - 1, e.time);
    schedule(k + 1, e.time);
  }

  EventResult out;
  out.collisions = collisions;
  out.rods.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.rods.push_back({at(i, horizon), input[i].v, len[i]});
  if (!is_hard_rod_configuration(out.rods, opts.overlap_tol)) throw InvariantError("evolution produced overlap");
  return out;
}

inline RodConfiguration evolve_events(const RodConfiguration& y, double t, const EventOptions& opts = {}) {
  return evolve_events_counted(y, t, opts).rods;
}

/// Translate every rod by d.
inline RodConfiguration shift(RodConfiguration y, double d) {
  for (auto& rod : y) rod.y += d;
  return y;
}

inline GasConfiguration shift(GasConfiguration x, double d) {
  for (auto& p : x) p.x += d;
  return x;
}

/// Hat-U_t = D_0 T_t C_0: the dynamics seen from a zero-length tracer at the origin.
inline RodConfiguration tagged_frame_evolve(const RodConfiguration& y, double t) {
  return dilate(ideal_gas_evolve(contract(y, 0.0), t), 0.0);
}

/// Displacement o_t of the zero-length zero-velocity tracer started at the origin.
inline double tracer_displacement(const GasConfiguration& x, double t) { return flux(x, 0.0, 0.0, t); }

/**
 * U_t through the tagged frame: shift Hat-U_t Y by the tracer displacement.
 * A rod (q, v, r) covering the origin is first moved to start at it.
 */
inline RodConfiguration full_evolve(const RodConfiguration& y, double t) {
  detail::require_nonnegative_lengths(y);
  for (const auto& rod : y) {
    if (rod.y < 0.0 && 0.0 < rod.y + rod.r) {
      return shift(full_evolve(shift(y, -rod.y), t), rod.y);
    }
  }
  const GasConfiguration gas = contract(y, 0.0);
  return shift(dilate(ideal_gas_evolve(gas, t), 0.0), tracer_displacement(gas, t));
}

/// U_t rod by rod: q + v t + j_{C_q Y}(q, v; t).
inline RodConfiguration evolve_rods_direct(const RodConfiguration& y, double t) {
  detail::require_nonnegative_lengths(y);
  RodConfiguration out;
  out.reserve(y.size());
  for (const auto& rod : y) {
    const GasConfiguration gas = contract(y, rod.y);
    out.push_back({rod.y + rod.v * t + flux(gas, rod.y, rod.v, t), rod.v, rod.r});
  }
  return out;
}

/**
 * b(z, Y): the smallest b whose signed empty space from 0 equals z.
 */
inline double empty_space_position(const RodConfiguration& y, double z) {
  detail::require_nonnegative_lengths(y);
  detail::require(no_rod_contains(y, 0.0), "configuration has a rod covering the origin");
  detail::require(std::isfinite(z), "shift must be finite");
  std::vector<Rod> rods = y;
  std::sort(rods.begin(), rods.end(), [](const Rod& a, const Rod& b) { return a.y < b.y; });
  if (z >= 0.0) {
    double cur = 0.0;
    double remaining = z;
    for (const auto& rod : rods) {
      if (rod.r == 0.0 || rod.y + rod.r <= 0.0) continue;
      const double gap = rod.y - cur;
      if (remaining <= gap) return cur + remaining;
      remaining -= std::max(gap, 0.0);
      cur = std::max(cur, rod.y + rod.r);
    }
    return cur + remaining;
  }
  double cur = 0.0;
  double remaining = -z;
  for (auto it = rods.rbegin(); it != rods.rend(); ++it) {
    if (it->r == 0.0 || it->y >= 0.0) continue;
    const double gap = cur - (it->y + it->r);
    if (remaining < gap) return cur - remaining;
    remaining -= std::max(gap, 0.0);
    cur = std::min(cur, it->y);
  }
  return cur - remaining;
}

/// Hat-S_z Y = Y translated by -b(z, Y).
inline RodConfiguration empty_space_shift(const RodConfiguration& y, double z) {
  if (z == 0.0) return y;
  return shift(y, -empty_space_position(y, z));
}

/// The same map as D_0 S_z C_0.
inline RodConfiguration empty_space_shift_via_gas(const RodConfiguration& y, double z) {
  if (z == 0.0) return y;
  return dilate(shift(contract(y, 0.0), -z), 0.0);
}

/**
 * Indices of particles whose trajectory up to |t| only depends on lines
 * with intercepts inside [lo, hi] when |v| <= v_bound.
 */
inline std::vector<std::size_t> safe_core(const GasConfiguration& x, double lo, double hi, double v_bound, double t) {
  std::vector<std::size_t> out;
  const double reach = v_bound * std::abs(t);
  if (!(lo <= 0.0 && 0.0 <= hi)) return out;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i].x - reach > lo && x[i].x + reach < hi) out.push_back(i);
  }
  return out;
}

struct EvolutionComparison {
  double max_abs_diff = 0.0;
  std::size_t compared = 0;
  std::size_t collisions = 0;
};

/**
 * evolve_surface(X, t) against evolve_events(D_0 X, t), restricted to the
 * safe core of the window [lo, hi].
 */
inline EvolutionComparison compare_evolutions(const GasConfiguration& x, double t, double lo, double hi,
                                              double v_bound, const EventOptions& opts = {}) {
  const auto surface = evolve_surface(x, t);
  const auto events = evolve_events_counted(dilate(x, 0.0), t, opts);
  EvolutionComparison out;
  out.collisions = events.collisions;
  for (std::size_t i : safe_core(x, lo, hi, v_bound, t)) {
    out.max_abs_diff = std::max(out.max_abs_diff, std::abs(surface[i].y - events.rods[i].y));
    ++out.compared;
  }
  return out;
}

/// Gaps between consecutive rods (sorted), inside [lo, hi].
inline std::vector<double> rod_gaps(const RodConfiguration& y, double lo, double hi) {
  std::vector<Rod> rods;
  for (const auto& rod : y) {
    if (rod.y >= lo && rod.y + rod.r <= hi) rods.push_back(rod);
  }
  std::sort(rods.begin(), rods.end(), [](const Rod& a, const Rod& b) { return a.y < b.y; });
  std::vector<double> out;
  for (std::size_t k = 1; k < rods.size(); ++k) out.push_back(rods[k].y - (rods[k - 1].y + rods[k - 1].r));
  return out;
}

}  // namespace hrfl
