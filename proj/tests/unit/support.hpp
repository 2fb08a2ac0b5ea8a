// Copyright 2026 The hrfl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "hrfl/hardrod.hpp"
#include "hrfl/intensity.hpp"
#include "hrfl/rng.hpp"
#include "hrfl/sampler.hpp"

namespace hrfl::testing {

inline Philox4x32 test_rng(std::uint64_t stream) { return make_stream(0x5eed, stream, StreamTag::kTest); }

inline double uniform(Philox4x32& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

/// n particles with x in [lo, hi], v in [-1, 1], r in [r_lo, r_hi].
inline GasConfiguration random_gas(Philox4x32& rng, std::size_t n, double lo, double hi, double r_lo = 0.0,
                                   double r_hi = 0.5) {
  GasConfiguration g(n);
  for (auto& p : g) {
    p.x = uniform(rng, lo, hi);
    p.v = uniform(rng, -1.0, 1.0);
    p.r = uniform(rng, r_lo, r_hi);
  }
  return g;
}

inline SpaceTimePoint random_point(Philox4x32& rng, double scale = 2.0) {
  return {uniform(rng, -scale, scale), uniform(rng, -scale, scale)};
}

/// Reference model mu_2 distance in closed form: (1/2) int_{-1}^{1} |dx - v dt| dv.
inline double reference_distance(SpaceTimePoint a, SpaceTimePoint b) {
  const double dx = std::abs(b.x - a.x);
  const double dt = std::abs(b.t - a.t);
  if (dx >= dt) return dx;
  return (dx * dx + dt * dt) / (2.0 * dt);
}

/// Composite Simpson rule on [a, b] with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  if (!(b > a)) return 0.0;
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 == 1 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

/**
 * Brute-force moment of a product model with a continuous velocity density:
 * midpoint rule in v, Simpson in x over the crossing interval.
 */
inline double grid_moment(const std::function<double(double)>& rho, const std::function<double(double)>& vdens,
                          double v_lo, double v_hi, double mark_moment, const Segment& seg, Orientation o,
                          int nv = 4000, int nx = 400) {
  double total = 0.0;
  const double hv = (v_hi - v_lo) / nv;
  for (int i = 0; i < nv; ++i) {
    const double v = v_lo + (i + 0.5) * hv;
    const double pa = seg.a.x - v * seg.a.t;
    const double pb = seg.b.x - v * seg.b.t;
    double inner = 0.0;
    if ((o == Orientation::kPlus || o == Orientation::kBoth) && pb > pa) inner += simpson(rho, pa, pb, nx);
    if ((o == Orientation::kMinus || o == Orientation::kBoth) && pa > pb) inner += simpson(rho, pb, pa, nx);
    total += vdens(v) * inner * hv;
  }
  return total * mark_moment;
}

/// Test-only Mandelbrot field M_N(b) = eps * N_1(ob): unsigned, relative to the origin.
inline double mandelbrot_field(const SampledConfiguration& cfg, const SpaceTimePoint& b) {
  double total = 0.0;
  for (const auto& p : cfg.points) {
    if (detail::crossing_sign(p.x, p.v, kOrigin, b) != 0) total += p.r;
  }
  return cfg.epsilon * total;
}

}  // namespace hrfl::testing
