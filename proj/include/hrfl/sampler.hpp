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
#include <random>
#include <string>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "hrfl/core.hpp"
#include "hrfl/geometry.hpp"
#include "hrfl/intensity.hpp"
#include "hrfl/rng.hpp"

namespace hrfl {

/// Space-time box in which fields will be evaluated.
struct ObservationRegion {
  Interval x;
  Interval t;

  [[nodiscard]] bool contains(const SpaceTimePoint& p) const { return x.contains(p.x) && t.contains(p.t); }

  /// Smallest region containing all the given points.
  static ObservationRegion bounding(const std::vector<SpaceTimePoint>& pts) {
    detail::require(!pts.empty(), "need at least one point");
    ObservationRegion r{{pts[0].x, pts[0].x}, {pts[0].t, pts[0].t}};
    for (const auto& p : pts) {
      r.x.lo = std::min(r.x.lo, p.x);
      r.x.hi = std::max(r.x.hi, p.x);
      r.t.lo = std::min(r.t.lo, p.t);
      r.t.hi = std::max(r.t.hi, p.t);
    }
    return r;
  }
};

/// The (x, v, r) box actually sampled.
struct SamplingWindow {
  Interval x;
  Interval v;
};

/**
 * Every line with |v| <= V crossing the region has its intercept in the
 * returned x-range, padded by a relative 1e-9.
 */
inline SamplingWindow sampling_window(const IntensityModel& m, const ObservationRegion& region) {
  detail::require(detail::all_finite(region.x.lo, region.x.hi, region.t.lo, region.t.hi) &&
                      region.x.lo <= region.x.hi && region.t.lo <= region.t.hi,
                  "observation region must be finite and ordered");
  const double reach = m.v_bound() * std::max(std::abs(region.t.lo), std::abs(region.t.hi));
  double lo = region.x.lo - reach;
  double hi = region.x.hi + reach;
  const double pad = 1e-9 * std::max({1.0, hi - lo, std::abs(lo), std::abs(hi)});
  return {{lo - pad, hi + pad}, m.v_support()};
}

struct SampledConfiguration {
  std::vector<PhasePoint> points;
  double epsilon = 1.0;
  ObservationRegion region{};
  SamplingWindow window{};
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  double expected_count = 0.0;
};

struct SamplerOptions {
  double max_expected_points = 1e8;
};

namespace detail {

/// Mass of the (v-truncated) model over x in [lo, hi], cell by cell.
inline std::vector<double> cell_masses(const IntensityModel& m, double lo, double hi) {
  std::vector<double> out(m.cell_count(), 0.0);
  for (std::size_t c = 0; c < m.cell_count(); ++c) {
    const Interval cb = m.cell_bounds(c);
    const double a = std::max(lo, cb.lo);
    const double b = std::min(hi, cb.hi);
    if (b > a) out[c] = m.density_integral(a, b) * m.cell(c).kept_mass();
  }
  return out;
}

/// Position in [lo, hi] with density proportional to rho.
inline double draw_position(const IntensityModel& m, double lo, double hi, Philox4x32& rng) {
  const SpaceDensity& rho = m.rho();
  if (std::holds_alternative<ConstantDensity>(rho)) return lo + (hi - lo) * rng.uniform();
  if (const auto* p = std::get_if<PiecewiseDensity>(&rho)) {
    const double total = m.density_integral(lo, hi);
    double target = total * rng.uniform();
    for (std::size_t i = 0; i + 1 < p->breaks.size(); ++i) {
      const double a = std::max(lo, p->breaks[i]);
      const double b = std::min(hi, p->breaks[i + 1]);
      if (!(b > a) || p->values[i] == 0.0) continue;
      const double w = p->values[i] * (b - a);
      if (target < w) return a + target / p->values[i];
      target -= w;
    }
    // rounding left a sliver: last nonempty piece
    for (std::size_t i = p->breaks.size() - 1; i-- > 0;) {
      const double a = std::max(lo, p->breaks[i]);
      const double b = std::min(hi, p->breaks[i + 1]);
      if (b > a && p->values[i] > 0.0) return a + (b - a) * rng.uniform();
    }
    throw DomainError("no mass to sample from");
  }
  const auto& s = std::get<SmoothDensity>(rho);
  const double a = std::max(lo, s.support.lo);
  const double b = std::min(hi, s.support.hi);
  for (int tries = 0; tries < 100000000; ++tries) {
    const double x = a + (b - a) * rng.uniform();
    const double f = s.f(x);
    if (f > s.bound * (1.0 + 1e-12)) throw DomainError("smooth density exceeds its declared bound");
    if (rng.uniform() * s.bound < f) return x;
  }
  throw NumericalError("rejection sampling did not accept a point");
}

inline double draw_mark(const MarkRange& mark, Philox4x32& rng) {
  if (mark.lo == mark.hi) return mark.lo;
  return mark.lo + (mark.hi - mark.lo) * rng.uniform();
}

/// (v, r) from the truncated kernel, conditioned on v inside the support.
inline void draw_kernel(const KernelView& view, Philox4x32& rng, double& v, double& r) {
  double target = view.kept_mass() * rng.uniform();
  for (const auto& a : view.atoms()) {
    if (target < a.weight) {
      v = a.v;
      r = draw_mark(a.mark, rng);
      return;
    }
    target -= a.weight;
  }
  if (view.continuous()) {
    const Interval d = view.domain();
    if (view.law() == KernelView::Law::kUniform) {
      v = d.lo + (d.hi - d.lo) * rng.uniform();
    } else {
      const boost::math::normal_distribution<double> nd(view.law_param0(), view.law_param1());
      const double clo = boost::math::cdf(nd, d.lo);
      const double chi = boost::math::cdf(nd, d.hi);
      const double u = clo + (chi - clo) * rng.uniform_open();
      v = std::clamp(boost::math::quantile(nd, std::clamp(u, 1e-300, 1.0 - 1e-16)), d.lo, d.hi);
    }
    r = draw_mark(view.mark(), rng);
    return;
  }
  // rounding fell past the last atom
  const auto& last = view.atoms().back();
  v = last.v;
  r = draw_mark(last.mark, rng);
}

}  // namespace detail

/**
 * Poisson process with intensity mu / epsilon on the window of `region`.
 * The stream is fully determined by (seed, stream).
 */
inline SampledConfiguration sample(const IntensityModel& m, double epsilon, const ObservationRegion& region,
                                   std::uint64_t seed, std::uint64_t stream = 0, const SamplerOptions& opts = {}) {
  detail::require(std::isfinite(epsilon) && epsilon > 0, "epsilon must be positive");
  detail::require(m.frame().mode == FrameMode::kNone, "sampling a framed model is not supported");
  SampledConfiguration out;
  out.epsilon = epsilon;
  out.region = region;
  out.window = sampling_window(m, region);
  out.seed = seed;
  out.stream = stream;

  const std::vector<double> masses = detail::cell_masses(m, out.window.x.lo, out.window.x.hi);
  double total = 0.0;
  for (double w : masses) total += w;
  out.expected_count = total / epsilon;
  if (!(out.expected_count <= opts.max_expected_points)) {
    throw DomainError("expected point count " + std::to_string(out.expected_count) +
                      " exceeds the cap; use a larger epsilon or a smaller region");
  }
  if (total <= 0.0) return out;

  Philox4x32 rng(seed, stream);
  std::poisson_distribution<long long> count(out.expected_count);
  const long long n = count(rng);
  out.points.reserve(static_cast<std::size_t>(n));
  for (long long i = 0; i < n; ++i) {
    std::size_t c = 0;
    if (masses.size() > 1) {
      double target = total * rng.uniform();
      for (c = 0; c + 1 < masses.size(); ++c) {
        if (target < masses[c]) break;
        target -= masses[c];
      }
      while (masses[c] == 0.0 && c > 0) --c;
    }
    const Interval cb = m.cell_bounds(c);
    PhasePoint p;
    p.x = detail::draw_position(m, std::max(out.window.x.lo, cb.lo), std::min(out.window.x.hi, cb.hi), rng);
    detail::draw_kernel(m.cell(c), rng, p.v, p.r);
    out.points.push_back(p);
  }
  return out;
}

/// Configuration built by hand (tests, dumps). The window is the region's window under `m`.
inline SampledConfiguration make_configuration(std::vector<PhasePoint> pts, double epsilon,
                                               const ObservationRegion& region, double v_bound) {
  SampledConfiguration out;
  out.points = std::move(pts);
  out.epsilon = epsilon;
  out.region = region;
  const double reach = v_bound * std::max(std::abs(region.t.lo), std::abs(region.t.hi));
  out.window = {{region.x.lo - reach, region.x.hi + reach}, {-v_bound, v_bound}};
  return out;
}

/// epsilon * sum of r^k over lines crossing `seg` with the given orientation.
inline double empirical_moment(const SampledConfiguration& cfg, int k, const Segment& seg, Orientation o) {
  detail::require(k >= 0 && k <= 2, "moment order must be 0, 1 or 2");
  if (seg.degenerate()) return 0.0;
  double total = 0.0;
  for (const auto& p : cfg.points) {
    const int s = detail::crossing_sign(p.x, p.v, seg.a, seg.b);
    if (s == 0) continue;
    if ((o == Orientation::kPlus && s < 0) || (o == Orientation::kMinus && s > 0)) continue;
    total += std::pow(p.r, k);
  }
  return cfg.epsilon * total;
}

/// Points in [lo, hi) at time 0 (used for count statistics).
inline std::size_t count_in(const SampledConfiguration& cfg, double lo, double hi) {
  return static_cast<std::size_t>(std::count_if(cfg.points.begin(), cfg.points.end(),
                                                [&](const PhasePoint& p) { return p.x >= lo && p.x < hi; }));
}

}  // namespace hrfl
