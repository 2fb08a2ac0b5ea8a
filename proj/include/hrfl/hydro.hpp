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
#include <string>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "hrfl/core.hpp"
#include "hrfl/field.hpp"
#include "hrfl/intensity.hpp"

namespace hrfl {

namespace detail {

inline void require_hydro_model(const IntensityModel& m) {
  require(m.frame().mode == FrameMode::kNone, "hydrodynamic quantities need an unframed model");
  require(!m.has_negative_marks(), "hard-rod hydrodynamics needs nonnegative marks");
}

inline double transported(const IntensityModel& m, int k, int vpow, double x, double t,
                          const QuadratureTolerance& tol) {
  return integrate_lines(m, k, vpow, {{}, {}, AffinePivot{x, t}}, tol);
}

}  // namespace detail

/// sigma(x, t): length density of the ideal gas at time t.
inline double sigma(const IntensityModel& m, double x, double t, const QuadratureTolerance& tol = {}) {
  detail::require_hydro_model(m);
  return detail::transported(m, 1, 0, x, t, tol);
}

/// Particle density of the ideal gas at time t.
inline double particle_density(const IntensityModel& m, double x, double t, const QuadratureTolerance& tol = {}) {
  return detail::transported(m, 0, 0, x, t, tol);
}

/// Length current: integral of v r rho_t(x, v, r).
inline double current(const IntensityModel& m, double x, double t, const QuadratureTolerance& tol = {}) {
  detail::require_hydro_model(m);
  return detail::transported(m, 1, 1, x, t, tol);
}

/// Z(x, t) = x + H_mu(x, t).
inline double characteristic_map(const IntensityModel& m, double x, double t, const QuadratureTolerance& tol = {}) {
  detail::require_hydro_model(m);
  return x + limit_field(m, {x, t}, tol);
}

/// Solves Z(x, t) = q; Z is increasing with slope 1 + sigma >= 1.
inline double inverse_characteristic(const IntensityModel& m, double q, double t,
                                     const QuadratureTolerance& tol = {}) {
  detail::require_hydro_model(m);
  const double h = limit_field(m, {q, t}, tol);
  if (h == 0.0) return q;
  double lo = q - std::abs(h);
  double hi = q + std::abs(h);
  auto f = [&](double x) { return characteristic_map(m, x, t, tol) - q; };
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  for (int widen = 0; flo > 0 || fhi < 0; ++widen) {
    if (widen > 60) throw NumericalError("characteristic inverse could not be bracketed");
    const double w = hi - lo;
    if (flo > 0) {
      lo -= w;
      flo = f(lo);
    }
    if (fhi < 0) {
      hi += w;
      fhi = f(hi);
    }
  }
  std::uintmax_t iters = 200;
  const auto term = [](double a, double b) { return std::abs(b - a) <= 1e-13 * std::max(1.0, std::abs(a)); };
  const auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, term, iters);
  const double x = 0.5 * (r.first + r.second);
  if (std::abs(f(x)) > 1e-10 * std::max(1.0, std::abs(q))) {
    throw NumericalError("characteristic inverse did not converge");
  }
  return x;
}

/// Quantities at the rod coordinate q.
struct RodState {
  double x = 0.0;            ///< Z^{-1}(q, t)
  double sigma = 0.0;        ///< sigma(x, t)
  double sigma_tilde = 0.0;  ///< sigma / (1 + sigma)
  double pi_tilde = 0.0;     ///< current / (1 + sigma)
};

inline RodState rod_state(const IntensityModel& m, double q, double t, const QuadratureTolerance& tol = {}) {
  RodState s;
  s.x = inverse_characteristic(m, q, t, tol);
  s.sigma = sigma(m, s.x, t, tol);
  s.sigma_tilde = s.sigma / (1.0 + s.sigma);
  s.pi_tilde = current(m, s.x, t, tol) / (1.0 + s.sigma);
  return s;
}

/// rho_t(x, v, r) = rho(x - v t, v, r).
inline double phase_density(const IntensityModel& m, double x, double v, double r, double t) {
  return m.phase_density(x - v * t, v, r);
}

/// Mark-integrated phase density at time t: atoms contribute their weight, continuous laws their density.
inline double velocity_density(const IntensityModel& m, double x, double v, double t) {
  const double foot = x - v * t;
  const double rho = m.density(foot);
  if (rho == 0.0) return 0.0;
  const auto& view = m.cell(m.cell_index(foot));
  double k = view.density(v);
  for (const auto& a : view.atoms()) {
    if (a.v == v) k += a.weight;
  }
  return rho * k;
}

struct RodDensityForms {
  double via_sigma_tilde = 0.0;  ///< rho_t(x) (1 - sigma~)
  double via_sigma = 0.0;        ///< rho_t(x) / (1 + sigma)
};

inline RodDensityForms rod_density_forms(const IntensityModel& m, double q, double v, double r, double t,
                                         const QuadratureTolerance& tol = {}) {
  const RodState s = rod_state(m, q, t, tol);
  const double base = phase_density(m, s.x, v, r, t);
  return {base * (1.0 - s.sigma_tilde), base / (1.0 + s.sigma)};
}

/// Macroscopic hard-rod density at rod coordinate q.
inline double rod_density(const IntensityModel& m, double q, double v, double r, double t,
                          const QuadratureTolerance& tol = {}) {
  return rod_density_forms(m, q, v, r, t, tol).via_sigma;
}

/// V = v + (v sigma~ - pi~) / (1 - sigma~).
inline double effective_velocity(const RodState& s, double v) {
  return v + (v * s.sigma_tilde - s.pi_tilde) / (1.0 - s.sigma_tilde);
}

inline double effective_velocity(const IntensityModel& m, double q, double v, double t,
                                 const QuadratureTolerance& tol = {}) {
  return effective_velocity(rod_state(m, q, t, tol), v);
}

struct GhdGrid {
  Interval q{-1.0, 1.0};
  Interval t{0.1, 0.5};
  std::size_t nq = 21;
  std::size_t nt = 9;
  int stencil_order = 2;        ///< 2 or 4
  std::vector<double> velocities;  ///< empty: atoms of the model, or 5 points across the support
};

struct GhdNode {
  double q = 0.0;
  double t = 0.0;
  double v = 0.0;
  double residual = 0.0;
};

struct GhdResidual {
  double max_norm = 0.0;
  double l2_norm = 0.0;
  double h_q = 0.0;
  double h_t = 0.0;
  std::size_t evaluated = 0;
  std::size_t excluded = 0;
  std::vector<std::string> warnings;
  std::vector<GhdNode> nodes;
};

namespace detail {

inline std::vector<double> residual_velocities(const IntensityModel& m, const GhdGrid& g) {
  if (!g.velocities.empty()) return g.velocities;
  std::vector<double> out;
  for (std::size_t c = 0; c < m.cell_count(); ++c) {
    for (const auto& a : m.cell(c).atoms()) out.push_back(a.v);
    if (m.cell(c).continuous()) {
      const Interval d = m.cell(c).domain();
      for (int i = 1; i <= 5; ++i) out.push_back(d.lo + (d.hi - d.lo) * i / 6.0);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace detail

/**
 * Finite-difference residual of d_t rho~ + d_q (V rho~) = 0 on a (q, t)
 * grid, with rho~ and V evaluated from the model at every stencil point.
 * L2 = sqrt(h_q h_t sum R^2) over nodes and velocities.
 */
inline GhdResidual ghd_residual(const IntensityModel& m, const GhdGrid& g, const QuadratureTolerance& tol = {}) {
  detail::require_hydro_model(m);
  detail::require(g.nq >= 2 && g.nt >= 1 && !g.q.empty() && g.t.lo <= g.t.hi, "grid needs nq >= 2, nt >= 1");
  detail::require(g.stencil_order == 2 || g.stencil_order == 4, "stencil order must be 2 or 4");
  GhdResidual out;
  out.h_q = (g.q.hi - g.q.lo) / static_cast<double>(g.nq - 1);
  out.h_t = g.nt > 1 ? (g.t.hi - g.t.lo) / static_cast<double>(g.nt - 1) : out.h_q;
  const auto vs = detail::residual_velocities(m, g);
  const auto jumps = m.jump_breaks();
  const double reach = (g.stencil_order / 2) * (out.h_q + 2.0 * m.v_bound() * out.h_t) + out.h_q;

  // Rod states on the grid padded by the stencil half-width; shared by every velocity.
  const auto pad = static_cast<std::ptrdiff_t>(g.stencil_order / 2);
  const auto nq = static_cast<std::ptrdiff_t>(g.nq);
  const auto nt = static_cast<std::ptrdiff_t>(g.nt);
  const std::ptrdiff_t width = nq + 2 * pad;
  std::vector<RodState> states(static_cast<std::size_t>(width * (nt + 2 * pad)));
  auto qi = [&](std::ptrdiff_t i) { return g.q.lo + out.h_q * static_cast<double>(i); };
  auto tj = [&](std::ptrdiff_t j) { return g.t.lo + out.h_t * static_cast<double>(j); };
  auto state = [&](std::ptrdiff_t i, std::ptrdiff_t j) -> RodState& {
    return states[static_cast<std::size_t>((j + pad) * width + (i + pad))];
  };
  for (std::ptrdiff_t j = -pad; j < nt + pad; ++j) {
    for (std::ptrdiff_t i = -pad; i < nq + pad; ++i) {
      // only the cross-shaped stencils are needed
      const bool in_q = i >= 0 && i < nq;
      const bool in_t = j >= 0 && j < nt;
      if (in_q || in_t) state(i, j) = rod_state(m, qi(i), tj(j), tol);
    }
  }

  double sum_sq = 0.0;
  for (std::ptrdiff_t j = 0; j < nt; ++j) {
    const double t = tj(j);
    for (std::ptrdiff_t i = 0; i < nq; ++i) {
      const double q = qi(i);
      const RodState& center = state(i, j);
      for (double v : vs) {
        bool near_jump = false;
        for (double b : jumps) near_jump = near_jump || std::abs(center.x - v * t - b) < reach;
        if (near_jump) {
          ++out.excluded;
          continue;
        }
        auto density = [&](std::ptrdiff_t a, std::ptrdiff_t b) {
          const RodState& s = state(a, b);
          return velocity_density(m, s.x, v, tj(b)) / (1.0 + s.sigma);
        };
        auto flow = [&](std::ptrdiff_t a, std::ptrdiff_t b) {
          const RodState& s = state(a, b);
          return effective_velocity(s, v) * velocity_density(m, s.x, v, tj(b)) / (1.0 + s.sigma);
        };
        double dt = 0.0;
        double dq = 0.0;
        if (g.stencil_order == 4) {
          dt = (-density(i, j + 2) + 8 * density(i, j + 1) - 8 * density(i, j - 1) + density(i, j - 2)) /
               (12 * out.h_t);
          dq = (-flow(i + 2, j) + 8 * flow(i + 1, j) - 8 * flow(i - 1, j) + flow(i - 2, j)) / (12 * out.h_q);
        } else {
          dt = (density(i, j + 1) - density(i, j - 1)) / (2 * out.h_t);
          dq = (flow(i + 1, j) - flow(i - 1, j)) / (2 * out.h_q);
        }
        const double r = dt + dq;
        out.nodes.push_back({q, t, v, r});
        out.max_norm = std::max(out.max_norm, std::abs(r));
        sum_sq += r * r;
        ++out.evaluated;
      }
    }
  }
  out.l2_norm = std::sqrt(out.h_q * out.h_t * sum_sq);
  if (out.excluded > 0) {
    out.warnings.push_back(std::to_string(out.excluded) +
                           " node(s) excluded within a stencil margin of a density discontinuity");
  }
  return out;
}

}  // namespace hrfl
