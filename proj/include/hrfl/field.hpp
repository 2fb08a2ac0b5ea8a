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
#include <numeric>
#include <utility>
#include <vector>

#include "hrfl/core.hpp"
#include "hrfl/geometry.hpp"
#include "hrfl/intensity.hpp"
#include "hrfl/sampler.hpp"
#include "hrfl/summation.hpp"

namespace hrfl {

enum class SideConvention {
  kClosedRight,  ///< a point on a line is on its right
  kLeftLimit,    ///< a point on a line is on its left: the surface seen from the left in space
};

struct FieldOptions {
  SideConvention convention = SideConvention::kClosedRight;
  Summation summation = Summation::kPlain;
  bool check_region = true;
};

namespace detail {

inline void check_in_region(const SampledConfiguration& cfg, const SpaceTimePoint& p) {
  if (!cfg.region.contains(p)) {
    throw DomainError("evaluation point outside the observation region of the configuration");
  }
}

/// Under the left-limit rule a point on a line counts as left of it, at both endpoints.
inline int crossing_sign_with(SideConvention c, double lx, double lv, const SpaceTimePoint& a,
                              const SpaceTimePoint& b) {
  if (c == SideConvention::kClosedRight) return crossing_sign(lx, lv, a, b);
  const bool a_right = a.x > lx + a.t * lv;
  const bool b_right = b.x > lx + b.t * lv;
  return static_cast<int>(b_right) - static_cast<int>(a_right);
}

}  // namespace detail

/// epsilon * (N_1(ab+) - N_1(ab-)): the surface increment from a to b.
inline double walk_field_difference(const SampledConfiguration& cfg, const SpaceTimePoint& a,
                                    const SpaceTimePoint& b, const FieldOptions& opts = {}) {
  if (opts.check_region) {
    detail::check_in_region(cfg, a);
    detail::check_in_region(cfg, b);
  }
  if (a == b) return 0.0;
  Accumulator acc(opts.summation);
  for (const auto& p : cfg.points) {
    const int s = detail::crossing_sign_with(opts.convention, p.x, p.v, a, b);
    if (s != 0) acc.add(s > 0 ? p.r : -p.r);
  }
  return cfg.epsilon * acc.value();
}

/// H_N(b), null at the origin.
inline double walk_field(const SampledConfiguration& cfg, const SpaceTimePoint& b, const FieldOptions& opts = {}) {
  if (opts.check_region) detail::check_in_region(cfg, b);
  FieldOptions inner = opts;
  inner.check_region = false;
  return walk_field_difference(cfg, kOrigin, b, inner);
}

/// H_mu(b) = mu_1(ob+) - mu_1(ob-).
inline double limit_field(const IntensityModel& m, const SpaceTimePoint& b, const QuadratureTolerance& tol = {}) {
  return signed_moment(m, 1, {kOrigin, b}, tol);
}

/// H_mu(b) - H_mu(a).
inline double limit_field_difference(const IntensityModel& m, const SpaceTimePoint& a, const SpaceTimePoint& b,
                                     const QuadratureTolerance& tol = {}) {
  return signed_moment(m, 1, {a, b}, tol);
}

/// (H_{N^eps}(b) - H_mu(b)) / sqrt(eps).
inline double euler_fluctuation(const SampledConfiguration& cfg, const IntensityModel& m, const SpaceTimePoint& b,
                                const QuadratureTolerance& tol = {}) {
  return (walk_field(cfg, b) - limit_field(m, b, tol)) / std::sqrt(cfg.epsilon);
}

/// Same with the limit value supplied (batch use).
inline double euler_fluctuation(const SampledConfiguration& cfg, double limit_value, const SpaceTimePoint& b) {
  return (walk_field(cfg, b) - limit_value) / std::sqrt(cfg.epsilon);
}

struct DiffusivePair {
  double eta_hat = 0.0;
  double eta_tilde = 0.0;
};

/// Deterministic parts of the two diffusive fields at one offset.
struct DiffusiveTargets {
  double hat_limit = 0.0;    ///< H_{z,s}(eps x, eps t)
  double tilde_limit = 0.0;  ///< H_{z,s}(x, t)
};

inline DiffusiveTargets diffusive_targets(const IntensityModel& m, double eps, SpaceTimePoint frame,
                                          SpaceTimePoint offset, const QuadratureTolerance& tol = {}) {
  return {limit_field_difference(m, frame, frame + eps * offset, tol),
          limit_field_difference(m, frame, frame + offset, tol)};
}

/**
 * The fields seen from the frame point, for a configuration sampled at
 * scale eps^2 (so cfg.epsilon = eps^2):
 *   eta_hat   = eps^{-3/2} (H^{eps^2}_{z,s}(eps x, eps t) - H_{z,s}(eps x, eps t))
 *   eta_tilde = eps^{-1}   (H^{eps^2}_{z,s}(x, t) - H_{z,s}(x, t))
 */
inline DiffusivePair diffusive_fluctuations(const SampledConfiguration& cfg, const DiffusiveTargets& targets,
                                            SpaceTimePoint frame, SpaceTimePoint offset) {
  const double eps = std::sqrt(cfg.epsilon);
  const double near = walk_field_difference(cfg, frame, frame + eps * offset);
  const double far = walk_field_difference(cfg, frame, frame + offset);
  return {std::pow(eps, -1.5) * (near - targets.hat_limit), (far - targets.tilde_limit) / eps};
}

inline DiffusivePair diffusive_fluctuations(const SampledConfiguration& cfg, const IntensityModel& m,
                                            SpaceTimePoint frame, SpaceTimePoint offset,
                                            const QuadratureTolerance& tol = {}) {
  return diffusive_fluctuations(cfg, diffusive_targets(m, std::sqrt(cfg.epsilon), frame, offset, tol), frame,
                                offset);
}

/**
 * Batched H_N along the slice {t = t_ref}: lines sorted by their position
 * at t_ref, then one sweep. Uses exact summation, so results equal the
 * naive scan in Summation::kExact bit for bit.
 */
class SliceEvaluator {
 public:
  SliceEvaluator(const SampledConfiguration& cfg, double t_ref,
                 SideConvention convention = SideConvention::kClosedRight)
      : cfg_(&cfg), t_(t_ref), convention_(convention) {
    order_.resize(cfg.points.size());
    pos_.resize(cfg.points.size());
    for (std::size_t i = 0; i < cfg.points.size(); ++i) pos_[i] = cfg.points[i].x + t_ref * cfg.points[i].v;
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::sort(order_.begin(), order_.end(), [this](std::size_t a, std::size_t b) { return pos_[a] < pos_[b]; });
  }

  [[nodiscard]] double t() const { return t_; }

  /// H_N(x, t_ref) for every x; any order of xs.
  [[nodiscard]] std::vector<double> evaluate(const std::vector<double>& xs) const {
    for (double x : xs) detail::check_in_region(*cfg_, {x, t_});
    std::vector<std::size_t> q(xs.size());
    std::iota(q.begin(), q.end(), std::size_t{0});
    std::sort(q.begin(), q.end(), [&xs](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });

    ExactSum acc;
    for (const auto& p : cfg_->points) {
      const bool origin_right = convention_ == SideConvention::kClosedRight ? 0.0 >= p.x : 0.0 > p.x;
      if (origin_right) acc.add(-p.r);
    }
    std::vector<double> out(xs.size(), 0.0);
    std::size_t j = 0;
    for (std::size_t qi : q) {
      const double x = xs[qi];
      if (convention_ == SideConvention::kClosedRight) {
        while (j < order_.size() && pos_[order_[j]] <= x) acc.add(cfg_->points[order_[j++]].r);
      } else {
        while (j < order_.size() && pos_[order_[j]] < x) acc.add(cfg_->points[order_[j++]].r);
      }
      out[qi] = cfg_->epsilon * acc.value();
    }
    return out;
  }

 private:
  const SampledConfiguration* cfg_;
  double t_;
  SideConvention convention_;
  std::vector<std::size_t> order_;
  std::vector<double> pos_;
};

}  // namespace hrfl
