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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "hrfl/field.hpp"
#include "hrfl/stats.hpp"
#include "support.hpp"

namespace hrfl {
namespace {

using testing::mandelbrot_field;
using testing::random_point;
using testing::test_rng;
using testing::uniform;

const ObservationRegion kBig{{-10.0, 10.0}, {-10.0, 10.0}};

SampledConfiguration random_config(Philox4x32& rng, std::size_t n, double epsilon = 1.0) {
  std::vector<PhasePoint> pts(n);
  for (auto& p : pts) p = {uniform(rng, -3, 3), uniform(rng, -1, 1), uniform(rng, 0.1, 1.0)};
  return make_configuration(std::move(pts), epsilon, kBig, 1.0);
}

TEST(WalkField, Examples) {
  auto rng = test_rng(30);
  const auto cfg = random_config(rng, 50);
  EXPECT_EQ(walk_field(cfg, kOrigin), 0.0);
  const auto one = make_configuration({{0.5, 0.0, 1.0}}, 1.0, kBig, 1.0);
  EXPECT_EQ(walk_field(one, {1, 0}), 1.0);
  EXPECT_EQ(walk_field(one, {1, 0}) - walk_field(one, {0.7, 0}), 0.0);
  EXPECT_EQ(walk_field_difference(one, {0.7, 0}, {1, 0}), 0.0);
  EXPECT_THROW((void)walk_field(one, {11, 0}), DomainError);
}

TEST(LimitField, Examples) {
  const IntensityModel ref = reference_model();
  EXPECT_EQ(limit_field(ref, kOrigin), 0.0);
  EXPECT_NEAR(limit_field(ref, {0, 1.3}), 0.0, 1e-14);
  EXPECT_NEAR(limit_field(ref, {0.8, 0}), 0.8, 1e-14);
  const IntensityModel sym(ConstantDensity{2.0}, ProductKernel{GaussianVelocity{0, 1}, ConstantMark{0.5}}, {-4, 4});
  EXPECT_NEAR(limit_field(sym, {0, 2.0}), 0.0, 1e-12);
}

TEST(WalkField, CrossingDecomposition) {
  auto rng = test_rng(31);
  const FieldOptions exact{SideConvention::kClosedRight, Summation::kExact};
  for (int rep = 0; rep < 20; ++rep) {
    const auto cfg = random_config(rng, 200, 0.01);
    for (int i = 0; i < 50; ++i) {
      const SpaceTimePoint a = random_point(rng);
      const SpaceTimePoint b = random_point(rng);
      const double lhs = walk_field(cfg, b, exact) - walk_field(cfg, a, exact);
      const double rhs = walk_field_difference(cfg, a, b, exact);
      EXPECT_LE(std::abs(lhs - rhs), 1e-12 * std::max(1.0, std::abs(rhs)));
    }
  }
}

TEST(WalkField, DifferencesAreTranslationCovariant) {
  auto rng = test_rng(32);
  for (int rep = 0; rep < 50; ++rep) {
    auto cfg = random_config(rng, 100);
    const SpaceTimePoint a = random_point(rng);
    const SpaceTimePoint b = random_point(rng);
    const double c = std::ldexp(std::round(uniform(rng, -64, 64)), -5);  // exact shift
    const double before = walk_field_difference(cfg, a, b);
    for (auto& p : cfg.points) p.x += c;
    EXPECT_EQ(walk_field_difference(cfg, {a.x + c, a.t}, {b.x + c, b.t}), before);
  }
}

TEST(MandelbrotField, IsNotTranslationCovariant) {
  const auto cfg = make_configuration({{0.5, 0.0, 1.0}}, 1.0, kBig, 1.0);
  const SpaceTimePoint a{0.2, 0};
  const SpaceTimePoint b{0.8, 0};
  EXPECT_EQ(mandelbrot_field(cfg, b) - mandelbrot_field(cfg, a), 1.0);
  EXPECT_EQ(walk_field(cfg, b) - walk_field(cfg, a), 1.0);
  const auto shifted = make_configuration({{-0.5, 0.0, 1.0}}, 1.0, kBig, 1.0);
  const SpaceTimePoint as{-0.8, 0};
  const SpaceTimePoint bs{-0.2, 0};
  EXPECT_EQ(mandelbrot_field(shifted, bs) - mandelbrot_field(shifted, as), -1.0);
  EXPECT_EQ(walk_field(shifted, bs) - walk_field(shifted, as), 1.0);
}

// Along a sampled line, t -> H_N(x + v t, t) jumps by +r at lines with w < v
// and by -r at lines with w > v, at their crossing times only.
TEST(WalkField, GeneratorAlongALine) {
  auto rng = test_rng(33);
  for (int rep = 0; rep < 50; ++rep) {
    const auto cfg = random_config(rng, 8);
    const PhasePoint& l = cfg.points[0];
    struct Jump {
      double t;
      double size;
    };
    std::vector<Jump> jumps;
    for (std::size_t j = 1; j < cfg.points.size(); ++j) {
      const PhasePoint& q = cfg.points[j];
      const double t = (q.x - l.x) / (l.v - q.v);
      if (t > 0.0 && t < 3.0) jumps.push_back({t, q.v < l.v ? q.r : -q.r});
    }
    std::sort(jumps.begin(), jumps.end(), [](const Jump& a, const Jump& b) { return a.t < b.t; });
    std::vector<double> times{0.0};
    for (std::size_t k = 0; k + 1 < jumps.size(); ++k) times.push_back(0.5 * (jumps[k].t + jumps[k + 1].t));
    times.push_back(3.0);
    auto at = [&](double t) { return SpaceTimePoint{l.x + l.v * t, t}; };
    for (std::size_t k = 0; k < jumps.size(); ++k) {
      const double dh = walk_field_difference(cfg, at(times[k]), at(times[k + 1]));
      EXPECT_NEAR(dh, jumps[k].size, 1e-12);
    }
    if (jumps.empty()) {
      EXPECT_EQ(walk_field_difference(cfg, at(0.0), at(3.0)), 0.0);
    }
  }
}

TEST(SliceEvaluator, MatchesNaiveScanBitForBit) {
  auto rng = test_rng(34);
  for (SideConvention conv : {SideConvention::kClosedRight, SideConvention::kLeftLimit}) {
    const FieldOptions naive{conv, Summation::kExact};
    for (int rep = 0; rep < 10; ++rep) {
      auto cfg = random_config(rng, 300, 0.01);
      const double t = uniform(rng, -2, 2);
      std::vector<double> xs;
      for (int i = 0; i < 100; ++i) xs.push_back(uniform(rng, -5, 5));
      // points exactly on sampled lines exercise the side convention
      for (int i = 0; i < 10; ++i) xs.push_back(cfg.points[i].x + t * cfg.points[i].v);
      const SliceEvaluator slice(cfg, t, conv);
      const auto got = slice.evaluate(xs);
      for (std::size_t i = 0; i < xs.size(); ++i) {
        EXPECT_EQ(got[i], walk_field(cfg, {xs[i], t}, naive));
      }
    }
  }
}

TEST(EulerFluctuation, MeanAndVariance) {
  const IntensityModel m = reference_model();
  const SpaceTimePoint b{0.5, 1.0};
  const double limit = limit_field(m, b);
  const double target = distance(m, kOrigin, b);
  EXPECT_NEAR(target, 0.625, 1e-12);
  const auto region = ObservationRegion::bounding({kOrigin, b});
  const auto reps = replicate({"eta"}, 10000, 1, [&](std::size_t i) {
    return std::vector<double>{euler_fluctuation(sample(m, 1e-2, region, 51, i), limit, b)};
  });
  EXPECT_LT(std::abs(reps.mean(0)), 3.0 * reps.se_mean(0));
  EXPECT_LT(std::abs(reps.variance(0) - target), 3.0 * reps.se_covariance(0, 0));

  const auto exact = make_configuration({}, 1e-2, region, 1.0);
  EXPECT_EQ(euler_fluctuation(exact, 0.0, b), 0.0);
}

TEST(DiffusiveFluctuations, VanishAtTheFramePoint) {
  const IntensityModel m = reference_model();
  const SpaceTimePoint frame{0.5, 0.5};
  const auto cfg = sample(m, 1e-2, ObservationRegion::bounding({kOrigin, {1, 1}}), 3);
  const DiffusivePair p = diffusive_fluctuations(cfg, m, frame, {0, 0});
  EXPECT_EQ(p.eta_hat, 0.0);
  EXPECT_EQ(p.eta_tilde, 0.0);
}

TEST(DiffusiveFluctuations, HatVarianceIsFrozenDistance) {
  const IntensityModel m = reference_model();
  const double eps = 0.1;
  const SpaceTimePoint frame{0.5, 0.5};
  const SpaceTimePoint offset{1.0, 0.0};
  const auto region = ObservationRegion::bounding({frame, frame + offset});
  const DiffusiveTargets targets = diffusive_targets(m, eps, frame, offset);
  const auto reps = replicate({"hat", "tilde"}, 4000, 1, [&](std::size_t i) {
    const DiffusivePair p = diffusive_fluctuations(sample(m, eps * eps, region, 52, i), targets, frame, offset);
    return std::vector<double>{p.eta_hat, p.eta_tilde};
  });
  const double frozen = distance(timeshifted_model(m, frame.x, frame.t, FrameMode::kFrozen), kOrigin, offset);
  EXPECT_NEAR(frozen, 1.0, 1e-12);
  EXPECT_LT(std::abs(reps.variance(0) - frozen), 4.0 * reps.se_covariance(0, 0));
  EXPECT_LT(std::abs(reps.mean(0)), 4.0 * reps.se_mean(0));
}

}  // namespace
}  // namespace hrfl
