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

#include <cmath>
#include <random>

#include "hrfl/stats.hpp"
#include "support.hpp"

namespace hrfl {
namespace {

IntensityModel empty_model() {
  return IntensityModel(ConstantDensity{0.0}, ProductKernel{UniformVelocity{}, ConstantMark{}}, {-1, 1});
}

TEST(ReplicateSet, SingleReplica) {
  const auto s = replicate({"a"}, 1, 1, [](std::size_t) { return std::vector<double>{2.5}; });
  EXPECT_EQ(s.mean(0), 2.5);
  EXPECT_TRUE(std::isnan(s.se_mean(0)));
  EXPECT_TRUE(std::isnan(s.variance(0)));
  const Statistic st = z_statistic("a", s.mean(0), s.se_mean(0), 0.0, 4.0);
  EXPECT_TRUE(st.pass);
  EXPECT_TRUE(std::isnan(st.z));
}

TEST(ReplicateSet, ConstantStatistic) {
  const auto s = replicate({"c"}, 50, 1, [](std::size_t) { return std::vector<double>{1.25}; });
  EXPECT_EQ(s.variance(0), 0.0);
  EXPECT_EQ(s.se_mean(0), 0.0);
  EXPECT_TRUE(z_statistic("c", s.mean(0), s.se_mean(0), 1.25, 4.0).pass);
  EXPECT_FALSE(z_statistic("c", s.mean(0), s.se_mean(0), 1.0, 4.0).pass);
}

TEST(ReplicateSet, UnbiasedNormalization) {
  const ReplicateSet s({"x", "y"}, {{1.0, 2.0}, {3.0, 6.0}});
  EXPECT_EQ(s.variance(0), 2.0);
  EXPECT_EQ(s.covariance(0, 1), 4.0);
  EXPECT_EQ(s.rms(0), std::sqrt(5.0));
}

TEST(ReplicateSet, KnownGaussianCovariance) {
  // y = x / 2 + z: var x = 1, cov = 1/2, var y = 5/4
  const auto s = replicate({"x", "y"}, 20000, 1, [](std::size_t i) {
    Philox4x32 g = make_stream(3, i, StreamTag::kTest);
    std::normal_distribution<double> n(0.0, 1.0);
    const double x = n(g);
    return std::vector<double>{x, 0.5 * x + n(g)};
  });
  EXPECT_LT(std::abs(s.covariance(0, 1) - 0.5), 4.0 * s.se_covariance(0, 1));
  EXPECT_LT(std::abs(s.variance(1) - 1.25), 4.0 * s.se_covariance(1, 1));
  EXPECT_LT(std::abs(s.mean(0)), 4.0 * s.se_mean(0));
}

TEST(ReplicateSet, PoissonCount) {
  const IntensityModel m = reference_model();
  const ObservationRegion box{{0, 1}, {0, 1}};
  const auto s = replicate({"n"}, 4000, 1, [&](std::size_t i) {
    return std::vector<double>{static_cast<double>(sample(m, 0.5, box, 8, i).points.size())};
  });
  EXPECT_LT(std::abs(s.mean(0) - 6.0), 3.0 * s.se_mean(0));
}

TEST(Replicate, IndependentOfThreadCount) {
  auto fn = [](std::size_t i) {
    Philox4x32 g = make_stream(5, i, StreamTag::kTest);
    return std::vector<double>{g.uniform(), g.uniform()};
  };
  const auto a = replicate({"u", "w"}, 997, 1, fn);
  const auto b = replicate({"u", "w"}, 997, 8, fn);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a.at(i, 0), b.at(i, 0));
    EXPECT_EQ(a.at(i, 1), b.at(i, 1));
  }
  EXPECT_EQ(a.mean(0), b.mean(0));
  EXPECT_EQ(a.covariance(0, 1), b.covariance(0, 1));
}

TEST(Replicate, RethrowsLowestIndexError) {
  auto fn = [](std::size_t i) -> std::vector<double> {
    if (i == 17 || i == 40) throw NumericalError("replica " + std::to_string(i));
    return {0.0};
  };
  for (unsigned threads : {1u, 4u}) {
    try {
      (void)replicate({"x"}, 100, threads, fn);
      FAIL();
    } catch (const NumericalError& e) {
      EXPECT_STREQ(e.what(), "replica 17");
    }
  }
}

TEST(ZStatistic, Basics) {
  const Statistic s = z_statistic("a", 1.2, 0.1, 1.0, 4.0);
  EXPECT_NEAR(s.z, 2.0, 1e-12);
  EXPECT_TRUE(s.pass);
  EXPECT_FALSE(z_statistic("a", 1.5, 0.1, 1.0, 4.0).pass);
  EXPECT_FALSE(z_statistic("a", kNaN, kNaN, 1.0, 4.0).pass);
}

TEST(Report, JsonShape) {
  ExperimentReport r;
  r.experiment = "x";
  r.model = "m";
  r.epsilon = {0.01};
  r.M = 3;
  r.add(z_statistic("a", 1.0, kNaN, 1.0, 4.0));
  const auto j = to_json(r);
  EXPECT_EQ(j["epsilon"], 0.01);
  EXPECT_TRUE(j["statistics"][0]["se"].is_null());
  EXPECT_TRUE(j["statistics"][0]["z"].is_null());
  EXPECT_EQ(j["verdict"], "pass");
  r.add({"b", 1.0, 1.0, 0.0, 9.0, false});
  r.epsilon = {0.1, 0.01};
  const auto k = to_json(r);
  EXPECT_EQ(k["verdict"], "fail");
  EXPECT_TRUE(k["epsilon"].is_array());
  EXPECT_EQ(k.begin().key(), "experiment");
}

TEST(LoglogSlope, PowerLaw) {
  EXPECT_NEAR(loglog_slope({0.1, 0.01, 0.001}, {std::sqrt(0.1), 0.1, std::sqrt(0.001)}), 0.5, 1e-12);
}

TEST(Kolmogorov, TailAndTwoSample) {
  EXPECT_EQ(kolmogorov_tail(0.0), 1.0);
  EXPECT_NEAR(kolmogorov_tail(1.3581), 0.05, 1e-3);
  EXPECT_NEAR(kolmogorov_tail(1.6276), 0.01, 2e-4);
  const std::vector<double> a{1, 2, 3, 4, 5};
  const auto same = ks_two_sample(a, a);
  EXPECT_EQ(same.d, 0.0);
  EXPECT_EQ(same.p_value, 1.0);
  std::vector<double> lo(200);
  std::vector<double> hi(200);
  for (int i = 0; i < 200; ++i) {
    lo[i] = i;
    hi[i] = 1000 + i;
  }
  const auto apart = ks_two_sample(lo, hi);
  EXPECT_EQ(apart.d, 1.0);
  EXPECT_LT(apart.p_value, 1e-20);
}

TEST(Experiments, EmptyModelIsAllZero) {
  LlnOptions lln;
  lln.M = 20;
  const auto r = lln_test(empty_model(), lln, 1, 1);
  EXPECT_TRUE(r.verdict);
  for (const auto& s : r.statistics) {
    if (s.name.find("slope") == std::string::npos) {
      EXPECT_EQ(s.mean, 0.0) << s.name;
    }
  }
}

TEST(Experiments, EulerAtOriginIsDegenerate) {
  EulerOptions opt;
  opt.points = {kOrigin};
  opt.M = 50;
  const auto r = euler_fluctuation_test(reference_model(), opt, 1, 1);
  EXPECT_TRUE(r.verdict);
  for (const auto& s : r.statistics) EXPECT_EQ(s.mean, 0.0) << s.name;
}

TEST(Experiments, DiffusiveAtTimeZero) {
  DiffusiveOptions opt;
  opt.t = 0.0;
  opt.M = 50;
  opt.independence_pairs.clear();
  const auto r = diffusive_test(reference_model(), opt, 1, 1);
  for (const auto& s : r.statistics) {
    if (s.name.find("cov") != std::string::npos) {
      EXPECT_EQ(s.mean, 0.0) << s.name;
      EXPECT_EQ(s.target, 0.0) << s.name;
    }
  }
}

TEST(Experiments, StationarityAtTimeZeroPasses) {
  StationarityOptions opt;
  opt.times = {0.0};
  opt.M = 20;
  const auto r = stationarity_smoke_test(reference_model(), opt, 1, 1);
  EXPECT_TRUE(r.verdict);
  for (const auto& s : r.statistics) EXPECT_EQ(s.mean, 1.0) << s.name;
}

}  // namespace
}  // namespace hrfl
