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

#include "hrfl/geometry.hpp"
#include "support.hpp"

namespace hrfl {
namespace {

using testing::random_point;
using testing::test_rng;
using testing::uniform;

TEST(SideOf, Examples) {
  EXPECT_EQ(side_of({0, 0}, {1, 5}), Side::kRight);
  EXPECT_EQ(side_of({0, 0}, {0, 3}), Side::kRight);  // closed right half-plane
  EXPECT_EQ(side_of({0, 1}, {-0.5, 0}), Side::kLeft);
}

TEST(ClassifyCrossing, Examples) {
  EXPECT_EQ(classify_crossing({0, 0}, {{-1, 0}, {1, 0}}), Crossing::kPlus);
  EXPECT_EQ(classify_crossing({0, 0}, {{1, 0}, {-1, 0}}), Crossing::kMinus);
  EXPECT_EQ(classify_crossing({10, 0}, {{-1, 0}, {1, 0}}), Crossing::kNoCross);
  EXPECT_FALSE(classify_crossing({0, 0}, {{1, 1}, {1, 1}}).has_value());
}

TEST(CrossingInterval, Examples) {
  EXPECT_EQ(crossing_interval(0.0, {{0, 0}, {3, 0}}), (Interval{0, 3}));
  EXPECT_EQ(crossing_interval(1.0, {{0, 0}, {0, 2}}), (Interval{-2, 0}));
  const Interval e = crossing_interval(2.0, {{1, 1}, {5, 3}});
  EXPECT_EQ(e, (Interval{-1, -1}));
  EXPECT_TRUE(e.empty());
  // no line of velocity 2 crosses a segment lying on a line of velocity 2
  auto rng = test_rng(1);
  for (int i = 0; i < 1000; ++i) {
    EXPECT_EQ(classify_crossing({uniform(rng, -5, 5), 2.0}, {{1, 1}, {5, 3}}), Crossing::kNoCross);
  }
}

TEST(ClassifyCrossing, PartitionAndReversal) {
  auto rng = test_rng(2);
  for (int i = 0; i < 10000; ++i) {
    const LineParam line{uniform(rng, -3, 3), uniform(rng, -2, 2)};
    const Segment seg{random_point(rng), random_point(rng)};
    const auto c = classify_crossing(line, seg);
    const auto r = classify_crossing(line, seg.reversed());
    ASSERT_TRUE(c && r);
    EXPECT_EQ(*c == Crossing::kPlus, *r == Crossing::kMinus);
    EXPECT_EQ(*c == Crossing::kNoCross, *r == Crossing::kNoCross);
  }
}

TEST(ClassifyCrossing, ConsistentWithCrossingInterval) {
  auto rng = test_rng(3);
  int crossings = 0;
  for (int i = 0; i < 10000; ++i) {
    const LineParam line{uniform(rng, -3, 3), uniform(rng, -2, 2)};
    const Segment seg{random_point(rng), random_point(rng)};
    const Interval iv = crossing_interval(line.v, seg);
    if (line.x == iv.lo || line.x == iv.hi) continue;  // boundary convention, measure zero
    const bool inside = iv.lo < line.x && line.x < iv.hi;
    const bool crosses = *classify_crossing(line, seg) != Crossing::kNoCross;
    EXPECT_EQ(inside, crosses);
    crossings += crosses;
  }
  EXPECT_GT(crossings, 1000);
}

TEST(SideOf, TranslationInvariant) {
  auto rng = test_rng(4);
  for (int i = 0; i < 10000; ++i) {
    const LineParam line{uniform(rng, -3, 3), uniform(rng, -2, 2)};
    const SpaceTimePoint p = random_point(rng);
    const double c = static_cast<double>(static_cast<int>(uniform(rng, -8, 8)));  // exact shifts
    EXPECT_EQ(side_of({line.x + c, line.v}, {p.x + c, p.t}), side_of(line, p));
  }
}

}  // namespace
}  // namespace hrfl
