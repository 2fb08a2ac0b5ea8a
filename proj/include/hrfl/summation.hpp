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

#include <cmath>
#include <vector>

namespace hrfl {

enum class Summation {
  kPlain,        ///< left-to-right in configuration order
  kCompensated,  ///< Neumaier
  kExact,        ///< correctly rounded, independent of order
};

/// Neumaier's variant of Kahan summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  [[nodiscard]] double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

/**
 * Shewchuk's non-overlapping partials. value() is the correctly rounded
 * sum of everything added so far, so two accumulators fed the same
 * multiset in any order agree bit for bit.
 */
class ExactSum {
 public:
  void add(double x) {
    std::size_t i = 0;
    for (double y : partials_) {
      if (std::abs(x) < std::abs(y)) std::swap(x, y);
      const double hi = x + y;
      const double lo = y - (hi - x);
      if (lo != 0.0) partials_[i++] = lo;
      x = hi;
    }
    partials_.resize(i);
    partials_.push_back(x);
  }

  [[nodiscard]] double value() const {
    std::size_t n = partials_.size();
    if (n == 0) return 0.0;
    double hi = partials_[--n];
    double lo = 0.0;
    while (n > 0) {
      const double x = hi;
      const double y = partials_[--n];
      hi = x + y;
      const double yr = hi - x;
      lo = y - yr;
      if (lo != 0.0) break;
    }
    // round-half-even fix when the tail straddles a tie
    if (n > 0 && ((lo < 0.0 && partials_[n - 1] < 0.0) || (lo > 0.0 && partials_[n - 1] > 0.0))) {
      const double y = lo * 2.0;
      const double x = hi + y;
      if (y == x - hi) hi = x;
    }
    return hi;
  }

 private:
  std::vector<double> partials_;
};

/// Accumulator selected at runtime.
class Accumulator {
 public:
  explicit Accumulator(Summation mode) : mode_(mode) {}

  void add(double x) {
    switch (mode_) {
      case Summation::kPlain:
        plain_ += x;
        break;
      case Summation::kCompensated:
        comp_.add(x);
        break;
      case Summation::kExact:
        exact_.add(x);
        break;
    }
  }

  [[nodiscard]] double value() const {
    switch (mode_) {
      case Summation::kPlain:
        return plain_;
      case Summation::kCompensated:
        return comp_.value();
      case Summation::kExact:
        return exact_.value();
    }
    return plain_;
  }

 private:
  Summation mode_;
  double plain_ = 0.0;
  CompensatedSum comp_;
  ExactSum exact_;
};

}  // namespace hrfl
