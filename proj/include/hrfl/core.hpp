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
#include <cstdio>
#include <stdexcept>
#include <string>

namespace hrfl {

/// One marked line / ideal-gas particle: intercept at t = 0, velocity, mark.
struct PhasePoint {
  double x{};
  double v{};
  double r{};

  friend bool operator==(const PhasePoint&, const PhasePoint&) = default;
};

/// Closed interval [lo, hi]; empty when lo >= hi.
struct Interval {
  double lo{};
  double hi{};

  [[nodiscard]] bool empty() const { return !(lo < hi); }
  [[nodiscard]] double length() const { return empty() ? 0.0 : hi - lo; }
  [[nodiscard]] bool contains(double x) const { return lo <= x && x <= hi; }

  friend bool operator==(const Interval&, const Interval&) = default;
};

// Error hierarchy. The CLI maps these onto exit codes.

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid arguments or a model that violates its contract.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure: non-convergent quadrature, root bracketing, etc.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class QuadratureError : public NumericalError {
 public:
  QuadratureError(const std::string& what, double achieved)
      : NumericalError(what + " (achieved error estimate " + format(achieved) + ")"), achieved_(achieved) {}

  [[nodiscard]] double achieved() const { return achieved_; }

 private:
  static std::string format(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", x);
    return buf;
  }

  double achieved_;
};

/// A configuration invariant (e.g. rod disjointness) was broken.
class InvariantError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline void require(bool cond, const char* what) {
  if (!cond) throw DomainError(what);
}

inline bool all_finite(double a) { return std::isfinite(a); }

template <class... Ts>
bool all_finite(double a, Ts... rest) {
  return std::isfinite(a) && all_finite(rest...);
}

}  // namespace detail
}  // namespace hrfl
