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
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "hrfl/core.hpp"
#include "hrfl/geometry.hpp"

namespace hrfl {

struct QuadratureTolerance {
  double abs = 1e-10;
  double rel = 1e-8;
};

namespace detail {

/// Whether Boost reports Gauss-Kronrod error estimates in the units of [a, b]
/// (older releases report the estimate on the reference interval [-1, 1]).
inline bool gk_error_is_scaled() {
  static const bool scaled = [] {
    double err = 0.0;
    (void)boost::math::quadrature::gauss_kronrod<double, 15>::integrate([](double) { return 1.0; }, 0.0, 0x1p20, 0,
                                                                        0.0, &err);
    return err > 1e-12;
  }();
  return scaled;
}

/// One Gauss-Kronrod panel on [a, b]; the error estimate is expressed on [a, b].
template <unsigned N, class F>
double gk_panel(const F& f, double a, double b, double& err, double& l1) {
  const double value = boost::math::quadrature::gauss_kronrod<double, N>::integrate(f, a, b, 0, 0.0, &err, &l1);
  if (!gk_error_is_scaled()) err *= 0.5 * (b - a);
  return value;
}

/// Bisection driven by the panel error; `abs_tol` of 0 means "relative to the first panel".
template <unsigned N, class F>
double gk_adapt(const F& f, double a, double b, unsigned depth, double rel, double abs_tol, double& err,
                double& l1) {
  const double value = gk_panel<N>(f, a, b, err, l1);
  const double target = std::abs(value * rel);
  if (abs_tol == 0.0) abs_tol = target;
  if (depth == 0 || err <= target || err <= abs_tol) return value;
  const double mid = 0.5 * (a + b);
  double e2 = 0.0;
  double l2 = 0.0;
  const double left = gk_adapt<N>(f, a, mid, depth - 1, rel, abs_tol / 2, err, l1);
  const double right = gk_adapt<N>(f, mid, b, depth - 1, rel, abs_tol / 2, e2, l2);
  err += e2;
  l1 += l2;
  return left + right;
}

/// Adaptive Gauss-Kronrod on [a, b] with relative tolerance `rel`.
template <unsigned N, class F>
double gk_integrate(const F& f, double a, double b, unsigned depth, double rel, double& err, double& l1) {
  err = 0.0;
  l1 = 0.0;
  if (!(b > a)) return 0.0;
  return gk_adapt<N>(f, a, b, depth, rel, 0.0, err, l1);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Space densities
// ---------------------------------------------------------------------------

struct ConstantDensity {
  double value = 0.0;
};

/// values[i] on [breaks[i], breaks[i+1]); zero outside [breaks.front(), breaks.back()).
struct PiecewiseDensity {
  std::vector<double> breaks;
  std::vector<double> values;
};

/// Smooth profile on a bounded support, zero outside.
struct SmoothDensity {
  std::function<double(double)> f;
  Interval support;
  double bound = 0.0;                       ///< sup of f, used by rejection sampling
  std::function<double(double)> primitive;  ///< optional antiderivative
  bool smooth_edges = true;                 ///< f vanishes smoothly at the support ends
  std::string name = "smooth";
};

using SpaceDensity = std::variant<ConstantDensity, PiecewiseDensity, SmoothDensity>;

/// C-infinity bump height * exp(1 - 1/(1-u^2)), u = (x - center) / half_width.
inline SmoothDensity bump_density(double center, double half_width, double height) {
  detail::require(half_width > 0 && height >= 0 && detail::all_finite(center, half_width, height),
                  "bump density needs half_width > 0 and height >= 0");
  SmoothDensity d;
  d.f = [=](double x) {
    const double u = (x - center) / half_width;
    if (std::abs(u) >= 1.0) return 0.0;
    return height * std::exp(1.0 - 1.0 / (1.0 - u * u));
  };
  d.support = {center - half_width, center + half_width};
  d.bound = height;
  // Cumulative mass at panel edges; a fixed Gauss-Legendre rule finishes the last panel.
  constexpr std::size_t kPanels = 512;
  const double lo = d.support.lo;
  const double w = 2.0 * half_width / kPanels;
  auto cum = std::make_shared<std::vector<double>>(kPanels + 1, 0.0);
  using Rule = boost::math::quadrature::gauss<double, 20>;
  for (std::size_t j = 0; j < kPanels; ++j) {
    (*cum)[j + 1] = (*cum)[j] + Rule::integrate(d.f, lo + j * w, lo + (j + 1) * w);
  }
  d.primitive = [f = d.f, cum, lo, w](double x) {
    const double u = (x - lo) / w;
    if (u <= 0.0) return 0.0;
    if (u >= static_cast<double>(kPanels)) return cum->back();
    const auto j = static_cast<std::size_t>(u);
    const double a = lo + j * w;
    return x > a ? (*cum)[j] + Rule::integrate(f, a, x) : (*cum)[j];
  };
  std::ostringstream os;
  os.precision(17);
  os << "bump(center=" << center << ",half_width=" << half_width << ",height=" << height << ")";
  d.name = os.str();
  return d;
}

/// Gaussian profile height * exp(-u^2/2), u = (x - center) / width, cut at |u| = cutoff.
inline SmoothDensity gaussian_density(double center, double width, double height,
                                      double cutoff = 10.0) {
  detail::require(width > 0 && height >= 0 && cutoff > 0 &&
                      detail::all_finite(center, width, height, cutoff),
                  "gaussian density needs width > 0 and height >= 0");
  SmoothDensity d;
  d.f = [=](double x) {
    const double u = (x - center) / width;
    if (std::abs(u) > cutoff) return 0.0;
    return height * std::exp(-0.5 * u * u);
  };
  d.primitive = [=](double x) {
    const double u = std::clamp((x - center) / width, -cutoff, cutoff);
    return height * width * std::sqrt(std::numbers::pi / 2.0) * std::erf(u / std::numbers::sqrt2);
  };
  d.support = {center - cutoff * width, center + cutoff * width};
  d.bound = height;
  std::ostringstream os;
  os.precision(17);
  os << "gaussian(center=" << center << ",width=" << width << ",height=" << height << ")";
  d.name = os.str();
  return d;
}

// ---------------------------------------------------------------------------
// Velocity-mark kernels
// ---------------------------------------------------------------------------

struct UniformVelocity {
  double lo = -1.0;
  double hi = 1.0;
};
struct GaussianVelocity {
  double mean = 0.0;
  double sd = 1.0;
};
struct DiscreteVelocity {
  std::vector<double> values;
  std::vector<double> weights;
};
using VelocityLaw = std::variant<UniformVelocity, GaussianVelocity, DiscreteVelocity>;

struct ConstantMark {
  double value = 1.0;
};
struct UniformMark {
  double lo = 0.0;
  double hi = 1.0;
};
using MarkLaw = std::variant<ConstantMark, UniformMark>;

/// Velocity and mark independent given the position.
struct ProductKernel {
  VelocityLaw velocity;
  MarkLaw mark;
};

struct KernelAtom {
  double v{};
  double r{};
  double weight{};
};

/// Finite joint law of (v, r).
struct AtomicKernel {
  std::vector<KernelAtom> atoms;
};

using Kernel = std::variant<ProductKernel, AtomicKernel>;

enum class FrameMode {
  kNone,
  kTranslated,  ///< space-time translation of the measure by (z, s)
  kFrozen,      ///< space-homogeneous density frozen at the frame point
  kTilde,       ///< the translated measure written in frame coordinates
};

struct Frame {
  FrameMode mode = FrameMode::kNone;
  double z = 0.0;
  double s = 0.0;
};

namespace detail {

/// Mark law summarized by its range: constant when lo == hi.
struct MarkRange {
  double lo{};
  double hi{};

  [[nodiscard]] double moment(int k) const {
    if (lo == hi) return std::pow(lo, k);
    return (std::pow(hi, k + 1) - std::pow(lo, k + 1)) / ((k + 1) * (hi - lo));
  }
  [[nodiscard]] std::array<double, 3> moments() const { return {moment(0), moment(1), moment(2)}; }
};

struct VelocityAtom {
  double v{};
  double weight{};
  MarkRange mark;
  std::array<double, 3> mark_moment{};
};

/**
 * One kernel with the velocity support applied: a finite atomic part and
 * at most one continuous part with density on `domain`. Mass outside the
 * support is dropped, not renormalized.
 */
class KernelView {
 public:
  enum class Law { kNone, kUniform, kGaussian };

  KernelView() = default;

  KernelView(const Kernel& kernel, Interval support) {
    if (const auto* atomic = std::get_if<AtomicKernel>(&kernel)) {
      double total = 0.0;
      for (const auto& a : atomic->atoms) {
        require(detail::all_finite(a.v, a.r, a.weight) && a.weight >= 0,
                "kernel atoms need finite values and nonnegative weights");
        total += a.weight;
        if (support.contains(a.v)) {
          MarkRange m{a.r, a.r};
          atoms_.push_back({a.v, a.weight, m, m.moments()});
        }
      }
      require(std::abs(total - 1.0) <= 1e-9, "kernel atom weights must sum to 1");
      kept_ = 0.0;
      for (const auto& a : atoms_) kept_ += a.weight;
      return;
    }
    const auto& product = std::get<ProductKernel>(kernel);
    if (const auto* c = std::get_if<ConstantMark>(&product.mark)) {
      require(std::isfinite(c->value), "mark must be finite");
      mark_ = {c->value, c->value};
    } else {
      const auto& u = std::get<UniformMark>(product.mark);
      require(detail::all_finite(u.lo, u.hi) && u.lo < u.hi, "uniform mark needs lo < hi");
      mark_ = {u.lo, u.hi};
    }
    mark_moment_ = mark_.moments();

    if (const auto* u = std::get_if<UniformVelocity>(&product.velocity)) {
      require(detail::all_finite(u->lo, u->hi) && u->lo < u->hi, "uniform velocity needs lo < hi");
      law_ = Law::kUniform;
      p0_ = u->lo;
      p1_ = u->hi;
      domain_ = {std::max(u->lo, support.lo), std::min(u->hi, support.hi)};
      kept_ = domain_.length() / (u->hi - u->lo);
    } else if (const auto* g = std::get_if<GaussianVelocity>(&product.velocity)) {
      require(detail::all_finite(g->mean, g->sd) && g->sd > 0, "gaussian velocity needs sd > 0");
      law_ = Law::kGaussian;
      p0_ = g->mean;
      p1_ = g->sd;
      domain_ = support;
      kept_ = normal_cdf(support.hi) - normal_cdf(support.lo);
    } else {
      const auto& d = std::get<DiscreteVelocity>(product.velocity);
      require(d.values.size() == d.weights.size() && !d.values.empty(),
              "discrete velocity needs matching values and weights");
      double total = 0.0;
      for (std::size_t i = 0; i < d.values.size(); ++i) {
        require(detail::all_finite(d.values[i], d.weights[i]) && d.weights[i] >= 0,
                "discrete velocity needs finite values and nonnegative weights");
        total += d.weights[i];
        if (support.contains(d.values[i])) {
          atoms_.push_back({d.values[i], d.weights[i], mark_, mark_moment_});
        }
      }
      require(std::abs(total - 1.0) <= 1e-9, "discrete velocity weights must sum to 1");
      kept_ = 0.0;
      for (const auto& a : atoms_) kept_ += a.weight;
    }
  }

  [[nodiscard]] const std::vector<VelocityAtom>& atoms() const { return atoms_; }
  [[nodiscard]] bool continuous() const { return law_ != Law::kNone && !domain_.empty(); }
  [[nodiscard]] Law law() const { return law_; }
  [[nodiscard]] Interval domain() const { return domain_; }
  [[nodiscard]] const MarkRange& mark() const { return mark_; }
  [[nodiscard]] double mark_moment(int k) const { return mark_moment_[k]; }
  [[nodiscard]] double law_param0() const { return p0_; }
  [[nodiscard]] double law_param1() const { return p1_; }

  /// Probability kept inside the velocity support.
  [[nodiscard]] double kept_mass() const { return kept_; }
  [[nodiscard]] double tail_mass() const { return 1.0 - kept_; }

  /// Density of the continuous part at v (zero outside the kept domain).
  [[nodiscard]] double density(double v) const {
    if (!continuous() || v < domain_.lo || v > domain_.hi) return 0.0;
    if (law_ == Law::kUniform) return 1.0 / (p1_ - p0_);
    const double u = (v - p0_) / p1_;
    return std::exp(-0.5 * u * u) / (p1_ * std::sqrt(2.0 * std::numbers::pi));
  }

  [[nodiscard]] double normal_cdf(double v) const {
    return 0.5 * std::erfc(-(v - p0_) / (p1_ * std::numbers::sqrt2));
  }

  /// Everything with nonzero mass has |v| <= this.
  [[nodiscard]] bool has_negative_marks() const {
    if (mark_.lo < 0) return law_ != Law::kNone || !atoms_.empty();
    return std::any_of(atoms_.begin(), atoms_.end(), [](const VelocityAtom& a) { return a.mark.lo < 0; });
  }

 private:
  std::vector<VelocityAtom> atoms_;
  Law law_ = Law::kNone;
  double p0_ = 0.0;
  double p1_ = 0.0;
  Interval domain_{0.0, 0.0};
  MarkRange mark_{};
  std::array<double, 3> mark_moment_{};
  double kept_ = 1.0;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// IntensityModel
// ---------------------------------------------------------------------------

/**
 * Intensity measure rho(x) dx kappa(dv, dr | x) with the velocity law hard
 * truncated to `v_support`. The kernel may depend on x through finitely
 * many cells. Immutable once built.
 */
class IntensityModel {
 public:
  IntensityModel() : IntensityModel(ConstantDensity{0.0}, ProductKernel{UniformVelocity{}, ConstantMark{}}, {-1.0, 1.0}) {}

  IntensityModel(SpaceDensity rho, Kernel kernel, Interval v_support, bool signed_marks = false)
      : IntensityModel(std::move(rho), {}, std::vector<Kernel>{std::move(kernel)}, v_support, signed_marks) {}

  IntensityModel(SpaceDensity rho, std::vector<double> cell_breaks, std::vector<Kernel> kernels,
                 Interval v_support, bool signed_marks = false)
      : rho_(std::move(rho)),
        cell_breaks_(std::move(cell_breaks)),
        kernels_(std::move(kernels)),
        v_support_(v_support),
        signed_marks_(signed_marks) {
    detail::require(detail::all_finite(v_support_.lo, v_support_.hi) && v_support_.lo < v_support_.hi,
                    "v_support must be a finite interval with lo < hi");
    detail::require(kernels_.size() == cell_breaks_.size() + 1,
                    "need exactly one kernel per cell (breaks + 1)");
    for (std::size_t i = 0; i < cell_breaks_.size(); ++i) {
      detail::require(std::isfinite(cell_breaks_[i]), "cell breaks must be finite");
      if (i > 0) detail::require(cell_breaks_[i - 1] < cell_breaks_[i], "cell breaks must increase");
    }
    validate_density();
    views_.reserve(kernels_.size());
    for (const auto& k : kernels_) views_.emplace_back(k, v_support_);
    if (!signed_marks_) {
      for (const auto& v : views_) {
        detail::require(!v.has_negative_marks(), "negative marks require signed_marks");
      }
    }
  }

  [[nodiscard]] const SpaceDensity& rho() const { return rho_; }
  [[nodiscard]] const std::vector<Kernel>& kernels() const { return kernels_; }
  [[nodiscard]] const std::vector<double>& cell_breaks() const { return cell_breaks_; }
  [[nodiscard]] Interval v_support() const { return v_support_; }
  [[nodiscard]] double v_bound() const { return std::max(std::abs(v_support_.lo), std::abs(v_support_.hi)); }
  [[nodiscard]] bool signed_marks() const { return signed_marks_; }
  [[nodiscard]] const Frame& frame() const { return frame_; }

  [[nodiscard]] std::size_t cell_count() const { return views_.size(); }
  [[nodiscard]] const detail::KernelView& cell(std::size_t i) const { return views_[i]; }

  [[nodiscard]] Interval cell_bounds(std::size_t i) const {
    constexpr double inf = std::numeric_limits<double>::infinity();
    return {i == 0 ? -inf : cell_breaks_[i - 1], i == cell_breaks_.size() ? inf : cell_breaks_[i]};
  }

  [[nodiscard]] std::size_t cell_index(double x) const {
    return static_cast<std::size_t>(std::upper_bound(cell_breaks_.begin(), cell_breaks_.end(), x) -
                                    cell_breaks_.begin());
  }

  /// Space density rho(x) of the unframed model.
  [[nodiscard]] double density(double x) const {
    return std::visit(
        [x](const auto& d) -> double {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, ConstantDensity>) {
            return d.value;
          } else if constexpr (std::is_same_v<T, PiecewiseDensity>) {
            if (x < d.breaks.front() || x >= d.breaks.back()) return 0.0;
            const auto it = std::upper_bound(d.breaks.begin(), d.breaks.end(), x);
            return d.values[static_cast<std::size_t>(it - d.breaks.begin()) - 1];
          } else {
            if (x < d.support.lo || x > d.support.hi) return 0.0;
            return d.f(x);
          }
        },
        rho_);
  }

  /// Integral of rho over [lo, hi] (signed if hi < lo).
  [[nodiscard]] double density_integral(double lo, double hi) const {
    if (hi < lo) return -density_integral(hi, lo);
    if (!(hi > lo)) return 0.0;
    return std::visit(
        [lo, hi](const auto& d) -> double {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, ConstantDensity>) {
            return d.value * (hi - lo);
          } else if constexpr (std::is_same_v<T, PiecewiseDensity>) {
            double total = 0.0;
            for (std::size_t i = 0; i + 1 < d.breaks.size(); ++i) {
              const double a = std::max(lo, d.breaks[i]);
              const double b = std::min(hi, d.breaks[i + 1]);
              if (b > a) total += d.values[i] * (b - a);
            }
            return total;
          } else {
            const double a = std::max(lo, d.support.lo);
            const double b = std::min(hi, d.support.hi);
            if (!(b > a)) return 0.0;
            if (d.primitive) return d.primitive(b) - d.primitive(a);
            double err = 0.0;
            double l1 = 0.0;
            const double value =
                detail::gk_integrate<31>(d.f, a, b, 15, 1e-13, err, l1);
            if (err > 1e-10 * std::max(1.0, l1)) {
              throw QuadratureError("density integral did not converge", err);
            }
            return value;
          }
        },
        rho_);
  }

  /// Finite x locations where rho or the kernel may fail to be smooth.
  [[nodiscard]] std::vector<double> x_breaks() const {
    std::vector<double> out = cell_breaks_;
    if (const auto* p = std::get_if<PiecewiseDensity>(&rho_)) {
      out.insert(out.end(), p->breaks.begin(), p->breaks.end());
    } else if (const auto* s = std::get_if<SmoothDensity>(&rho_)) {
      out.push_back(s->support.lo);
      out.push_back(s->support.hi);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  /// Locations where rho or the kernel jump.
  [[nodiscard]] std::vector<double> jump_breaks() const {
    std::vector<double> out = cell_breaks_;
    if (const auto* p = std::get_if<PiecewiseDensity>(&rho_)) {
      out.insert(out.end(), p->breaks.begin(), p->breaks.end());
    } else if (const auto* s = std::get_if<SmoothDensity>(&rho_); s && !s->smooth_edges) {
      out.push_back(s->support.lo);
      out.push_back(s->support.hi);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  /// Largest velocity mass dropped by the support truncation over all cells.
  [[nodiscard]] double tail_mass() const {
    double out = 0.0;
    for (const auto& v : views_) out = std::max(out, v.tail_mass());
    return out;
  }

  [[nodiscard]] bool homogeneous() const {
    return frame_.mode == FrameMode::kNone && views_.size() == 1 && std::holds_alternative<ConstantDensity>(rho_);
  }

  [[nodiscard]] bool empty() const {
    if (const auto* c = std::get_if<ConstantDensity>(&rho_)) return c->value == 0.0;
    if (const auto* p = std::get_if<PiecewiseDensity>(&rho_)) {
      return std::all_of(p->values.begin(), p->values.end(), [](double v) { return v == 0.0; });
    }
    return std::get<SmoothDensity>(rho_).bound == 0.0;
  }

  [[nodiscard]] bool has_negative_marks() const {
    return std::any_of(views_.begin(), views_.end(), [](const auto& v) { return v.has_negative_marks(); });
  }

  [[nodiscard]] IntensityModel with_frame(Frame f) const {
    IntensityModel out = *this;
    out.frame_ = f;
    return out;
  }

  /**
   * Phase-space density rho(x) kappa(v, r | x) of the unframed model, with
   * respect to dx times Lebesgue measure in the continuous coordinates and
   * counting measure on atoms.
   */
  [[nodiscard]] double phase_density(double x, double v, double r) const {
    const double rho = density(x);
    if (rho == 0.0) return 0.0;
    const auto& view = views_[cell_index(x)];
    double kappa = 0.0;
    for (const auto& a : view.atoms()) {
      if (a.v == v) kappa += a.weight * mark_density(a.mark, r);
    }
    if (view.continuous()) kappa += view.density(v) * mark_density(view.mark(), r);
    return rho * kappa;
  }

  [[nodiscard]] std::string describe() const {
    std::ostringstream os;
    os.precision(17);
    std::visit(
        [&os](const auto& d) {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, ConstantDensity>) {
            os << "rho=constant(" << d.value << ")";
          } else if constexpr (std::is_same_v<T, PiecewiseDensity>) {
            os << "rho=piecewise(" << d.values.size() << " pieces on [" << d.breaks.front() << ","
               << d.breaks.back() << "))";
          } else {
            os << "rho=" << d.name;
          }
        },
        rho_);
    os << "; cells=" << views_.size() << "; v_support=[" << v_support_.lo << "," << v_support_.hi
       << "]; tail_mass=" << tail_mass();
    return os.str();
  }

 private:
  static double mark_density(const detail::MarkRange& m, double r) {
    if (m.lo == m.hi) return r == m.lo ? 1.0 : 0.0;
    return (r >= m.lo && r <= m.hi) ? 1.0 / (m.hi - m.lo) : 0.0;
  }

  void validate_density() const {
    std::visit(
        [](const auto& d) {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, ConstantDensity>) {
            detail::require(std::isfinite(d.value) && d.value >= 0, "constant density must be finite and >= 0");
          } else if constexpr (std::is_same_v<T, PiecewiseDensity>) {
            detail::require(d.breaks.size() >= 2 && d.values.size() + 1 == d.breaks.size(),
                            "piecewise density needs n+1 breaks for n values");
            for (std::size_t i = 0; i < d.breaks.size(); ++i) {
              detail::require(std::isfinite(d.breaks[i]), "piecewise breaks must be finite");
              if (i > 0) detail::require(d.breaks[i - 1] < d.breaks[i], "piecewise breaks must increase");
            }
            for (double v : d.values) {
              detail::require(std::isfinite(v) && v >= 0, "piecewise values must be finite and >= 0");
            }
          } else {
            detail::require(static_cast<bool>(d.f), "smooth density needs a callable");
            detail::require(detail::all_finite(d.support.lo, d.support.hi) && d.support.lo < d.support.hi,
                            "smooth density needs a bounded support");
            detail::require(std::isfinite(d.bound) && d.bound >= 0, "smooth density needs a finite bound");
          }
        },
        rho_);
  }

  SpaceDensity rho_;
  std::vector<double> cell_breaks_;
  std::vector<Kernel> kernels_;
  std::vector<detail::KernelView> views_;
  Interval v_support_;
  bool signed_marks_ = false;
  Frame frame_{};
};

/// The reference model: rho = 1, v uniform on [-1, 1], r = 1.
inline IntensityModel reference_model() {
  return IntensityModel(ConstantDensity{1.0}, ProductKernel{UniformVelocity{-1.0, 1.0}, ConstantMark{1.0}},
                        {-1.0, 1.0});
}

// ---------------------------------------------------------------------------
// Line-set integration
// ---------------------------------------------------------------------------

namespace detail {

/// x0 - v t0: the intercept of the line with velocity v through (x0, t0).
struct AffinePivot {
  double x0{};
  double t0{};
  [[nodiscard]] double at(double v) const { return x0 - v * t0; }
};

/**
 * A set of lines described per velocity: either intercepts in
 * (max lower(v), min upper(v)], or the single intercept point(v) when a
 * density rather than a mass is wanted.
 */
struct LineQuery {
  std::vector<AffinePivot> lower;
  std::vector<AffinePivot> upper;
  std::optional<AffinePivot> point;
};

inline double integrate_piece(const std::function<double(double)>& f, double a, double b,
                              const QuadratureTolerance& tol) {
  double err = 0.0;
  double l1 = 0.0;
  const double value =
      detail::gk_integrate<15>(f, a, b, 18, 1e-12, err, l1);
  if (!std::isfinite(value)) throw QuadratureError("non-finite integrand", err);
  if (err > std::max(tol.abs, tol.rel * l1)) {
    throw QuadratureError("velocity quadrature did not reach tolerance", err);
  }
  return value;
}

/**
 * Integral over the query set of r^k v^vpow with respect to the model
 * (frame included). Continuous velocity parts are integrated piecewise
 * between every velocity where the integrand can kink, so each piece is
 * smooth.
 */
inline double integrate_lines(const IntensityModel& m, int k, int vpow, LineQuery q,
                              const QuadratureTolerance& tol) {
  detail::require(k >= 0 && k <= 2, "moment order must be 0, 1 or 2");
  const Frame& frame = m.frame();
  std::optional<AffinePivot> anchor;
  if (frame.mode == FrameMode::kTranslated || frame.mode == FrameMode::kTilde) {
    auto shift = [&](AffinePivot& p) {
      p.x0 += frame.z;
      p.t0 += frame.s;
    };
    for (auto& p : q.lower) shift(p);
    for (auto& p : q.upper) shift(p);
    if (q.point) shift(*q.point);
  } else if (frame.mode == FrameMode::kFrozen) {
    anchor = AffinePivot{frame.z, frame.s};
  }

  // Pivots whose position feeds rho / cell lookups, and all pivots.
  std::vector<AffinePivot> located;
  std::vector<AffinePivot> all = q.lower;
  all.insert(all.end(), q.upper.begin(), q.upper.end());
  if (q.point) all.push_back(*q.point);
  if (anchor) {
    located.push_back(*anchor);
    all.push_back(*anchor);
  } else {
    located = all;
  }
  const std::vector<double> xb = m.x_breaks();

  double total = 0.0;
  for (std::size_t c = 0; c < m.cell_count(); ++c) {
    const auto& view = m.cell(c);
    const Interval cb = m.cell_bounds(c);
    auto in_cell = [&cb](double u) { return u >= cb.lo && u < cb.hi; };

    auto spatial = [&](double v) -> double {
      if (q.point) {
        const double u = anchor ? anchor->at(v) : q.point->at(v);
        return in_cell(u) ? m.density(u) : 0.0;
      }
      double lo = -std::numeric_limits<double>::infinity();
      double hi = std::numeric_limits<double>::infinity();
      for (const auto& p : q.lower) lo = std::max(lo, p.at(v));
      for (const auto& p : q.upper) hi = std::min(hi, p.at(v));
      if (!(hi > lo)) return 0.0;
      if (anchor) {
        const double u = anchor->at(v);
        return in_cell(u) ? (hi - lo) * m.density(u) : 0.0;
      }
      lo = std::max(lo, cb.lo);
      hi = std::min(hi, cb.hi);
      if (!(hi > lo)) return 0.0;
      return m.density_integral(lo, hi);
    };

    for (const auto& a : view.atoms()) {
      const double g = spatial(a.v);
      if (g != 0.0) total += a.weight * std::pow(a.v, vpow) * a.mark_moment[k] * g;
    }

    if (!view.continuous()) continue;
    const Interval dom = view.domain();
    std::vector<double> cuts{dom.lo, dom.hi};
    auto add_cut = [&](double v) {
      if (std::isfinite(v) && v > dom.lo && v < dom.hi) cuts.push_back(v);
    };
    for (std::size_t i = 0; i < all.size(); ++i) {
      for (std::size_t j = i + 1; j < all.size(); ++j) {
        if (all[i].t0 != all[j].t0) add_cut((all[i].x0 - all[j].x0) / (all[i].t0 - all[j].t0));
      }
    }
    std::vector<double> edges = xb;
    if (std::isfinite(cb.lo)) edges.push_back(cb.lo);
    if (std::isfinite(cb.hi)) edges.push_back(cb.hi);
    for (const auto& p : located) {
      if (p.t0 == 0.0) continue;
      for (double e : edges) add_cut((p.x0 - e) / p.t0);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    const double mk = view.mark_moment(k);
    if (mk == 0.0) continue;
    const std::function<double(double)> integrand = [&](double v) {
      const double g = spatial(v);
      return g == 0.0 ? 0.0 : view.density(v) * std::pow(v, vpow) * g;
    };
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      total += mk * integrate_piece(integrand, cuts[i], cuts[i + 1], tol);
    }
  }
  return total;
}

inline LineQuery oriented_query(const Segment& seg, Orientation o) {
  const AffinePivot pa{seg.a.x, seg.a.t};
  const AffinePivot pb{seg.b.x, seg.b.t};
  if (o == Orientation::kPlus) return {{pa}, {pb}, std::nullopt};
  return {{pb}, {pa}, std::nullopt};
}

}  // namespace detail

/**
 * mu_k of the lines crossing `seg` with the given orientation. Both is
 * evaluated as Plus + Minus, so the split is exactly additive.
 */
inline double moment_on_crossing(const IntensityModel& m, int k, const Segment& seg, Orientation o,
                                 const QuadratureTolerance& tol = {}) {
  detail::require(detail::all_finite(seg.a.x, seg.a.t, seg.b.x, seg.b.t), "segment must be finite");
  if (seg.degenerate()) return 0.0;
  if (o == Orientation::kBoth) {
    return moment_on_crossing(m, k, seg, Orientation::kPlus, tol) +
           moment_on_crossing(m, k, seg, Orientation::kMinus, tol);
  }
  return detail::integrate_lines(m, k, 0, detail::oriented_query(seg, o), tol);
}

/// mu_k(seg+) - mu_k(seg-).
inline double signed_moment(const IntensityModel& m, int k, const Segment& seg, const QuadratureTolerance& tol = {}) {
  return moment_on_crossing(m, k, seg, Orientation::kPlus, tol) -
         moment_on_crossing(m, k, seg, Orientation::kMinus, tol);
}

/// mu_k of the lines crossing both segments.
inline double moment_intersection(const IntensityModel& m, int k, const Segment& s1, const Segment& s2,
                                  const QuadratureTolerance& tol = {}) {
  if (s1.degenerate() || s2.degenerate()) return 0.0;
  double total = 0.0;
  for (Orientation o1 : {Orientation::kPlus, Orientation::kMinus}) {
    for (Orientation o2 : {Orientation::kPlus, Orientation::kMinus}) {
      auto q1 = detail::oriented_query(s1, o1);
      const auto q2 = detail::oriented_query(s2, o2);
      q1.lower.insert(q1.lower.end(), q2.lower.begin(), q2.lower.end());
      q1.upper.insert(q1.upper.end(), q2.upper.begin(), q2.upper.end());
      total += detail::integrate_lines(m, k, 0, std::move(q1), tol);
    }
  }
  return total;
}

/// The mu_2 distance d(a, b) = mu_2(ab).
inline double distance(const IntensityModel& m, SpaceTimePoint a, SpaceTimePoint b,
                       const QuadratureTolerance& tol = {}) {
  return moment_on_crossing(m, 2, {a, b}, Orientation::kBoth, tol);
}

/**
 * The model seen from the space-time point (z, s). Translated and Tilde
 * both give the translated measure, intercept x' standing for the line
 * through (z + x', s); Frozen gives the space-homogeneous measure
 * rho(z - v s) dx kappa(dv, dr | z - v s). Homogeneous models are returned
 * unchanged.
 */
inline IntensityModel timeshifted_model(const IntensityModel& m, double z, double s, FrameMode mode) {
  detail::require(detail::all_finite(z, s), "frame must be finite");
  if (mode == FrameMode::kNone || m.homogeneous()) return m;
  const Frame& f = m.frame();
  if (f.mode == FrameMode::kNone) return m.with_frame({mode, z, s});
  const bool both_translations = (f.mode == FrameMode::kTranslated || f.mode == FrameMode::kTilde) &&
                                 (mode == FrameMode::kTranslated || mode == FrameMode::kTilde);
  detail::require(both_translations, "only translations compose with an existing frame");
  return m.with_frame({mode, f.z + z, f.s + s});
}

/// Density of the intercept marginal at x, integrated over (v, r), frame included.
inline double intercept_density(const IntensityModel& m, double x, const QuadratureTolerance& tol = {}) {
  return detail::integrate_lines(m, 0, 0, {{}, {}, detail::AffinePivot{x, 0.0}}, tol);
}

}  // namespace hrfl
