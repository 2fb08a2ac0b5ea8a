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
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "hrfl/core.hpp"
#include "hrfl/geometry.hpp"
#include "hrfl/intensity.hpp"
#include "hrfl/rng.hpp"

namespace hrfl {

enum class CovarianceMode {
  kStandard,  ///< mu_2
  kFrozen,    ///< frozen measure at the frame point
  kTilde,     ///< translated measure at the frame point
};

struct CovarianceSpec {
  IntensityModel model;
  std::vector<SpaceTimePoint> points;
  CovarianceMode mode = CovarianceMode::kStandard;
  SpaceTimePoint frame{};
  QuadratureTolerance tol{};
};

/// The model whose mu_2 is the distance of the chosen mode.
inline IntensityModel distance_model(const CovarianceSpec& spec) {
  switch (spec.mode) {
    case CovarianceMode::kStandard:
      return spec.model;
    case CovarianceMode::kFrozen:
      return timeshifted_model(spec.model, spec.frame.x, spec.frame.t, FrameMode::kFrozen);
    case CovarianceMode::kTilde:
      return timeshifted_model(spec.model, spec.frame.x, spec.frame.t, FrameMode::kTilde);
  }
  return spec.model;
}

/// M[i][j] = (d(o, p_i) + d(o, p_j) - d(p_i, p_j)) / 2.
inline Eigen::MatrixXd covariance_matrix(const CovarianceSpec& spec) {
  const auto& pts = spec.points;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    detail::require(detail::all_finite(pts[i].x, pts[i].t), "points must be finite");
    for (std::size_t j = 0; j < i; ++j) detail::require(!(pts[i] == pts[j]), "points must be distinct");
  }
  const IntensityModel m = distance_model(spec);
  const auto n = static_cast<Eigen::Index>(pts.size());
  Eigen::VectorXd d0(n);
  for (Eigen::Index i = 0; i < n; ++i) d0(i) = distance(m, kOrigin, pts[i], spec.tol);
  Eigen::MatrixXd out(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out(i, i) = d0(i);
    for (Eigen::Index j = 0; j < i; ++j) {
      const double v = 0.5 * (d0(i) + d0(j) - distance(m, pts[i], pts[j], spec.tol));
      out(i, j) = v;
      out(j, i) = v;
    }
  }
  return out;
}

/**
 * Symmetric square-root factor of a covariance matrix. Eigenvalues below
 * -1e-8 * trace are an error; the rest of the negative part is clipped.
 */
class GaussianFactor {
 public:
  explicit GaussianFactor(const Eigen::MatrixXd& cov) : cov_(cov) {
    detail::require(cov.rows() == cov.cols(), "covariance must be square");
    const Eigen::Index n = cov.rows();
    if (n == 0) return;
    const double trace = cov.trace();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
    min_eigenvalue_ = es.eigenvalues().minCoeff();
    if (min_eigenvalue_ < -1e-8 * std::abs(trace)) {
      throw NumericalError("covariance is not positive semidefinite (min eigenvalue " +
                           std::to_string(min_eigenvalue_) + ")");
    }
    const Eigen::VectorXd sq = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    factor_ = es.eigenvectors() * sq.asDiagonal();
    zero_.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) zero_[static_cast<std::size_t>(i)] = cov(i, i) == 0.0;
  }

  [[nodiscard]] double min_eigenvalue() const { return min_eigenvalue_; }
  [[nodiscard]] const Eigen::MatrixXd& factor() const { return factor_; }

  /// One draw from N(0, cov).
  template <class Rng>
  [[nodiscard]] Eigen::VectorXd draw(Rng& rng) const {
    const Eigen::Index n = cov_.rows();
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i) z(i) = normal(rng);
    Eigen::VectorXd out = factor_ * z;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (zero_[static_cast<std::size_t>(i)]) out(i) = 0.0;
    }
    return out;
  }

 private:
  Eigen::MatrixXd cov_;
  Eigen::MatrixXd factor_;
  std::vector<bool> zero_;
  double min_eigenvalue_ = 0.0;
};

/// n_samples x points matrix of field samples, one row per sample.
inline Eigen::MatrixXd sample_field(const CovarianceSpec& spec, std::size_t n_samples, std::uint64_t seed) {
  const GaussianFactor f(covariance_matrix(spec));
  Eigen::MatrixXd out(static_cast<Eigen::Index>(n_samples), static_cast<Eigen::Index>(spec.points.size()));
  for (std::size_t s = 0; s < n_samples; ++s) {
    Philox4x32 rng = make_stream(seed, s, StreamTag::kGaussian);
    out.row(static_cast<Eigen::Index>(s)) = f.draw(rng).transpose();
  }
  return out;
}

}  // namespace hrfl
