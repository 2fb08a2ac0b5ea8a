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

#include <charconv>
#include <fstream>
#include <initializer_list>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hrfl/core.hpp"
#include "hrfl/hardrod.hpp"
#include "hrfl/hydro.hpp"
#include "hrfl/sampler.hpp"

namespace hrfl::io {

/// 17 significant digits, '.' decimal, locale independent.
inline std::string format_number(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return {buf, res.ptr};
}

/// Comma separated, header first, LF line endings.
class CsvWriter {
 public:
  CsvWriter(std::ostream& os, std::initializer_list<const char*> header) : os_(os) {
    bool first = true;
    for (const char* h : header) {
      if (!first) os_ << ',';
      os_ << h;
      first = false;
    }
    os_ << '\n';
  }

  template <class... Ts>
  void row(const Ts&... values) {
    bool first = true;
    ((write(values, first)), ...);
    os_ << '\n';
  }

 private:
  void write(double v, bool& first) { sep(first), os_ << format_number(v); }
  void write(std::size_t v, bool& first) { sep(first), os_ << v; }
  void write(int v, bool& first) { sep(first), os_ << v; }
  void write(const std::string& v, bool& first) { sep(first), os_ << v; }
  void sep(bool& first) {
    if (!first) os_ << ',';
    first = false;
  }

  std::ostream& os_;
};

inline std::ofstream open_output(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path + " for writing");
  return os;
}

inline void write_configuration(std::ostream& os, const SampledConfiguration& cfg) {
  CsvWriter w(os, {"x", "v", "r"});
  for (const auto& p : cfg.points) w.row(p.x, p.v, p.r);
}

/// Surface values on a grid of (x, t) points.
inline void write_surface(std::ostream& os, const std::vector<double>& xs, const std::vector<double>& ts,
                          const std::vector<std::vector<double>>& values) {
  CsvWriter w(os, {"t", "x", "H"});
  for (std::size_t j = 0; j < ts.size(); ++j) {
    for (std::size_t i = 0; i < xs.size(); ++i) w.row(ts[j], xs[i], values[j][i]);
  }
}

struct TrajectoryFrame {
  double t = 0.0;
  RodConfiguration rods;
};

/// Rod id is the index in the time-zero configuration.
inline void write_trajectories(std::ostream& os, const std::vector<TrajectoryFrame>& frames) {
  CsvWriter w(os, {"time", "rod_id", "left", "velocity", "length"});
  for (const auto& f : frames) {
    for (std::size_t i = 0; i < f.rods.size(); ++i) w.row(f.t, i, f.rods[i].y, f.rods[i].v, f.rods[i].r);
  }
}

inline void write_gaussian_samples(std::ostream& os, const Eigen::MatrixXd& samples) {
  CsvWriter w(os, {"sample", "point", "value"});
  for (Eigen::Index s = 0; s < samples.rows(); ++s) {
    for (Eigen::Index j = 0; j < samples.cols(); ++j) {
      w.row(static_cast<std::size_t>(s), static_cast<std::size_t>(j), samples(s, j));
    }
  }
}

inline void write_matrix(std::ostream& os, const Eigen::MatrixXd& m) {
  CsvWriter w(os, {"row", "col", "value"});
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      w.row(static_cast<std::size_t>(i), static_cast<std::size_t>(j), m(i, j));
    }
  }
}

inline void write_ghd_residual(std::ostream& os, const GhdResidual& r) {
  CsvWriter w(os, {"q", "t", "v", "residual"});
  for (const auto& n : r.nodes) w.row(n.q, n.t, n.v, n.residual);
}

}  // namespace hrfl::io
