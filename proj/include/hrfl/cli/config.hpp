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
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "json.hpp"

#include "hrfl/core.hpp"
#include "hrfl/gaussian.hpp"
#include "hrfl/hydro.hpp"
#include "hrfl/intensity.hpp"
#include "hrfl/stats.hpp"

namespace hrfl::cli {

inline constexpr int kSchemaVersion = 1;

/// Malformed or invalid configuration (exit code 2).
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what) {}
};

namespace detail {

inline std::string where(const YAML::Node& n) {
  const YAML::Mark m = n.Mark();
  if (m.is_null()) return "";
  return "line " + std::to_string(m.line + 1) + ", column " + std::to_string(m.column + 1) + ": ";
}

[[noreturn]] inline void fail(const YAML::Node& n, const std::string& path, const std::string& msg) {
  throw ConfigError(where(n) + path + ": " + msg);
}

inline void check_map(const YAML::Node& n, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!n.IsMap()) fail(n, path, "expected a mapping");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& kv : n) {
    const auto key = kv.first.as<std::string>();
    if (!ok.count(key)) fail(kv.first, path.empty() ? key : path + "." + key, "unknown key");
  }
}

inline std::string join(const std::string& path, const char* key) { return path.empty() ? key : path + "." + key; }

template <class T>
T as(const YAML::Node& n, const std::string& path) {
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    fail(n, path, "wrong value type");
  }
}

template <class T>
T get(const YAML::Node& parent, const char* key, const std::string& path, T fallback) {
  const YAML::Node n = parent[key];
  if (!n) return fallback;
  return as<T>(n, join(path, key));
}

template <class T>
T need(const YAML::Node& parent, const char* key, const std::string& path) {
  const YAML::Node n = parent[key];
  if (!n) fail(parent, join(path, key), "missing required key");
  return as<T>(n, join(path, key));
}

inline SpaceTimePoint point(const YAML::Node& n, const std::string& path) {
  const auto v = as<std::vector<double>>(n, path);
  if (v.size() != 2) fail(n, path, "expected [x, t]");
  return {v[0], v[1]};
}

inline Interval interval(const YAML::Node& n, const std::string& path) {
  const auto v = as<std::vector<double>>(n, path);
  if (v.size() != 2 || !(v[0] <= v[1])) fail(n, path, "expected [lo, hi] with lo <= hi");
  return {v[0], v[1]};
}

inline std::vector<SpaceTimePoint> points(const YAML::Node& n, const std::string& path) {
  if (!n.IsSequence()) fail(n, path, "expected a list of [x, t]");
  std::vector<SpaceTimePoint> out;
  for (std::size_t i = 0; i < n.size(); ++i) out.push_back(point(n[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

inline SpaceDensity parse_density(const YAML::Node& n, const std::string& path) {
  const auto type = need<std::string>(n, "type", path);
  if (type == "constant") {
    check_map(n, path, {"type", "value"});
    return ConstantDensity{need<double>(n, "value", path)};
  }
  if (type == "piecewise") {
    check_map(n, path, {"type", "breaks", "values"});
    PiecewiseDensity d{need<std::vector<double>>(n, "breaks", path), need<std::vector<double>>(n, "values", path)};
    if (d.breaks.size() != d.values.size() + 1) fail(n, path, "piecewise density needs len(breaks) = len(values) + 1");
    return d;
  }
  if (type == "bump") {
    check_map(n, path, {"type", "center", "half_width", "height"});
    return bump_density(need<double>(n, "center", path), need<double>(n, "half_width", path),
                        need<double>(n, "height", path));
  }
  if (type == "gaussian") {
    check_map(n, path, {"type", "center", "width", "height", "cutoff"});
    return gaussian_density(need<double>(n, "center", path), need<double>(n, "width", path),
                            need<double>(n, "height", path), get<double>(n, "cutoff", path, 10.0));
  }
  fail(n[("type")], join(path, "type"), "unknown density type '" + type + "'");
}

struct ParsedKernel {
  Kernel kernel;
  std::optional<Interval> natural_support;  ///< implied by uniform or discrete laws
};

inline ParsedKernel parse_kernel(const YAML::Node& n, const std::string& path) {
  if (n["atoms"]) {
    check_map(n, path, {"atoms"});
    const YAML::Node atoms = n["atoms"];
    if (!atoms.IsSequence() || atoms.size() == 0) fail(atoms, join(path, "atoms"), "expected a non-empty list");
    AtomicKernel k;
    double lo = 0.0;
    double hi = 0.0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      const std::string p = join(path, "atoms") + "[" + std::to_string(i) + "]";
      check_map(atoms[i], p, {"v", "r", "weight"});
      KernelAtom a{need<double>(atoms[i], "v", p), need<double>(atoms[i], "r", p), need<double>(atoms[i], "weight", p)};
      lo = i == 0 ? a.v : std::min(lo, a.v);
      hi = i == 0 ? a.v : std::max(hi, a.v);
      k.atoms.push_back(a);
    }
    return {k, Interval{lo, hi}};
  }
  check_map(n, path, {"velocity", "mark"});
  const YAML::Node vel = n["velocity"];
  const std::string vpath = join(path, "velocity");
  if (!vel) fail(n, vpath, "missing required key");
  ProductKernel k;
  std::optional<Interval> support;
  const auto vtype = need<std::string>(vel, "type", vpath);
  if (vtype == "uniform") {
    check_map(vel, vpath, {"type", "lo", "hi"});
    UniformVelocity u{need<double>(vel, "lo", vpath), need<double>(vel, "hi", vpath)};
    if (!(u.lo < u.hi)) fail(vel, vpath, "uniform velocity needs lo < hi");
    k.velocity = u;
    support = Interval{u.lo, u.hi};
  } else if (vtype == "gaussian") {
    check_map(vel, vpath, {"type", "mean", "sd"});
    GaussianVelocity g{need<double>(vel, "mean", vpath), need<double>(vel, "sd", vpath)};
    if (!(g.sd > 0)) fail(vel, vpath, "gaussian velocity needs sd > 0");
    k.velocity = g;
  } else if (vtype == "discrete") {
    check_map(vel, vpath, {"type", "values", "weights"});
    DiscreteVelocity d{need<std::vector<double>>(vel, "values", vpath),
                       need<std::vector<double>>(vel, "weights", vpath)};
    if (d.values.empty() || d.values.size() != d.weights.size()) {
      fail(vel, vpath, "discrete velocity needs equally many values and weights");
    }
    support = Interval{*std::min_element(d.values.begin(), d.values.end()),
                       *std::max_element(d.values.begin(), d.values.end())};
    k.velocity = d;
  } else {
    fail(vel["type"], join(vpath, "type"), "unknown velocity law '" + vtype + "'");
  }
  const YAML::Node mark = n["mark"];
  const std::string mpath = join(path, "mark");
  if (!mark) {
    k.mark = ConstantMark{1.0};
  } else {
    const auto mtype = need<std::string>(mark, "type", mpath);
    if (mtype == "constant") {
      check_map(mark, mpath, {"type", "value"});
      k.mark = ConstantMark{need<double>(mark, "value", mpath)};
    } else if (mtype == "uniform") {
      check_map(mark, mpath, {"type", "lo", "hi"});
      k.mark = UniformMark{need<double>(mark, "lo", mpath), need<double>(mark, "hi", mpath)};
    } else {
      fail(mark["type"], join(mpath, "type"), "unknown mark law '" + mtype + "'");
    }
  }
  return {k, support};
}

}  // namespace detail

/**
 * Model section: density, then one kernel or a list of kernels with
 * cell_breaks. v_support may be omitted for uniform, discrete and atomic
 * laws; Gaussian velocities need it.
 */
inline IntensityModel parse_model(const YAML::Node& n, const std::string& path = "model") {
  using namespace detail;
  check_map(n, path, {"density", "kernel", "kernels", "cell_breaks", "v_support", "signed_marks"});
  const YAML::Node dn = n["density"];
  if (!dn) fail(n, join(path, "density"), "missing required key");
  SpaceDensity rho = parse_density(dn, join(path, "density"));

  std::vector<Kernel> kernels;
  std::vector<double> breaks;
  std::optional<Interval> natural;
  bool needs_support = false;
  auto take = [&](const ParsedKernel& k) {
    kernels.push_back(k.kernel);
    if (!k.natural_support) {
      needs_support = true;
    } else if (!natural) {
      natural = k.natural_support;
    } else {
      natural = Interval{std::min(natural->lo, k.natural_support->lo), std::max(natural->hi, k.natural_support->hi)};
    }
  };
  if (n["kernel"] && n["kernels"]) fail(n, path, "give either kernel or kernels, not both");
  if (n["kernel"]) {
    take(parse_kernel(n["kernel"], join(path, "kernel")));
    if (n["cell_breaks"]) fail(n["cell_breaks"], join(path, "cell_breaks"), "cell_breaks needs a kernels list");
  } else if (n["kernels"]) {
    const YAML::Node ks = n["kernels"];
    if (!ks.IsSequence() || ks.size() == 0) fail(ks, join(path, "kernels"), "expected a non-empty list");
    for (std::size_t i = 0; i < ks.size(); ++i) take(parse_kernel(ks[i], join(path, "kernels") + "[" + std::to_string(i) + "]"));
    breaks = get<std::vector<double>>(n, "cell_breaks", path, {});
    if (breaks.size() + 1 != kernels.size()) fail(n, join(path, "cell_breaks"), "need len(kernels) = len(cell_breaks) + 1");
  } else {
    fail(n, join(path, "kernel"), "missing required key");
  }

  Interval support{-1.0, 1.0};
  if (n["v_support"] && !n["v_support"].IsNull()) {
    support = interval(n["v_support"], join(path, "v_support"));
  } else if (needs_support) {
    fail(n, join(path, "v_support"), "v_support is required for Gaussian velocity laws");
  } else {
    support = *natural;
    if (!(support.lo < support.hi)) {
      const double w = std::max(1.0, std::abs(support.lo));
      support = {support.lo - w, support.hi + w};
    }
  }
  if (!(support.lo < support.hi)) fail(n["v_support"], join(path, "v_support"), "needs lo < hi");
  const bool signed_marks = get<bool>(n, "signed_marks", path, false);
  try {
    return IntensityModel(std::move(rho), std::move(breaks), std::move(kernels), support, signed_marks);
  } catch (const DomainError& e) {
    fail(n, path, e.what());
  }
}

struct SampleFieldConfig {
  double epsilon = 1e-2;
  Interval x{-1.0, 1.0};
  std::size_t nx = 101;
  std::vector<double> times{0.0, 0.5, 1.0};
  std::vector<SpaceTimePoint> gaussian_points;  ///< empty: no Gaussian draw
  CovarianceMode gaussian_mode = CovarianceMode::kStandard;
  SpaceTimePoint gaussian_frame{};
  std::size_t gaussian_samples = 0;
};

struct HardRodConfig {
  std::string engine = "events";
  Interval window{-10.0, 10.0};
  std::vector<double> times{0.0, 1.0};
};

struct GhdConfig {
  GhdGrid grid;
  std::size_t refinements = 0;
  Interval ratio{3.2, 4.8};
  std::optional<double> max_l2;
};

/// A fully parsed run configuration.
struct Config {
  YAML::Node root;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  IntensityModel model;
  TestThresholds thresholds;
  LlnOptions lln;
  EulerOptions euler;
  DiffusiveOptions diffusive;
  StationarityOptions stationarity;
  GhdConfig ghd;
  SampleFieldConfig field;
  HardRodConfig hardrod;
};

namespace detail {

inline void parse_lln(const YAML::Node& n, LlnOptions& o) {
  const std::string p = "lln";
  check_map(n, p, {"epsilons", "M", "point", "mass_z", "mass_t", "slope_tolerance"});
  o.epsilons = get<std::vector<double>>(n, "epsilons", p, o.epsilons);
  o.M = get<std::size_t>(n, "M", p, o.M);
  if (n["point"]) o.point = point(n["point"], join(p, "point"));
  o.mass_z = get<double>(n, "mass_z", p, o.mass_z);
  o.mass_t = get<double>(n, "mass_t", p, o.mass_t);
  o.slope_tol = get<double>(n, "slope_tolerance", p, o.slope_tol);
  if (o.epsilons.size() < 2) fail(n, join(p, "epsilons"), "need at least two values");
  for (double e : o.epsilons) {
    if (!(e > 0)) fail(n, join(p, "epsilons"), "values must be positive");
  }
}

inline void parse_euler(const YAML::Node& n, EulerOptions& o) {
  const std::string p = "euler";
  check_map(n, p, {"epsilon", "guard_epsilon", "M", "points", "quasi", "mass"});
  o.epsilon = get<double>(n, "epsilon", p, o.epsilon);
  if (n["guard_epsilon"]) o.guard_epsilon = as<double>(n["guard_epsilon"], join(p, "guard_epsilon"));
  o.M = get<std::size_t>(n, "M", p, o.M);
  if (n["points"]) o.points = points(n["points"], join(p, "points"));
  if (const YAML::Node q = n["quasi"]) {
    if (!q.IsSequence()) fail(q, join(p, "quasi"), "expected a list");
    for (std::size_t i = 0; i < q.size(); ++i) {
      const std::string qp = join(p, "quasi") + "[" + std::to_string(i) + "]";
      check_map(q[i], qp, {"x", "v", "t"});
      o.quasi.push_back({need<double>(q[i], "x", qp), need<double>(q[i], "v", qp), need<double>(q[i], "t", qp)});
    }
  }
  if (const YAML::Node q = n["mass"]) {
    if (!q.IsSequence()) fail(q, join(p, "mass"), "expected a list");
    for (std::size_t i = 0; i < q.size(); ++i) {
      const std::string qp = join(p, "mass") + "[" + std::to_string(i) + "]";
      check_map(q[i], qp, {"x", "t"});
      o.mass.push_back({need<double>(q[i], "x", qp), need<double>(q[i], "t", qp)});
    }
  }
  if (!(o.epsilon > 0)) fail(n, join(p, "epsilon"), "must be positive");
}

inline void parse_diffusive(const YAML::Node& n, DiffusiveOptions& o) {
  const std::string p = "diffusive";
  check_map(n, p, {"epsilon", "M", "t", "x", "x_tilde", "v", "v_tilde", "quasi_particles", "frame", "pairs"});
  o.epsilon = get<double>(n, "epsilon", p, o.epsilon);
  o.M = get<std::size_t>(n, "M", p, o.M);
  o.t = get<double>(n, "t", p, o.t);
  o.x = get<double>(n, "x", p, o.x);
  o.x_tilde = get<double>(n, "x_tilde", p, o.x_tilde);
  o.v = get<double>(n, "v", p, o.v);
  o.v_tilde = get<double>(n, "v_tilde", p, o.v_tilde);
  o.quasi_particles = get<bool>(n, "quasi_particles", p, o.quasi_particles);
  if (n["frame"]) o.frame = point(n["frame"], join(p, "frame"));
  if (const YAML::Node q = n["pairs"]) {
    if (!q.IsSequence()) fail(q, join(p, "pairs"), "expected a list of [[x, t], [x, t]]");
    o.independence_pairs.clear();
    for (std::size_t i = 0; i < q.size(); ++i) {
      const auto pts = points(q[i], join(p, "pairs") + "[" + std::to_string(i) + "]");
      if (pts.size() != 2) fail(q[i], join(p, "pairs"), "each pair needs two points");
      o.independence_pairs.emplace_back(pts[0], pts[1]);
    }
  }
  if (!(o.epsilon > 0)) fail(n, join(p, "epsilon"), "must be positive");
}

inline void parse_stationarity(const YAML::Node& n, StationarityOptions& o) {
  const std::string p = "stationarity";
  check_map(n, p, {"times", "M", "half_width"});
  o.times = get<std::vector<double>>(n, "times", p, o.times);
  o.M = get<std::size_t>(n, "M", p, o.M);
  o.half_width = get<double>(n, "half_width", p, o.half_width);
  if (!(o.half_width > 0)) fail(n, join(p, "half_width"), "must be positive");
}

inline void parse_ghd(const YAML::Node& n, GhdConfig& o) {
  const std::string p = "ghd";
  check_map(n, p, {"q", "t", "nq", "nt", "stencil_order", "velocities", "refinements", "ratio", "max_l2"});
  if (n["q"]) o.grid.q = interval(n["q"], join(p, "q"));
  if (n["t"]) o.grid.t = interval(n["t"], join(p, "t"));
  o.grid.nq = get<std::size_t>(n, "nq", p, o.grid.nq);
  o.grid.nt = get<std::size_t>(n, "nt", p, o.grid.nt);
  o.grid.stencil_order = get<int>(n, "stencil_order", p, o.grid.stencil_order);
  o.grid.velocities = get<std::vector<double>>(n, "velocities", p, o.grid.velocities);
  o.refinements = get<std::size_t>(n, "refinements", p, o.refinements);
  if (n["ratio"]) o.ratio = interval(n["ratio"], join(p, "ratio"));
  if (n["max_l2"]) o.max_l2 = as<double>(n["max_l2"], join(p, "max_l2"));
  if (o.grid.stencil_order != 2 && o.grid.stencil_order != 4) fail(n, join(p, "stencil_order"), "must be 2 or 4");
  if (o.grid.nq < 2 || o.grid.nt < 1) fail(n, p, "grid needs nq >= 2 and nt >= 1");
}

inline void parse_field(const YAML::Node& n, SampleFieldConfig& o) {
  const std::string p = "field";
  check_map(n, p, {"epsilon", "x", "nx", "times", "gaussian"});
  o.epsilon = get<double>(n, "epsilon", p, o.epsilon);
  if (n["x"]) o.x = interval(n["x"], join(p, "x"));
  o.nx = get<std::size_t>(n, "nx", p, o.nx);
  o.times = get<std::vector<double>>(n, "times", p, o.times);
  if (!(o.epsilon > 0)) fail(n, join(p, "epsilon"), "must be positive");
  if (o.nx < 1) fail(n, join(p, "nx"), "must be at least 1");
  if (const YAML::Node g = n["gaussian"]) {
    const std::string gp = join(p, "gaussian");
    check_map(g, gp, {"points", "mode", "frame", "samples"});
    o.gaussian_points = points(need<YAML::Node>(g, "points", gp), join(gp, "points"));
    const auto mode = get<std::string>(g, "mode", gp, "standard");
    if (mode == "standard") {
      o.gaussian_mode = CovarianceMode::kStandard;
    } else if (mode == "frozen") {
      o.gaussian_mode = CovarianceMode::kFrozen;
    } else if (mode == "tilde") {
      o.gaussian_mode = CovarianceMode::kTilde;
    } else {
      fail(g["mode"], join(gp, "mode"), "expected standard, frozen or tilde");
    }
    if (g["frame"]) o.gaussian_frame = point(g["frame"], join(gp, "frame"));
    o.gaussian_samples = get<std::size_t>(g, "samples", gp, 1000);
  }
}

inline void parse_hardrod(const YAML::Node& n, HardRodConfig& o) {
  const std::string p = "hardrod";
  check_map(n, p, {"engine", "window", "times"});
  o.engine = get<std::string>(n, "engine", p, o.engine);
  if (o.engine != "surface" && o.engine != "events" && o.engine != "tagged") {
    fail(n["engine"], join(p, "engine"), "expected surface, events or tagged");
  }
  if (n["window"]) o.window = interval(n["window"], join(p, "window"));
  o.times = get<std::vector<double>>(n, "times", p, o.times);
}

}  // namespace detail

/// Validates a YAML tree (overrides already applied) into a Config.
inline Config parse_config(const YAML::Node& root) {
  using namespace detail;
  if (!root.IsMap()) throw ConfigError("configuration must be a mapping");
  check_map(root, "", {"schema_version", "seed", "threads", "model", "thresholds", "lln", "euler", "diffusive",
                       "stationarity", "ghd", "field", "hardrod"});
  if (!root["schema_version"]) throw ConfigError("schema_version: missing required key");
  const int version = as<int>(root["schema_version"], "schema_version");
  if (version != kSchemaVersion) {
    fail(root["schema_version"], "schema_version", "unsupported version " + std::to_string(version));
  }
  Config c;
  c.root = root;
  if (root["seed"]) c.seed = as<std::uint64_t>(root["seed"], "seed");
  if (root["threads"]) c.threads = as<unsigned>(root["threads"], "threads");
  if (!root["model"]) throw ConfigError("model: missing required key");
  c.model = parse_model(root["model"]);
  if (const YAML::Node t = root["thresholds"]) {
    check_map(t, "thresholds", {"z", "ks_level"});
    c.thresholds.z = get<double>(t, "z", "thresholds", c.thresholds.z);
    c.thresholds.ks_level = get<double>(t, "ks_level", "thresholds", c.thresholds.ks_level);
  }
  c.euler.points = {{0.0, 1.0}, {0.0, 2.0}, {1.0, 0.0}, {2.0, 0.0}};
  c.diffusive.independence_pairs = default_independence_pairs();
  if (root["lln"]) parse_lln(root["lln"], c.lln);
  if (root["euler"]) parse_euler(root["euler"], c.euler);
  if (root["diffusive"]) parse_diffusive(root["diffusive"], c.diffusive);
  if (root["stationarity"]) parse_stationarity(root["stationarity"], c.stationarity);
  if (root["ghd"]) parse_ghd(root["ghd"], c.ghd);
  if (root["field"]) parse_field(root["field"], c.field);
  if (root["hardrod"]) parse_hardrod(root["hardrod"], c.hardrod);
  return c;
}

/// Applies `key.path=value`; the value is read as YAML.
inline void apply_override(YAML::Node& root, const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + spec + "' is not key=value");
  std::vector<std::string> parts;
  std::string key = spec.substr(0, eq);
  std::size_t start = 0;
  for (;;) {
    const auto dot = key.find('.', start);
    parts.push_back(key.substr(start, dot - start));
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  YAML::Node value;
  try {
    value = YAML::Load(spec.substr(eq + 1));
  } catch (const YAML::Exception& e) {
    throw ConfigError("override '" + spec + "': " + e.what());
  }
  YAML::Node node = root;
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    if (parts[i].empty()) throw ConfigError("override '" + spec + "' has an empty key");
    YAML::Node child = node[parts[i]];
    if (!child.IsDefined() || child.IsNull()) child = YAML::Node(YAML::NodeType::Map);
    if (!child.IsMap()) throw ConfigError("override '" + spec + "': " + parts[i] + " is not a mapping");
    node[parts[i]] = child;
    node.reset(child);
  }
  node[parts.back()] = value;
}

/// Key-sorted JSON rendering of a YAML tree, scalars kept as strings.
inline nlohmann::json canonical(const YAML::Node& n) {
  switch (n.Type()) {
    case YAML::NodeType::Map: {
      nlohmann::json j = nlohmann::json::object();
      for (const auto& kv : n) j[kv.first.as<std::string>()] = canonical(kv.second);
      return j;
    }
    case YAML::NodeType::Sequence: {
      nlohmann::json j = nlohmann::json::array();
      for (const auto& e : n) j.push_back(canonical(e));
      return j;
    }
    case YAML::NodeType::Scalar:
      return n.Scalar();
    default:
      return nullptr;
  }
}

/// FNV-1a, 64 bit.
inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Hash of the configuration with seed and threads removed.
inline std::string config_hash(const YAML::Node& root) {
  nlohmann::json j = canonical(root);
  if (j.is_object()) {
    j.erase("seed");
    j.erase("threads");
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(j.dump())));
  return buf;
}

}  // namespace hrfl::cli
