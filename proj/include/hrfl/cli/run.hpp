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

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "hrfl/cli/config.hpp"
#include "hrfl/field.hpp"
#include "hrfl/gaussian.hpp"
#include "hrfl/hardrod.hpp"
#include "hrfl/hydro.hpp"
#include "hrfl/io.hpp"
#include "hrfl/sampler.hpp"
#include "hrfl/stats.hpp"

namespace hrfl::cli {

enum ExitCode : int {
  kPass = 0,
  kStatisticalFailure = 1,
  kConfigError = 2,
  kNumericalError = 3,
};

inline constexpr std::uint64_t kDefaultSeed = 20260101;

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> c{"sample-field", "hardrod-evolve",   "verify-lln",  "verify-euler-clt",
                                          "verify-diffusive", "ghd-residual", "stationarity"};
  return c;
}

/// --seed, then the config, then HRFL_SEED, then the built-in default.
inline std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, std::optional<std::uint64_t> config) {
  if (flag) return *flag;
  if (config) return *config;
  if (const char* env = std::getenv("HRFL_SEED")) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(env, &used, 10);
      if (used != std::string(env).size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw ConfigError(std::string("HRFL_SEED is not an unsigned integer: ") + env);
    }
  }
  return kDefaultSeed;
}

struct RunContext {
  Config config;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::filesystem::path dir;
};

namespace detail {

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw Error("cannot write " + p.string());
  os << text;
}

inline ExperimentReport sample_field_run(const RunContext& ctx) {
  const auto& f = ctx.config.field;
  const auto& m = ctx.config.model;
  ExperimentReport rep;
  rep.experiment = "sample_field";
  rep.model = m.describe();
  rep.epsilon = {f.epsilon};
  rep.M = 1;
  std::vector<double> xs(f.nx);
  for (std::size_t i = 0; i < f.nx; ++i) {
    xs[i] = f.nx == 1 ? f.x.lo : f.x.lo + (f.x.hi - f.x.lo) * static_cast<double>(i) / static_cast<double>(f.nx - 1);
  }
  std::vector<SpaceTimePoint> corners{kOrigin, {f.x.lo, 0.0}, {f.x.hi, 0.0}};
  for (double t : f.times) {
    corners.push_back({f.x.lo, t});
    corners.push_back({f.x.hi, t});
  }
  const auto cfg = sample(m, f.epsilon, ObservationRegion::bounding(corners), ctx.seed,
                          static_cast<std::uint64_t>(StreamTag::kSampler));
  std::vector<std::vector<double>> values;
  for (double t : f.times) values.push_back(SliceEvaluator(cfg, t).evaluate(xs));
  {
    auto os = io::open_output((ctx.dir / "configuration.csv").string());
    io::write_configuration(os, cfg);
  }
  {
    auto os = io::open_output((ctx.dir / "surface.csv").string());
    io::write_surface(os, xs, f.times, values);
  }
  rep.add({"point_count", static_cast<double>(cfg.points.size()), std::sqrt(cfg.expected_count), cfg.expected_count,
           cfg.expected_count > 0 ? (static_cast<double>(cfg.points.size()) - cfg.expected_count) /
                                        std::sqrt(cfg.expected_count)
                                  : 0.0,
           true});
  if (!f.gaussian_points.empty()) {
    CovarianceSpec spec{m, f.gaussian_points, f.gaussian_mode, f.gaussian_frame, {}};
    const Eigen::MatrixXd cov = covariance_matrix(spec);
    const Eigen::MatrixXd draws = sample_field(spec, f.gaussian_samples, ctx.seed);
    auto os = io::open_output((ctx.dir / "gaussian_samples.csv").string());
    io::write_gaussian_samples(os, draws);
    auto oc = io::open_output((ctx.dir / "gaussian_covariance.csv").string());
    io::write_matrix(oc, cov);
    rep.details["gaussian_samples"] = f.gaussian_samples;
  }
  rep.details["expected_count"] = cfg.expected_count;
  return rep;
}

inline ExperimentReport hardrod_run(const RunContext& ctx) {
  const auto& h = ctx.config.hardrod;
  const auto& m = ctx.config.model;
  ExperimentReport rep;
  rep.experiment = "hardrod_evolve";
  rep.model = m.describe();
  rep.epsilon = {1.0};
  rep.M = 1;
  const ObservationRegion region{h.window, {0.0, 0.0}};
  const auto cfg = sample(m, 1.0, region, ctx.seed, static_cast<std::uint64_t>(StreamTag::kHardRod));
  GasConfiguration gas;
  for (const auto& p : cfg.points) {
    if (h.window.contains(p.x)) gas.push_back(p);
  }
  const RodConfiguration rods = dilate(gas, 0.0);
  std::vector<io::TrajectoryFrame> frames;
  std::size_t collisions = 0;
  bool valid = true;
  for (double t : h.times) {
    RodConfiguration y;
    if (h.engine == "surface") {
      y = evolve_surface(gas, t);
    } else if (h.engine == "events") {
      const auto res = evolve_events_counted(rods, t);
      collisions = std::max(collisions, res.collisions);
      y = res.rods;
    } else {
      y = tagged_frame_evolve(rods, t);
    }
    valid = valid && is_hard_rod_configuration(y, 1e-9);
    frames.push_back({t, std::move(y)});
  }
  auto os = io::open_output((ctx.dir / "trajectories.csv").string());
  io::write_trajectories(os, frames);
  rep.add({"rod_count", static_cast<double>(rods.size()), kNaN, kNaN, kNaN, true});
  rep.add({"disjoint", valid ? 1.0 : 0.0, kNaN, 1.0, kNaN, valid});
  rep.details["engine"] = h.engine;
  if (h.engine == "events") rep.details["collisions"] = collisions;
  return rep;
}

inline ExperimentReport ghd_run(const RunContext& ctx) {
  const auto& g = ctx.config.ghd;
  const auto& m = ctx.config.model;
  ExperimentReport rep;
  rep.experiment = "ghd_residual";
  rep.model = m.describe();
  rep.epsilon = {0.0};
  rep.M = 1;
  GhdGrid grid = g.grid;
  std::vector<GhdResidual> levels;
  for (std::size_t k = 0; k <= g.refinements; ++k) {
    levels.push_back(ghd_residual(m, grid));
    grid.nq = 2 * grid.nq - 1;
    grid.nt = grid.nt > 1 ? 2 * grid.nt - 1 : 1;
  }
  {
    auto os = io::open_output((ctx.dir / "ghd_residual.csv").string());
    io::write_ghd_residual(os, levels.front());
  }
  nlohmann::ordered_json lv = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < levels.size(); ++k) {
    const auto& r = levels[k];
    std::ostringstream tag;
    tag << "(h_q=" << r.h_q << ")";
    const bool l2_ok = !g.max_l2 || r.l2_norm <= *g.max_l2;
    rep.add({"l2_norm" + tag.str(), r.l2_norm, kNaN, g.max_l2 ? *g.max_l2 : kNaN, kNaN, l2_ok});
    rep.add({"max_norm" + tag.str(), r.max_norm, kNaN, kNaN, kNaN, true});
    if (k > 0) {
      const double prev = levels[k - 1].l2_norm;
      const double ratio = r.l2_norm > 0 ? prev / r.l2_norm : kNaN;
      const bool exact = prev == 0.0 && r.l2_norm == 0.0;
      rep.add({"l2_ratio" + tag.str(), ratio, kNaN, 4.0, kNaN,
               exact || (ratio >= g.ratio.lo && ratio <= g.ratio.hi)});
    }
    nlohmann::ordered_json e;
    e["h_q"] = r.h_q;
    e["h_t"] = r.h_t;
    e["evaluated"] = r.evaluated;
    e["excluded"] = r.excluded;
    e["warnings"] = r.warnings;
    lv.push_back(std::move(e));
  }
  rep.details["levels"] = std::move(lv);
  rep.details["stencil_order"] = g.grid.stencil_order;
  return rep;
}

inline ExperimentReport dispatch(const std::string& command, const RunContext& ctx) {
  const Config& c = ctx.config;
  const bool rods = command == "hardrod-evolve" || command == "stationarity" || command == "ghd-residual";
  if (rods && c.model.has_negative_marks()) {
    throw ConfigError("model: negative marks cannot be used as hard-rod lengths (" + command + ")");
  }
  if (command == "sample-field") return sample_field_run(ctx);
  if (command == "hardrod-evolve") return hardrod_run(ctx);
  if (command == "verify-lln") return lln_test(c.model, c.lln, ctx.seed, ctx.threads, c.thresholds);
  if (command == "verify-euler-clt") return euler_fluctuation_test(c.model, c.euler, ctx.seed, ctx.threads, c.thresholds);
  if (command == "verify-diffusive") return diffusive_test(c.model, c.diffusive, ctx.seed, ctx.threads, c.thresholds);
  if (command == "ghd-residual") return ghd_run(ctx);
  if (command == "stationarity") {
    return stationarity_smoke_test(c.model, c.stationarity, ctx.seed, ctx.threads, c.thresholds);
  }
  throw ConfigError("unknown command " + command);
}

}  // namespace detail

/**
 * Entry point of the hrfl tool. Writes report.json, and any dumps, to
 * <out>/<config hash>-s<seed>/ and returns the exit code.
 */
inline int run(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"hrfl: walk fields, hard rods and their fluctuation tests"};
  std::string command;
  std::string config_path;
  std::optional<std::uint64_t> seed_flag;
  std::string out_dir = "out";
  std::optional<unsigned> threads_flag;
  std::vector<std::string> overrides;
  app.add_option("command", command, "Experiment to run")->required()->check(CLI::IsMember(commands()));
  app.add_option("--config", config_path, "YAML configuration file")->required();
  app.add_option("--seed", seed_flag, "Experiment seed (overrides config and HRFL_SEED)");
  app.add_option("--out", out_dir, "Output root directory");
  app.add_option("--threads", threads_flag, "Worker threads (0 = all cores)");
  app.add_option("--override", overrides, "key.path=value, repeatable")->take_all();
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kConfigError;
  }

  RunContext ctx;
  try {
    YAML::Node root;
    try {
      root = YAML::LoadFile(config_path);
    } catch (const YAML::BadFile&) {
      throw ConfigError("cannot read config file " + config_path);
    } catch (const YAML::ParserException& e) {
      throw ConfigError(config_path + ": " + e.what());
    }
    for (const auto& o : overrides) apply_override(root, o);
    ctx.config = parse_config(root);
    ctx.seed = resolve_seed(seed_flag, ctx.config.seed);
    ctx.threads = threads_flag ? *threads_flag : ctx.config.threads.value_or(0);
    ctx.dir = std::filesystem::path(out_dir) / (config_hash(root) + "-s" + std::to_string(ctx.seed));
    std::filesystem::create_directories(ctx.dir);
    YAML::Emitter em;
    em << root;
    detail::write_text(ctx.dir / "config.yaml", std::string(em.c_str()) + "\n");

    const ExperimentReport rep = detail::dispatch(command, ctx);
    nlohmann::ordered_json j = to_json(rep);
    j["seed"] = ctx.seed;
    j["thresholds"] = {{"z", ctx.config.thresholds.z}, {"ks_level", ctx.config.thresholds.ks_level}};
    detail::write_text(ctx.dir / "report.json", j.dump(2) + "\n");
    out << command << ": " << (rep.verdict ? "pass" : "fail") << " (" << (ctx.dir / "report.json").string() << ")\n";
    return rep.verdict ? kPass : kStatisticalFailure;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const DomainError& e) {
    err << "invalid input: " << e.what() << "\n";
    return kConfigError;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return kNumericalError;
  } catch (const InvariantError& e) {
    err << "invariant violated: " << e.what() << "\n";
    return kNumericalError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kNumericalError;
  }
}

}  // namespace hrfl::cli
