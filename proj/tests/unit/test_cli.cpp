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
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hrfl/cli/run.hpp"
#include "json.hpp"

namespace hrfl::cli {
namespace {

namespace fs = std::filesystem;

const std::string kConfigs = HRFL_CONFIG_DIR;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "hrfl");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out;
  std::ostringstream err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::path(::testing::TempDir()) / ("hrfl_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

/// The single run directory under an output root.
fs::path run_dir(const fs::path& root) {
  std::vector<fs::path> dirs;
  for (const auto& e : fs::directory_iterator(root)) dirs.push_back(e.path());
  EXPECT_EQ(dirs.size(), 1u);
  return dirs.empty() ? root : dirs.front();
}

TEST(Cli, EmptyModelGivesAllZeroReport) {
  const fs::path out = scratch("empty");
  const Result r = invoke({"verify-lln", "--config", kConfigs + "/empty_model.yaml", "--out", out.string(),
                           "--seed", "3"});
  EXPECT_EQ(r.code, kPass) << r.err;
  const fs::path dir = run_dir(out);
  EXPECT_NE(dir.filename().string().find("-s3"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "config.yaml"));
  const auto j = nlohmann::json::parse(slurp(dir / "report.json"));
  EXPECT_EQ(j["verdict"], "pass");
  EXPECT_EQ(j["seed"], 3);
  for (const auto& s : j["statistics"]) {
    if (s["name"].get<std::string>().find("slope") == std::string::npos) {
      EXPECT_EQ(s["mean"], 0.0) << s["name"];
    }
  }
}

TEST(Cli, GaussianVelocityNeedsSupport) {
  const fs::path out = scratch("support");
  const Result r = invoke({"verify-lln", "--config", kConfigs + "/empty_model.yaml", "--out", out.string(),
                           "--override", "model.kernel.velocity={type: gaussian, mean: 0.0, sd: 1.0}"});
  EXPECT_EQ(r.code, kConfigError);
  EXPECT_NE(r.err.find("v_support"), std::string::npos) << r.err;
  const Result with = invoke({"sample-field", "--config", kConfigs + "/sample_field.yaml", "--out", out.string(),
                              "--override", "model.v_support=", "--override", "field.nx=5"});
  EXPECT_EQ(with.code, kConfigError);
  EXPECT_NE(with.err.find("v_support"), std::string::npos) << with.err;
}

TEST(Cli, ConfigErrorsAreLineAnchored) {
  const fs::path dir = scratch("bad");
  {
    std::ofstream f(dir / "unknown.yaml");
    f << "schema_version: 1\nmodel:\n  density: {type: constant, value: 1.0}\n  kernel:\n"
         "    velocity: {type: uniform, lo: -1, hi: 1}\n  colour: red\n";
  }
  const Result r = invoke({"verify-lln", "--config", (dir / "unknown.yaml").string(), "--out", dir.string()});
  EXPECT_EQ(r.code, kConfigError);
  EXPECT_NE(r.err.find("colour"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("line 6"), std::string::npos) << r.err;
  {
    std::ofstream f(dir / "broken.yaml");
    f << "schema_version: 1\nmodel: [\n";
  }
  EXPECT_EQ(invoke({"verify-lln", "--config", (dir / "broken.yaml").string()}).code, kConfigError);
  {
    std::ofstream f(dir / "version.yaml");
    f << "schema_version: 2\nmodel: {density: {type: constant, value: 1.0}}\n";
  }
  EXPECT_EQ(invoke({"verify-lln", "--config", (dir / "version.yaml").string()}).code, kConfigError);
  EXPECT_EQ(invoke({"no-such-command", "--config", kConfigs + "/empty_model.yaml"}).code, kConfigError);
  EXPECT_EQ(invoke({"verify-lln", "--config", (dir / "missing.yaml").string()}).code, kConfigError);
  EXPECT_EQ(invoke({"verify-lln"}).code, kConfigError);
}

TEST(Cli, NegativeMarksAreRejectedForHardRods) {
  const fs::path out = scratch("negative");
  const Result r = invoke({"hardrod-evolve", "--config", kConfigs + "/hardrod_events.yaml", "--out", out.string(),
                           "--override", "model.signed_marks=true", "--override",
                           "model.kernel.mark={type: uniform, lo: -0.5, hi: 0.5}"});
  EXPECT_EQ(r.code, kConfigError) << r.err;
}

TEST(Cli, StatisticalFailureExitCode) {
  const fs::path out = scratch("fail");
  const Result r = invoke({"stationarity", "--config", kConfigs + "/stationarity_negative_control.yaml", "--out",
                           out.string(), "--override", "stationarity.M=40"});
  EXPECT_EQ(r.code, kStatisticalFailure) << r.err;
  const auto j = nlohmann::json::parse(slurp(run_dir(out) / "report.json"));
  EXPECT_EQ(j["verdict"], "fail");
}

TEST(Cli, ReportsAreByteIdenticalAcrossThreadCounts) {
  const fs::path a = scratch("threads1");
  const fs::path b = scratch("threads8");
  const std::vector<std::string> common{"--config", kConfigs + "/reference_lln.yaml", "--override", "lln.M=60",
                                        "--seed", "11"};
  auto args = [&](const fs::path& out, const char* threads) {
    std::vector<std::string> v{"verify-lln"};
    v.insert(v.end(), common.begin(), common.end());
    v.insert(v.end(), {"--out", out.string(), "--threads", threads});
    return v;
  };
  ASSERT_EQ(invoke(args(a, "1")).code, kPass);
  ASSERT_EQ(invoke(args(b, "8")).code, kPass);
  EXPECT_EQ(run_dir(a).filename(), run_dir(b).filename());
  EXPECT_EQ(slurp(run_dir(a) / "report.json"), slurp(run_dir(b) / "report.json"));
}

TEST(Config, HashIgnoresSeedThreadsAndKeyOrder) {
  const YAML::Node a = YAML::Load("schema_version: 1\nseed: 4\nthreads: 2\nmodel: {a: 1, b: [1, 2]}\n");
  const YAML::Node b = YAML::Load("model: {b: [1, 2], a: 1}\nschema_version: 1\n");
  const YAML::Node c = YAML::Load("model: {b: [1, 3], a: 1}\nschema_version: 1\n");
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_NE(config_hash(a), config_hash(c));
  EXPECT_EQ(config_hash(a).size(), 16u);
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(Config, Overrides) {
  YAML::Node root = YAML::Load(
      "schema_version: 1\nmodel: {density: {type: constant, value: 1.0}, kernel: {velocity: {type: uniform, lo: -1, hi: "
      "1}}}\n");
  apply_override(root, "model.density.value=2.5");
  apply_override(root, "lln.epsilons=[0.1, 0.01]");
  apply_override(root, "euler.points=[[0, 1]]");
  EXPECT_EQ(root["model"]["density"]["value"].as<double>(), 2.5);
  EXPECT_EQ(root["lln"]["epsilons"].size(), 2u);
  const Config c = parse_config(root);
  EXPECT_EQ(c.lln.epsilons, (std::vector<double>{0.1, 0.01}));
  ASSERT_EQ(c.euler.points.size(), 1u);
  EXPECT_EQ(c.euler.points[0], (SpaceTimePoint{0, 1}));
  EXPECT_THROW(apply_override(root, "novalue"), ConfigError);
  EXPECT_THROW(apply_override(root, "model.density.value.deeper=1"), ConfigError);
}

TEST(Config, SeedPrecedence) {
  ::unsetenv("HRFL_SEED");
  EXPECT_EQ(resolve_seed(std::nullopt, std::nullopt), kDefaultSeed);
  ::setenv("HRFL_SEED", "77", 1);
  EXPECT_EQ(resolve_seed(std::nullopt, std::nullopt), 77u);
  EXPECT_EQ(resolve_seed(std::nullopt, 5), 5u);
  EXPECT_EQ(resolve_seed(9, 5), 9u);
  ::setenv("HRFL_SEED", "12x", 1);
  EXPECT_THROW((void)resolve_seed(std::nullopt, std::nullopt), ConfigError);
  ::unsetenv("HRFL_SEED");
}

TEST(Cli, ToolExitCodes) {
  const std::string tool = HRFL_TOOL_PATH;
  const int bad = std::system((tool + " no-such-command --config x.yaml >/dev/null 2>&1").c_str());
  ASSERT_TRUE(WIFEXITED(bad));
  EXPECT_EQ(WEXITSTATUS(bad), kConfigError);
  const fs::path out = scratch("tool");
  const int ok = std::system((tool + " verify-lln --config " + kConfigs + "/empty_model.yaml --out " + out.string() +
                              " >/dev/null 2>&1")
                                 .c_str());
  ASSERT_TRUE(WIFEXITED(ok));
  EXPECT_EQ(WEXITSTATUS(ok), kPass);
}

}  // namespace
}  // namespace hrfl::cli
