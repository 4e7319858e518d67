// Copyright 2026 The musclearm Authors.
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

#include "musclearm/dispatch.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

namespace musclearm {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "musclearm_dispatch_test" / name;
  fs::remove_all(p);
  return p;
}

const char* kShortRun =
    "[experiment]\n"
    "name = short\n"
    "iterations = 2\n"
    "repetitions = 2\n"
    "seed = 5\n"
    "[controller]\n"
    "learning_lead = 50\n"
    "probe_settle = 1\n"
    "[trajectory]\n"
    "amplitude = 0.03\n"
    "duration = 1.5\n"
    "[disturbance]\n"
    "noise_amplitude = 0.02\n"
    "sweep_fractions = 0, 0.1, 0.2\n"
    "[output]\n"
    "log_stride = 50\n";

DispatchOutcome run(const std::string& command, const fs::path& out,
                    std::optional<std::string> text = kShortRun) {
  DispatchOptions o;
  o.command = command;
  o.config_text = std::move(text);
  o.out = out.string();
  o.use_env = false;
  o.quiet = true;
  std::ostringstream log;
  return dispatch(o, log);
}

TEST(Dispatch, CurvesWritesFixedSchema) {
  const fs::path out = scratch("curves");
  const DispatchOutcome r = run("curves", out, std::nullopt);
  ASSERT_EQ(r.exit_code, 0) << r.message;
  const std::string csv = slurp(r.output_dir / "curves.csv");
  EXPECT_NE(csv.find("\nx,fl,fpe,fv,ft\n"), std::string::npos);
  EXPECT_TRUE(fs::exists(r.output_dir / "config.ini"));
  EXPECT_TRUE(fs::exists(r.output_dir / "run_summary.json"));
}

// Same config, including the output directory, run twice.
TEST(Dispatch, IlcSummaryIsByteIdenticalAcrossRuns) {
  const fs::path out = scratch("ilc");
  const DispatchOutcome a = run("ilc", out);
  ASSERT_EQ(a.exit_code, 0) << a.message;
  const std::string sa = slurp(a.output_dir / "run_summary.json");
  const std::string la = slurp(a.output_dir / "ilc" / "iter_2.csv");
  fs::remove_all(out);
  const DispatchOutcome b = run("ilc", out);
  ASSERT_EQ(b.exit_code, 0) << b.message;
  EXPECT_FALSE(sa.empty());
  EXPECT_EQ(sa, slurp(b.output_dir / "run_summary.json"));
  EXPECT_EQ(la, slurp(b.output_dir / "ilc" / "iter_2.csv"));
  const auto j = nlohmann::json::parse(sa);
  EXPECT_EQ(j["seed"], 5);
  EXPECT_EQ(j["command"], "ilc");
  EXPECT_EQ(j.dump().find("time"), std::string::npos);
}

TEST(Dispatch, SeedFlagChangesNoisyRun) {
  DispatchOptions o;
  o.command = "simulate";
  o.config_text = kShortRun;
  o.use_env = false;
  o.quiet = true;
  std::ostringstream log;
  o.out = scratch("seed_a").string();
  const DispatchOutcome a = dispatch(o, log);
  o.out = scratch("seed_b").string();
  o.seed = 6;
  const DispatchOutcome b = dispatch(o, log);
  ASSERT_EQ(a.exit_code, 0) << a.message;
  ASSERT_EQ(b.exit_code, 0) << b.message;
  EXPECT_NE(slurp(a.output_dir / "simulate_hold" / "iter_1.csv"),
            slurp(b.output_dir / "simulate_hold" / "iter_1.csv"));
}

TEST(Dispatch, SweepFansOutOneDirectoryPerFraction) {
  const DispatchOutcome r = run("sweep", scratch("sweep"));
  ASSERT_EQ(r.exit_code, 0) << r.message;
  int loads = 0;
  for (const auto& e : fs::directory_iterator(r.output_dir)) {
    if (!e.is_directory()) continue;
    const std::string name = e.path().filename().string();
    if (name.rfind("load_", 0) != 0) continue;
    ++loads;
    EXPECT_TRUE(fs::exists(e.path() / "config.ini")) << name;
    EXPECT_TRUE(fs::exists(e.path() / "rep_1.csv")) << name;
    EXPECT_TRUE(fs::exists(e.path() / "rep_2.csv")) << name;
  }
  EXPECT_EQ(loads, 3);
  EXPECT_TRUE(fs::exists(r.output_dir / "sweep.csv"));
}

TEST(Dispatch, EveryConditionHoldsItsConfig) {
  const DispatchOutcome r = run("compare", scratch("compare"),
                                std::string(kShortRun) +
                                    "[pid]\nkp = 400\nki = 6400\nkd = 40\n");
  ASSERT_EQ(r.exit_code, 0) << r.message;
  const std::string top = slurp(r.output_dir / "config.ini");
  for (const auto& e : fs::directory_iterator(r.output_dir)) {
    if (e.is_directory()) EXPECT_EQ(slurp(e.path() / "config.ini"), top);
  }
}

TEST(Dispatch, ErrorsAreMachineReadable) {
  DispatchOutcome r = run("frobnicate", scratch("bad_cmd"));
  EXPECT_EQ(r.exit_code, 2);
  auto j = nlohmann::json::parse(r.message);
  EXPECT_TRUE(j.contains("error"));

  r = run("ilc", scratch("bad_cfg"), "[muscle]\nt_act = -1\n");
  EXPECT_EQ(r.exit_code, 2);
  j = nlohmann::json::parse(r.message);
  EXPECT_EQ(j["error"]["field"], "muscle.t_act");
  EXPECT_EQ(j["error"]["line"], 2);

  DispatchOptions o;
  o.command = "curves";
  o.config_path = (scratch("missing_cfg") / "cfg.ini").string();
  o.quiet = true;
  std::ostringstream log;
  EXPECT_EQ(dispatch(o, log).exit_code, 4);
}

}  // namespace
}  // namespace musclearm
