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

#include "musclearm/io.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "musclearm/errors.h"

namespace musclearm {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "musclearm_io_test" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(Csv, RoundTripWithSchemaLine) {
  const fs::path dir = scratch("roundtrip");
  const std::vector<std::vector<double>> rows = {{0.1, 1e-300, -2.5}, {1.0 / 3.0, 0.0, 7.0}};
  write_csv(dir / "a.csv", "demo", {"x", "y", "z"}, rows);
  std::vector<std::string> header;
  std::string schema;
  EXPECT_EQ(read_csv(dir / "a.csv", &header, &schema), rows);
  EXPECT_EQ(header, (std::vector<std::string>{"x", "y", "z"}));
  EXPECT_EQ(schema, "demo");
  const std::string text = slurp(dir / "a.csv");
  EXPECT_EQ(text.rfind("# musclearm-csv v1 demo\n", 0), 0u);
  EXPECT_EQ(text.find('\r'), std::string::npos);
}

TEST(Csv, NumberFormat) {
  EXPECT_EQ(format_number(0.5), "0.5");
  EXPECT_EQ(format_number(-2.0), "-2");
  EXPECT_EQ(std::stod(format_number(0.1 + 0.2)), 0.1 + 0.2);
}

TEST(Csv, CurvesHeaderAndAnchors) {
  const fs::path dir = scratch("curves");
  const MuscleParams p;
  write_curves_csv(dir / "curves.csv", p);
  std::vector<std::string> header;
  const auto rows = read_csv(dir / "curves.csv", &header);
  EXPECT_EQ(header, (std::vector<std::string>{"x", "fl", "fpe", "fv", "ft"}));
  bool saw_one = false;
  for (const auto& r : rows) {
    if (std::abs(r[0] - 1.0) < 1e-12) {
      saw_one = true;
      EXPECT_NEAR(r[1], 1.0, 1e-9);
      EXPECT_NEAR(r[2], 0.0, 1e-9);
      EXPECT_NEAR(r[3], force_velocity(0.0), 1e-9);
      EXPECT_NEAR(r[4], 0.0, 1e-9);
    }
  }
  EXPECT_TRUE(saw_one);
  EXPECT_NE(slurp(dir / "curves.csv").find("x,fl,fpe,fv,ft\n"), std::string::npos);
}

TEST(Csv, WriteFailureIsIoError) {
  // A regular file in place of the parent directory.
  const fs::path dir = scratch("blocked");
  std::ofstream(dir / "plain") << "x";
  EXPECT_THROW(write_csv(dir / "plain" / "a.csv", "demo", {"x"}, {{1.0}}), IoError);
  EXPECT_THROW(read_csv(dir / "missing.csv"), IoError);
}

TEST(Csv, TrialLogColumns) {
  TrialLog log;
  log.y_d = Eigen::MatrixXd::Zero(2, 4);
  log.y = Eigen::MatrixXd::Constant(2, 4, 0.003);
  log.q = Eigen::MatrixXd::Zero(2, 4);
  log.qdot = Eigen::MatrixXd::Zero(2, 4);
  log.commands = Eigen::MatrixXd::Constant(2, 3, 0.5);
  log.activations = Eigen::MatrixXd::Constant(4, 3, 0.5);
  log.forces = Eigen::MatrixXd::Constant(4, 3, 10.0);
  log.l_mtu = Eigen::MatrixXd::Zero(4, 4);
  log.l_desired = Eigen::MatrixXd::Zero(4, 4);
  log.ticks_completed = 3;
  const fs::path dir = scratch("trial");
  write_trial_csv(dir / "iter_1.csv", log, 2);
  std::vector<std::string> header;
  const auto rows = read_csv(dir / "iter_1.csv", &header);
  EXPECT_EQ(header.front(), "t");
  EXPECT_EQ(header.back(), "err_mm");
  EXPECT_NE(std::find(header.begin(), header.end(), "qdot1"), header.end());
  ASSERT_EQ(rows.size(), 3u);  // ticks 0, 2 and the last completed one
  EXPECT_NEAR(rows[0].back(), 3.0 * std::sqrt(2.0), 1e-9);
}

TEST(ConfigCopy, WritesCanonicalText) {
  const fs::path dir = scratch("cfg");
  ExperimentConfig c;
  c.experiment.name = "copy";
  write_config_copy(dir, c);
  EXPECT_EQ(slurp(dir / "config.ini"), serialize_config(c));
}

}  // namespace
}  // namespace musclearm
