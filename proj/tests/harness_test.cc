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

#include "musclearm/harness.h"

#include <cmath>
#include <vector>

#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include "musclearm/errors.h"
#include "musclearm/presets.h"

namespace musclearm {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Short benchmark so that learning tests stay fast.
const Benchmark& short_bench() {
  static const Benchmark b = [] {
    TrajectorySpec s;
    s.duration = 4.0;
    s.amplitude = 0.05;
    return make_benchmark(make_preset(kPlanar2x4), s, 1e-3);
  }();
  return b;
}

IlcSettings short_settings(int iterations) {
  IlcSettings s;
  s.iterations = iterations;
  s.params.learning_lead = 100;
  s.probe_settle = 2.0;
  return s;
}

TEST(Metrics, HandValues) {
  const TrialMetrics m = metrics_from_errors_mm({3.0, 4.0});
  EXPECT_DOUBLE_EQ(m.mean_abs_mm, 3.5);
  EXPECT_DOUBLE_EQ(m.mse_mm2, 12.5);
  EXPECT_DOUBLE_EQ(m.std_mm, 0.5);
  EXPECT_DOUBLE_EQ(m.max_mm, 4.0);
  EXPECT_EQ(m.samples, 2u);
}

TEST(Metrics, ConstantAndZero) {
  const TrialMetrics c = metrics_from_errors_mm({2.5, 2.5, 2.5});
  EXPECT_DOUBLE_EQ(c.mean_abs_mm, 2.5);
  EXPECT_DOUBLE_EQ(c.mse_mm2, 6.25);
  EXPECT_DOUBLE_EQ(c.std_mm, 0.0);
  const TrialMetrics z = metrics_from_errors_mm({0.0, 0.0});
  EXPECT_EQ(z.mean_abs_mm, 0.0);
  EXPECT_EQ(z.mse_mm2, 0.0);
  EXPECT_EQ(z.std_mm, 0.0);
  EXPECT_THROW(metrics_from_errors_mm({}), DomainError);
  EXPECT_THROW(compute_metrics(TrialLog{}), DomainError);
}

TEST(CommandMap, AntagonistComplement) {
  const Benchmark& b = short_bench();
  const VectorXd exc = b.command_map.excitations(b.model, VectorXd::Constant(2, 0.5));
  EXPECT_LT((exc - VectorXd::Constant(4, 0.5)).cwiseAbs().maxCoeff(), 1e-15);
  const VectorXd e2 = b.command_map.excitations(b.model, (VectorXd(2) << 0.8, 0.0).finished());
  for (int i = 0; i < b.model.n_muscles(); ++i) {
    EXPECT_GE(e2(i), b.model.muscles[i].a_min);
    EXPECT_LE(e2(i), 1.0);
  }
  // Flexor and extensor of joint 0 receive complementary excitations.
  EXPECT_NEAR(e2(0) + e2(1), 1.0, 1e-12);
}

TEST(Disturbance, Validation) {
  DisturbanceSpec d;
  d.load_fraction = 0.6;
  EXPECT_THROW(d.validate(), DomainError);
  d = DisturbanceSpec{};
  d.noise_amplitude = -0.1;
  EXPECT_THROW(d.validate(), DomainError);
}

TEST(Benchmark, StartsAtRestOnTrajectoryStart) {
  const Benchmark& b = short_bench();
  EXPECT_LT((forward_kinematics(b.model, b.start.q) - b.y_d.col(0)).norm(), 1e-9);
  EXPECT_EQ(b.start.qdot, VectorXd::Zero(2));
  EXPECT_EQ(b.horizon(), 4000);
}

// With the holding command the arm stays at the start, so the error is the
// excursion of the desired path from its starting point.
TEST(RunTrial, OpenLoopNullTrial) {
  const Benchmark& b = short_bench();
  ConstantController hold(b.u_bias);
  const TrialLog log = run_trial(b, hold, {}, 0);
  ASSERT_FALSE(log.diverged);
  for (int t = 0; t <= b.horizon(); t += 50) {
    const double err = (log.y_d.col(t) - log.y.col(t)).norm();
    const double excursion = (b.y_d.col(t) - b.y_d.col(0)).norm();
    ASSERT_NEAR(err, excursion, 1e-6) << t;
  }
}

TEST(RunTrial, ZeroGainPidIsNullTrial) {
  const Benchmark& b = short_bench();
  ConstantController hold(b.u_bias);
  const TrialLog a = run_trial(b, hold, {}, 0);
  const TrialLog p = pid_baseline(b, PidGains{});
  EXPECT_LT((a.y - p.y).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(PidController, ZeroErrorGivesNeutralCommand) {
  const Benchmark& b = short_bench();
  PidController pid(b, PidGains{800.0, 51200.0, 80.0});
  pid.begin();
  const VectorXd y = b.y_d.col(0);
  const VectorXd u = pid.control(0, y, y, b.y_d.col(1));
  EXPECT_LT((u - b.u_bias).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(RunTrial, SameSeedSameLog) {
  const Benchmark& b = short_bench();
  DisturbanceSpec noise;
  noise.noise_amplitude = 0.05;
  ConstantController hold(b.u_bias);
  const TrialLog a = run_trial(b, hold, noise, 17);
  const TrialLog c = run_trial(b, hold, noise, 17);
  const TrialLog d = run_trial(b, hold, noise, 18);
  EXPECT_EQ(a.y, c.y);
  EXPECT_EQ(a.forces, c.forces);
  EXPECT_EQ(a.activations, c.activations);
  EXPECT_NE(a.y, d.y);
}

TEST(RunTrial, LogsAreFiniteAndForcesNonNegative) {
  const Benchmark& b = short_bench();
  PidController pid(b, PidGains{800.0, 51200.0, 80.0});
  const TrialLog log = run_trial(b, pid, {}, 0);
  ASSERT_FALSE(log.diverged);
  EXPECT_TRUE(log.y.allFinite());
  EXPECT_TRUE(log.forces.allFinite());
  EXPECT_GE(log.forces.minCoeff(), 0.0);
  EXPECT_GE(log.commands.minCoeff(), 0.0);
  EXPECT_LE(log.commands.maxCoeff(), 1.0);
  EXPECT_EQ(log.ticks_completed, b.horizon());
}

TEST(RunTrial, DivergenceIsRecordedNotThrown) {
  const Benchmark& b = short_bench();
  ConstantController push(VectorXd::Constant(2, 1.0));
  const TrialLog log = run_trial(b, push, {}, 0, 0.01);
  EXPECT_TRUE(log.diverged);
  EXPECT_FALSE(log.failure.empty());
  EXPECT_LT(log.ticks_completed, b.horizon());
}

TEST(RunIlc, SingleIterationSummaryIsThatTrial) {
  const Benchmark& b = short_bench();
  TrialMetrics seen;
  const IlcResult r = run_ilc(b, short_settings(1), {}, 0,
                              [&](int, const TrialLog& log, const DdilcController&) {
                                seen = compute_metrics(log);
                              });
  ASSERT_EQ(r.iterations.size(), 1u);
  EXPECT_EQ(r.iterations[0].metrics.mean_abs_mm, seen.mean_abs_mm);
  EXPECT_EQ(r.iterations[0].metrics.mse_mm2, seen.mse_mm2);
}

class LearnedShortRun : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    result_ = new IlcResult(run_ilc(short_bench(), short_settings(12), {}, 0));
  }
  static void TearDownTestSuite() {
    delete result_;
    result_ = nullptr;
  }
  static IlcResult* result_;
};
IlcResult* LearnedShortRun::result_ = nullptr;

TEST_F(LearnedShortRun, ErrorDecreases) {
  const auto& it = result_->iterations;
  ASSERT_EQ(it.size(), 12u);
  EXPECT_LT(it.back().metrics.mean_abs_mm, 0.5 * it.front().metrics.mean_abs_mm);
  for (const IterationRecord& r : it) EXPECT_FALSE(r.diverged);
}

TEST_F(LearnedShortRun, ControlsSaturated) {
  EXPECT_GE(result_->final_commands.minCoeff(), 0.0);
  EXPECT_LE(result_->final_commands.maxCoeff(), 1.0);
}

TEST_F(LearnedShortRun, ReplayReproducesLastIteration) {
  ReplayController replay(result_->final_commands);
  const TrialLog log = run_trial(short_bench(), replay, {}, 0);
  const double last = result_->iterations.back().metrics.mean_abs_mm;
  EXPECT_NEAR(compute_metrics(log).mean_abs_mm, last, 0.02 * last);
}

TEST_F(LearnedShortRun, SweepStartsAtReplayAndGrowsWithLoad) {
  const std::vector<SweepRow> rows = disturbance_sweep(
      short_bench(), result_->final_commands, {0.0, 0.1, 0.2}, {}, 2, 0);
  ASSERT_EQ(rows.size(), 3u);
  const double last = result_->iterations.back().metrics.mean_abs_mm;
  EXPECT_NEAR(rows[0].mean_abs_mm, last, 0.02 * last);
  EXPECT_EQ(rows[0].std_over_reps_mm, 0.0);
  EXPECT_TRUE(non_decreasing(rows));
  for (const SweepRow& r : rows) EXPECT_FALSE(r.diverged);
  EXPECT_DOUBLE_EQ(rows[2].load_kg, 0.5);
}

TEST(NonDecreasing, Tolerance) {
  std::vector<SweepRow> rows(3);
  rows[0].mean_abs_mm = 1.0;
  rows[1].mean_abs_mm = 0.99;
  rows[2].mean_abs_mm = 2.0;
  EXPECT_FALSE(non_decreasing(rows));
  EXPECT_TRUE(non_decreasing(rows, 0.02));
}

TEST(Lowpass, ZeroNoiseIsUndefined) {
  const LowpassResult r = lowpass_response(MuscleParams{}, 0.5, 0.0, 10.0);
  EXPECT_FALSE(r.activation_gain_db.has_value());
  EXPECT_FALSE(r.force_gain_db.has_value());
}

TEST(Lowpass, HighBandAttenuatedMore) {
  const LowpassComparison c =
      lowpass_attenuation_test(MuscleParams{}, 0.5, 0.1, 1.0, 50.0);
  ASSERT_TRUE(c.force_extra_attenuation_db.has_value());
  ASSERT_TRUE(c.activation_extra_attenuation_db.has_value());
  EXPECT_GT(*c.force_extra_attenuation_db, 0.0);
  EXPECT_GT(*c.activation_extra_attenuation_db, 0.0);
}

TEST(Lowpass, FirstOrderOracle) {
  const double tau = 0.02;
  // Far above the corner each decade costs 20 dB.
  const double d = first_order_attenuation_db(tau, 100.0, 1000.0);
  EXPECT_NEAR(d, 20.0, 0.05);
  const double exact = 10.0 * std::log10((1.0 + std::pow(2 * M_PI * 50 * tau, 2)) /
                                         (1.0 + std::pow(2 * M_PI * 1 * tau, 2)));
  EXPECT_NEAR(first_order_attenuation_db(tau, 1.0, 50.0), exact, 1e-12);
}

TEST(Lowpass, EffectiveTimeConstant) {
  const MuscleParams p;
  const double rise = activation_time_constant(p, 1.0, 0.5);
  const double fall = activation_time_constant(p, 0.0, 0.5);
  EXPECT_NEAR(effective_activation_time_constant(p, 0.5),
              2.0 * rise * fall / (rise + fall), 1e-15);
}

TEST(TunePid, PicksBestCandidate) {
  const PidTuning t = tune_pid(short_bench(), {200.0, 800.0}, {16.0}, 0.1);
  EXPECT_EQ(t.candidates, 2);
  const TrialLog a = pid_baseline(short_bench(), PidGains{200.0, 3200.0, 20.0});
  const TrialLog c = pid_baseline(short_bench(), PidGains{800.0, 12800.0, 80.0});
  EXPECT_DOUBLE_EQ(t.metrics.mean_abs_mm,
                   std::min(compute_metrics(a).mean_abs_mm, compute_metrics(c).mean_abs_mm));
  EXPECT_THAT(t.best.kp, ::testing::AnyOf(200.0, 800.0));
}

}  // namespace
}  // namespace musclearm
