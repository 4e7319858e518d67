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

#include "musclearm/ddilc.h"

#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "musclearm/errors.h"

namespace musclearm {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd s(double x) { return MatrixXd::Constant(1, 1, x); }
VectorXd v(double x) { return VectorXd::Constant(1, x); }

DdilcParams scalar_params() {
  DdilcParams p;
  p.bounds = {0.1, 1.0, 2.0};
  p.beta = s(0.5);
  return p;
}

TEST(AssumptionBounds, Admissibility) {
  const AssumptionBounds b;
  EXPECT_TRUE(b.admissible(1));
  EXPECT_TRUE(b.admissible(19));
  EXPECT_FALSE(b.admissible(21));
  EXPECT_FALSE((AssumptionBounds{0.1, 10.0, 0.5}).admissible(2));
}

TEST(EstimatePjm, HandValue) {
  const DdilcParams p = scalar_params();
  const PjmEstimate est = make_pjm_estimate(s(1.0), p.bounds);
  EXPECT_DOUBLE_EQ(estimate_pjm(est, v(2.0), v(1.0), p).phi_hat(0, 0), 1.5);
}

TEST(EstimatePjm, ZeroRegressorOrInnovationLeavesEstimate) {
  DdilcParams p;
  p.beta = MatrixXd::Identity(2, 2);
  MatrixXd init(2, 2);
  init << 12.0, 0.05, -0.02, -15.0;
  const PjmEstimate est = make_pjm_estimate(init, p.bounds);
  EXPECT_EQ(estimate_pjm(est, VectorXd::Ones(2), VectorXd::Zero(2), p).phi_hat,
            est.phi_hat);
  const VectorXd du = (VectorXd(2) << 0.3, -0.1).finished();
  const VectorXd dy = est.phi_hat * du;
  EXPECT_LT((estimate_pjm(est, dy, du, p).phi_hat - est.phi_hat).norm(), 1e-14);
}

TEST(EstimatePjm, ProjectsInitialIntoBox) {
  const AssumptionBounds b;
  MatrixXd init(2, 2);
  init << 3.0, 0.5, -0.4, -50.0;
  const PjmEstimate est = make_pjm_estimate(init, b);
  EXPECT_EQ(est.phi_hat(0, 0), 10.0);
  EXPECT_EQ(est.phi_hat(1, 1), -20.0);
  EXPECT_EQ(est.phi_hat(0, 1), 0.1);
  EXPECT_EQ(est.phi_hat(1, 0), -0.1);
}

// After every update the magnitude and sign conditions hold.
TEST(EstimatePjm, ResetKeepsAssumptionBox) {
  DdilcParams p;
  const int m = 3;
  p.beta = MatrixXd::Identity(m, m);
  MatrixXd init = MatrixXd::Identity(m, m) * 12.0;
  init(1, 1) = -14.0;
  init(0, 2) = 0.05;
  PjmEstimate est = make_pjm_estimate(init, p.bounds);
  std::mt19937_64 rng(42);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int k = 0; k < 2000; ++k) {
    VectorXd dy(m), du(m);
    for (int i = 0; i < m; ++i) {
      dy(i) = 30.0 * n(rng);
      du(i) = n(rng);
    }
    est = estimate_pjm(est, dy, du, p);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        const double x = est.phi_hat(i, j);
        const double ref = est.phi_init(i, j);
        if (i == j) {
          ASSERT_GE(std::abs(x), p.bounds.c2);
          ASSERT_LE(std::abs(x), p.bounds.a_diag * p.bounds.c2);
          ASSERT_EQ(std::signbit(x), std::signbit(ref));
        } else {
          ASSERT_LE(std::abs(x), p.bounds.c1);
          if (ref != 0.0) ASSERT_EQ(std::signbit(x), std::signbit(ref));
        }
      }
    }
  }
}

TEST(EstimatePjm, ConvergesOnScalarLtiPlant) {
  // y(t + 1) = y(t) + phi u(t) with phi inside the box.
  const double phi = 14.0;
  DdilcParams p;
  p.beta = s(1.0);
  PjmEstimate est = make_pjm_estimate(s(10.0), p.bounds);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  double y = 0.0;
  int steps = 0;
  for (; steps < 200; ++steps) {
    const double u = unit(rng);
    const double y_next = y + phi * u;
    est = estimate_pjm(est, v(y_next - y), v(u), p);
    y = y_next;
    if (std::abs(est.phi_hat(0, 0) - phi) < 0.05 * phi) break;
  }
  EXPECT_LT(steps, 200);
  EXPECT_NEAR(est.phi_hat(0, 0), phi, 0.05 * phi);
}

TEST(UpdateFeedbackGain, HandValue) {
  DdilcParams p = scalar_params();
  p.eta = 0.5;
  EXPECT_DOUBLE_EQ(update_feedback_gain(s(0.1), s(2.0), v(0.3), v(1.0), p)(0, 0), 0.35);
}

TEST(UpdateFeedbackGain, ZeroStepOrExcitation) {
  DdilcParams p = scalar_params();
  p.eta = 0.0;
  EXPECT_EQ(update_feedback_gain(s(0.1), s(2.0), v(0.3), v(1.0), p), s(0.1));
  p.eta = 0.5;
  EXPECT_EQ(update_feedback_gain(s(0.1), s(2.0), v(0.0), v(0.0), p), s(0.1));
}

TEST(UpdateFeedbackGain, SaturatesAtBound) {
  DdilcParams p = scalar_params();
  p.eta = 0.5;
  p.xi_bound = 0.2;
  EXPECT_DOUBLE_EQ(update_feedback_gain(s(0.1), s(2.0), v(0.3), v(1.0), p)(0, 0), 0.2);
}

TEST(ResetFeedbackGain, SignBox) {
  DdilcParams p;
  p.xi_bound = 1.0;
  MatrixXd ref(2, 4);
  ref << 0.1, 0.0, 0.1, 0.0,
         0.0, -0.1, 0.0, -0.1;
  MatrixXd xi(2, 4);
  xi << -0.3, 0.5, 2.0, 0.001,
        0.2, -0.4, 0.3, -0.02;
  const int n = reset_feedback_gain(xi, ref, p);
  MatrixXd expected(2, 4);
  expected << 0.0, 0.01, 1.0, 0.001,
              0.01, -0.4, 0.01, -0.02;
  EXPECT_EQ(n, 5);
  EXPECT_LT((xi - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(PredictError, HandValues) {
  EXPECT_NEAR(predict_error(v(1.0), v(0.8), s(2.0), v(0.05))(0), 0.1, 1e-15);
  EXPECT_EQ(predict_error(v(1.0), v(0.8), s(2.0), v(0.0))(0), 1.0 - 0.8);
  EXPECT_EQ(predict_error(v(0.8), v(0.8), s(2.0), v(0.0))(0), 0.0);
}

TEST(FeedbackControl, HandValues) {
  EXPECT_NEAR(feedback_control(s(0.35), v(0.1))(0), 0.035, 1e-15);
  EXPECT_EQ(feedback_control(s(0.0), v(0.1))(0), 0.0);
  EXPECT_EQ(feedback_control(s(0.35), v(0.0))(0), 0.0);
}

TEST(FeedforwardUpdate, HandValues) {
  const MatrixXd u_ff = MatrixXd::Zero(1, 3);
  MatrixXd e_prev = MatrixXd::Zero(1, 4);
  EXPECT_EQ(feedforward_update(u_ff, e_prev, s(0.5)), u_ff);
  e_prev(0, 1) = 0.2;
  const MatrixXd out = feedforward_update(u_ff, e_prev, s(0.5));
  EXPECT_DOUBLE_EQ(out(0, 0), 0.1);
  EXPECT_EQ(out(0, 1), 0.0);
  // Lead past the horizon reuses the terminal error.
  e_prev(0, 3) = 1.0;
  EXPECT_DOUBLE_EQ(feedforward_update(u_ff, e_prev, s(0.5), 5)(0, 0), 0.5);
  EXPECT_THROW(feedforward_update(u_ff, MatrixXd::Zero(1, 3), s(0.5)), DomainError);
}

TEST(ComposeControl, Clamps) {
  EXPECT_EQ(compose_control(v(1.0), v(0.3))(0), 1.0);
  EXPECT_EQ(compose_control(v(-0.5), v(0.3))(0), 0.0);
  EXPECT_DOUBLE_EQ(compose_control(v(0.4), v(0.07))(0), 0.47);
}

TEST(DdilcParams, Validation) {
  DdilcParams p = scalar_params();
  EXPECT_NO_THROW(p.validate(1));
  p.eta = 0.0;
  EXPECT_THROW(p.validate(1), DomainError);
  p = scalar_params();
  EXPECT_THROW(p.validate(2), DomainError);  // beta shape
  p.rho = 1.5;
  EXPECT_THROW(p.validate(1), DomainError);
}

// Scalar plant y(t + 1) = a y(t) + phi u(t) tracked over repeated trials.
struct ScalarRun {
  std::vector<double> errors;  // mean |e| per iteration
  std::vector<double> controls;
  bool saturated_ok = true;
};

ScalarRun run_scalar(int iterations, int horizon, std::uint64_t seed) {
  const double a = 0.3, phi = 12.0;
  DdilcParams p;
  p.bounds = {0.1, 10.0, 2.0};
  p.eta = 0.002;
  p.beta = s(0.04);
  p.xi_bound = 0.05;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(0.9, 1.1);
  DdilcController c(p, s(10.0), s(0.01 * jitter(rng)), horizon, v(0.5));
  std::vector<double> y_d(horizon + 1);
  for (int t = 0; t <= horizon; ++t) {
    y_d[t] = 6.0 + 2.0 * std::sin(2.0 * M_PI * t / horizon);
  }
  ScalarRun out;
  for (int k = 0; k < iterations; ++k) {
    c.begin_iteration();
    double y = y_d[0];
    double sum = 0.0;
    for (int t = 0; t < horizon; ++t) {
      const double u = c.control(t, v(y), v(y_d[t]), v(y_d[t + 1]))(0);
      out.saturated_ok = out.saturated_ok && u >= 0.0 && u <= 1.0;
      out.controls.push_back(u);
      y = a * y + phi * u;
      sum += std::abs(y_d[t + 1] - y);
    }
    c.end_iteration(v(y), v(y_d[horizon]));
    out.errors.push_back(sum / horizon);
  }
  return out;
}

TEST(DdilcController, ConvergesOnScalarPlant) {
  const ScalarRun r = run_scalar(40, 200, 3);
  EXPECT_TRUE(r.saturated_ok);
  EXPECT_LT(r.errors.back(), 1e-3 * r.errors.front());
  for (std::size_t k = 10; k < r.errors.size(); ++k) {
    EXPECT_LE(r.errors[k], 1.05 * r.errors[k - 1]) << k;
  }
}

TEST(DdilcController, Deterministic) {
  const ScalarRun a = run_scalar(5, 100, 9);
  const ScalarRun b = run_scalar(5, 100, 9);
  ASSERT_EQ(a.controls.size(), b.controls.size());
  for (std::size_t i = 0; i < a.controls.size(); ++i) {
    ASSERT_EQ(a.controls[i], b.controls[i]);
  }
}

TEST(DdilcController, FirstIterationHasZeroFeedforward) {
  DdilcParams p = scalar_params();
  p.bounds = {0.1, 10.0, 2.0};
  DdilcController c(p, s(10.0), s(0.0), 4, v(0.5));
  c.begin_iteration();
  EXPECT_EQ(c.memory().u_ff, MatrixXd::Zero(1, 4));
  // Zero Xi and no error: the bias passes through.
  EXPECT_EQ(c.control(0, v(1.0), v(1.0), v(1.0))(0), 0.5);
}

TEST(DdilcController, FeedforwardFixedPointOnZeroError) {
  DdilcParams p = scalar_params();
  p.bounds = {0.1, 10.0, 2.0};
  DdilcController c(p, s(10.0), s(0.0), 3, v(0.5));
  MatrixXd u_ff(1, 3);
  u_ff << 0.1, -0.2, 0.05;
  c.restore_feedforward(u_ff);
  for (int k = 0; k < 3; ++k) {
    c.begin_iteration();
    for (int t = 0; t < 3; ++t) c.control(t, v(2.0), v(2.0), v(2.0));
    c.end_iteration(v(2.0), v(2.0));
  }
  c.begin_iteration();
  EXPECT_EQ(c.memory().u_ff, u_ff);
}

TEST(DdilcController, XiRestartsEachIterationUnlessCarried) {
  for (bool carry : {false, true}) {
    DdilcParams p = scalar_params();
    p.bounds = {0.1, 10.0, 2.0};
    p.carry_xi = carry;
    p.eta = 0.1;
    p.xi_bound = 1.0;
    DdilcController c(p, s(10.0), s(0.02), 20, v(0.5));
    c.begin_iteration();
    double y = 0.0;
    // A ramp reference excites the increment-driven gain.
    for (int t = 0; t < 20; ++t) {
      y = 0.5 * y + 0.1 * c.control(t, v(y), v(0.01 * t), v(0.01 * (t + 1)))(0);
    }
    c.end_iteration(v(y), v(0.2));
    const double adapted = c.memory().xi_hat(0, 0);
    ASSERT_NE(adapted, 0.02);
    c.begin_iteration();
    EXPECT_EQ(c.memory().xi_hat(0, 0), carry ? adapted : 0.02);
  }
}

TEST(DdilcController, RejectsInconsistentShapes) {
  DdilcParams p = scalar_params();
  p.bounds = {0.1, 10.0, 2.0};
  EXPECT_THROW(DdilcController(p, s(10.0), MatrixXd::Zero(1, 2), 5, v(0.5)),
               DomainError);
  EXPECT_THROW(DdilcController(p, s(10.0), s(0.0), 0, v(0.5)), DomainError);
}

}  // namespace
}  // namespace musclearm
