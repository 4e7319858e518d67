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

// Data-driven iterative learning controller built on a compact-form dynamic
// linearization of the plant, Delta y(t+1) = Phi(t) Delta u_b(t).
//
// Per tick the controller refreshes the pseudo-Jacobian estimate Phi_hat
// with a projection update, adapts the feedback gain Xi_hat by gradient
// descent on 1/2 |e|^2 + 1/2 lambda |Delta u_b|^2, predicts the next error
// and accumulates the feedback input. Between iterations the feedforward
// input is corrected with beta e(t + 1) of the previous iteration.
//
// Shapes: outputs and inputs are both m-dimensional; the error-increment
// window Delta E stacks n_e increments, so Xi_hat is m x (m * n_e).

#ifndef MUSCLEARM_DDILC_H_
#define MUSCLEARM_DDILC_H_

#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace musclearm {

// Box and sign conditions on the PJM estimate: |Phi_ij| <= c1 off the
// diagonal, c2 <= |Phi_ii| <= a_diag * c2, signs fixed by Phi(1, k).
struct AssumptionBounds {
  double c1 = 0.1;
  double c2 = 10.0;
  double a_diag = 2.0;

  // c2 > c1 (2 a + 1)(m - 1) and a >= 1.
  bool admissible(int m) const;
};

struct DdilcParams {
  double eta = 0.002;
  double lambda = 1.0;
  double rho = 1.0;
  double mu = 1.0;
  int window = 1;
  AssumptionBounds bounds;
  double u_min = 0.0;
  double u_max = 1.0;
  // Element-wise saturation of Xi_hat.
  double xi_bound = std::numeric_limits<double>::infinity();
  // Feedforward correction uses e(t + learning_lead, k - 1).
  int learning_lead = 1;
  // Keep the adapted Xi_hat across iterations instead of restarting from
  // the initial gain.
  bool carry_xi = false;
  Eigen::MatrixXd beta;  // m x m

  // Throws DomainError on an out-of-range field.
  void validate(int m) const;
};

struct PjmEstimate {
  Eigen::MatrixXd phi_hat;
  Eigen::MatrixXd phi_init;  // reset target, carries the reference signs
};

// Projects `initial` into the admissible box (keeping signs; zero diagonal
// entries become +c2) and uses it as both estimate and reset target.
PjmEstimate make_pjm_estimate(const Eigen::MatrixXd& initial,
                              const AssumptionBounds& bounds);

// Restores every element violating a magnitude or sign condition to its
// reset target. Returns the number of elements restored.
int reset_pjm(PjmEstimate& est, const AssumptionBounds& bounds);

PjmEstimate estimate_pjm(const PjmEstimate& est, const Eigen::VectorXd& dy,
                         const Eigen::VectorXd& du_b, const DdilcParams& params);

// One gradient step on Xi_hat followed by element-wise saturation:
// Xi - eta lambda Xi dE dE^T + eta Phi^T e dE^T.
Eigen::MatrixXd update_feedback_gain(const Eigen::MatrixXd& xi_hat,
                                     const Eigen::MatrixXd& phi_hat,
                                     const Eigen::VectorXd& e_t,
                                     const Eigen::VectorXd& delta_e_t,
                                     const DdilcParams& params);

// Box on Xi_hat mirroring the PJM conditions: each diagonal of an m x m
// block keeps the sign of `reference` with magnitude <= xi_bound, the other
// entries stay within (c1 / c2) xi_bound. Returns the number clamped.
int reset_feedback_gain(Eigen::MatrixXd& xi_hat, const Eigen::MatrixXd& reference,
                        const DdilcParams& params);

Eigen::VectorXd predict_error(const Eigen::VectorXd& y_d_next,
                              const Eigen::VectorXd& y_t,
                              const Eigen::MatrixXd& phi_hat,
                              const Eigen::VectorXd& du_b);

// Feedback increment Xi_hat * Delta E(t + 1).
Eigen::VectorXd feedback_control(const Eigen::MatrixXd& xi_hat,
                                 const Eigen::VectorXd& delta_e_next);

// u_f(t) += beta e(t + lead) along the whole horizon. u_ff is m x T and
// e_prev is m x (T + 1); indices past the horizon use e_prev(T).
Eigen::MatrixXd feedforward_update(const Eigen::MatrixXd& u_ff,
                                   const Eigen::MatrixXd& e_prev,
                                   const Eigen::MatrixXd& beta, int lead = 1);

Eigen::VectorXd compose_control(const Eigen::VectorXd& u_b,
                                const Eigen::VectorXd& u_f, double u_min = 0.0,
                                double u_max = 1.0);

// Iteration-to-iteration learning state.
struct IlcMemory {
  Eigen::MatrixXd u_ff;    // m x T
  Eigen::MatrixXd e_prev;  // m x (T + 1)
  Eigen::MatrixXd xi_hat;  // m x (m * n_e)
  Eigen::VectorXd delta_e_window;  // regressor fed to the gain at the last tick
  bool has_previous = false;
};

// Sequential controller for one repeated task of horizon T ticks.
class DdilcController {
 public:
  DdilcController(DdilcParams params, const Eigen::MatrixXd& phi_initial,
                  const Eigen::MatrixXd& xi_initial, int horizon,
                  Eigen::VectorXd u_bias);

  // Applies the feedforward update from the last finished iteration (if
  // any) and resets the along-time state.
  void begin_iteration();

  // Control input for tick t given the measured output y(t) and the desired
  // outputs y_d(t) and y_d(t + 1).
  Eigen::VectorXd control(int t, const Eigen::VectorXd& y_t,
                          const Eigen::VectorXd& y_d_t,
                          const Eigen::VectorXd& y_d_next);

  // Records the terminal error e(T) and stores the iteration's error series.
  void end_iteration(const Eigen::VectorXd& y_T, const Eigen::VectorXd& y_d_T);

  const DdilcParams& params() const { return params_; }
  const PjmEstimate& pjm() const { return pjm_; }
  const IlcMemory& memory() const { return mem_; }
  int iteration() const { return iteration_; }
  int horizon() const { return horizon_; }
  int pjm_resets() const { return pjm_resets_; }
  long xi_resets() const { return xi_resets_; }

  // Divergence-monitor hooks.
  void set_beta(const Eigen::MatrixXd& beta) { params_.beta = beta; }
  void restore_feedforward(const Eigen::MatrixXd& u_ff);
  // Drops the pending feedforward update for the next begin_iteration().
  void discard_last_error() { mem_.has_previous = false; }

 private:
  DdilcParams params_;
  PjmEstimate pjm_;
  IlcMemory mem_;
  int horizon_;
  int m_;
  Eigen::VectorXd u_bias_;
  Eigen::MatrixXd xi_init_;
  int iteration_ = 0;
  int pjm_resets_ = 0;
  long xi_resets_ = 0;

  // along-time state
  Eigen::MatrixXd e_current_;  // m x (T + 1)
  Eigen::VectorXd u_b_;
  Eigen::VectorXd du_b_prev_;
  Eigen::VectorXd y_prev_;
  Eigen::VectorXd e_window_;  // e(t), e(t-1), ..., e(t - n_e)
};

}  // namespace musclearm

#endif  // MUSCLEARM_DDILC_H_
