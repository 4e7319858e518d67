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

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "musclearm/errors.h"

namespace musclearm {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

bool violates(double value, double target, bool diagonal,
              const AssumptionBounds& b) {
  if (sign_of(value) != sign_of(target)) return true;
  const double mag = std::abs(value);
  if (diagonal) return mag < b.c2 || mag > b.a_diag * b.c2;
  return mag > b.c1;
}

}  // namespace

bool AssumptionBounds::admissible(int m) const {
  return c1 > 0.0 && a_diag >= 1.0 && c2 > c1 * (2.0 * a_diag + 1.0) * (m - 1);
}

void DdilcParams::validate(int m) const {
  const auto fail = [](const std::string& f, const std::string& why) {
    throw DomainError("controller." + f + " " + why);
  };
  if (!(eta > 0.0)) fail("eta", "must be > 0");
  if (!(lambda > 0.0)) fail("lambda", "must be > 0");
  if (!(rho > 0.0 && rho <= 1.0)) fail("rho", "must lie in (0, 1]");
  if (!(mu > 0.0)) fail("mu", "must be > 0");
  if (window < 1) fail("window", "must be >= 1");
  if (!bounds.admissible(m)) fail("c2", "must exceed c1 (2 a_diag + 1)(m - 1)");
  if (!(u_min < u_max)) fail("u_min", "must be < u_max");
  if (!(xi_bound > 0.0)) fail("xi_bound", "must be > 0");
  if (learning_lead < 1) fail("learning_lead", "must be >= 1");
  if (beta.rows() != m || beta.cols() != m || !beta.allFinite()) {
    fail("beta", "must be a finite m x m matrix");
  }
}

PjmEstimate make_pjm_estimate(const MatrixXd& initial,
                              const AssumptionBounds& b) {
  MatrixXd phi = initial;
  for (Eigen::Index i = 0; i < phi.rows(); ++i) {
    for (Eigen::Index j = 0; j < phi.cols(); ++j) {
      double& x = phi(i, j);
      if (i == j) {
        const double s = x < 0.0 ? -1.0 : 1.0;
        x = s * std::clamp(std::abs(x), b.c2, b.a_diag * b.c2);
      } else {
        x = std::clamp(x, -b.c1, b.c1);
      }
    }
  }
  return PjmEstimate{phi, phi};
}

int reset_pjm(PjmEstimate& est, const AssumptionBounds& b) {
  int restored = 0;
  for (Eigen::Index i = 0; i < est.phi_hat.rows(); ++i) {
    for (Eigen::Index j = 0; j < est.phi_hat.cols(); ++j) {
      if (violates(est.phi_hat(i, j), est.phi_init(i, j), i == j, b)) {
        est.phi_hat(i, j) = est.phi_init(i, j);
        ++restored;
      }
    }
  }
  return restored;
}

PjmEstimate estimate_pjm(const PjmEstimate& est, const VectorXd& dy,
                         const VectorXd& du_b, const DdilcParams& params) {
  PjmEstimate out = est;
  const VectorXd innovation = dy - est.phi_hat * du_b;
  out.phi_hat += params.rho * innovation * du_b.transpose() /
                 (params.mu + du_b.squaredNorm());
  reset_pjm(out, params.bounds);
  return out;
}

MatrixXd update_feedback_gain(const MatrixXd& xi_hat, const MatrixXd& phi_hat,
                              const VectorXd& e_t, const VectorXd& delta_e_t,
                              const DdilcParams& params) {
  MatrixXd xi = xi_hat -
                params.eta * params.lambda * xi_hat * delta_e_t *
                    delta_e_t.transpose() +
                params.eta * phi_hat.transpose() * e_t * delta_e_t.transpose();
  return xi.cwiseMax(-params.xi_bound).cwiseMin(params.xi_bound);
}

int reset_feedback_gain(MatrixXd& xi_hat, const MatrixXd& reference,
                        const DdilcParams& params) {
  const Eigen::Index m = xi_hat.rows();
  const double off_limit = params.bounds.c1 / params.bounds.c2 * params.xi_bound;
  int restored = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < xi_hat.cols(); ++j) {
      double& x = xi_hat(i, j);
      double clamped;
      if (j % m == i) {
        const double sign = reference(i, j) < 0.0 ? -1.0 : 1.0;
        clamped = sign * std::clamp(sign * x, 0.0, params.xi_bound);
      } else {
        clamped = std::clamp(x, -off_limit, off_limit);
      }
      if (clamped != x) {
        x = clamped;
        ++restored;
      }
    }
  }
  return restored;
}

VectorXd predict_error(const VectorXd& y_d_next, const VectorXd& y_t,
                       const MatrixXd& phi_hat, const VectorXd& du_b) {
  return y_d_next - y_t - phi_hat * du_b;
}

VectorXd feedback_control(const MatrixXd& xi_hat, const VectorXd& delta_e_next) {
  return xi_hat * delta_e_next;
}

MatrixXd feedforward_update(const MatrixXd& u_ff, const MatrixXd& e_prev,
                            const MatrixXd& beta, int lead) {
  const Eigen::Index T = u_ff.cols();
  if (e_prev.cols() != T + 1 || e_prev.rows() != u_ff.rows()) {
    throw DomainError("feedforward_update: error series must be m x (T + 1)");
  }
  MatrixXd out = u_ff;
  for (Eigen::Index t = 0; t < T; ++t) {
    out.col(t) += beta * e_prev.col(std::min<Eigen::Index>(t + lead, T));
  }
  return out;
}

VectorXd compose_control(const VectorXd& u_b, const VectorXd& u_f,
                         double u_min, double u_max) {
  return (u_b + u_f).cwiseMax(u_min).cwiseMin(u_max);
}

DdilcController::DdilcController(DdilcParams params, const MatrixXd& phi_initial,
                                 const MatrixXd& xi_initial, int horizon,
                                 VectorXd u_bias)
    : params_(std::move(params)),
      horizon_(horizon),
      m_(static_cast<int>(phi_initial.rows())),
      u_bias_(std::move(u_bias)) {
  params_.validate(m_);
  if (horizon_ < 1) throw DomainError("controller horizon must be >= 1");
  if (phi_initial.cols() != m_ || u_bias_.size() != m_) {
    throw DomainError("controller dimensions are inconsistent");
  }
  if (xi_initial.rows() != m_ || xi_initial.cols() != m_ * params_.window) {
    throw DomainError("Xi_hat must be m x (m * window)");
  }
  pjm_ = make_pjm_estimate(phi_initial, params_.bounds);
  mem_.u_ff = MatrixXd::Zero(m_, horizon_);
  mem_.e_prev = MatrixXd::Zero(m_, horizon_ + 1);
  xi_init_ = xi_initial.cwiseMax(-params_.xi_bound).cwiseMin(params_.xi_bound);
  mem_.xi_hat = xi_init_;
  mem_.delta_e_window = VectorXd::Zero(m_ * params_.window);
  e_current_ = MatrixXd::Zero(m_, horizon_ + 1);
}

void DdilcController::begin_iteration() {
  if (mem_.has_previous) {
    mem_.u_ff = feedforward_update(mem_.u_ff, mem_.e_prev, params_.beta,
                                   params_.learning_lead);
    mem_.has_previous = false;
  }
  pjm_.phi_hat = pjm_.phi_init;
  if (!params_.carry_xi) mem_.xi_hat = xi_init_;
  u_b_ = u_bias_;
  du_b_prev_ = VectorXd::Zero(m_);
  y_prev_.resize(0);
  e_window_.resize(0);
  e_current_.setZero();
  mem_.delta_e_window.setZero();
}

VectorXd DdilcController::control(int t, const VectorXd& y_t,
                                  const VectorXd& y_d_t,
                                  const VectorXd& y_d_next) {
  if (t < 0 || t >= horizon_) throw DomainError("tick outside the horizon");
  const int n_e = params_.window;
  const VectorXd e_t = y_d_t - y_t;
  e_current_.col(t) = e_t;

  // e_window_ holds e(t), e(t-1), ..., e(t - n_e); padding repeats e(0) so
  // that increments before the start are zero.
  if (e_window_.size() == 0) {
    e_window_ = e_t.replicate(n_e + 1, 1);
  } else {
    e_window_.tail(m_ * n_e) = e_window_.head(m_ * n_e).eval();
    e_window_.head(m_) = e_t;
  }
  VectorXd delta_e(m_ * n_e);
  for (int i = 0; i < n_e; ++i) {
    delta_e.segment(i * m_, m_) =
        e_window_.segment(i * m_, m_) - e_window_.segment((i + 1) * m_, m_);
  }

  if (y_prev_.size() == m_) {
    PjmEstimate next = pjm_;
    const VectorXd innovation = (y_t - y_prev_) - pjm_.phi_hat * du_b_prev_;
    next.phi_hat += params_.rho * innovation * du_b_prev_.transpose() /
                    (params_.mu + du_b_prev_.squaredNorm());
    pjm_resets_ += reset_pjm(next, params_.bounds);
    pjm_ = std::move(next);
    // Gradient step on the regressor the gain acted on at the previous tick.
    mem_.xi_hat = update_feedback_gain(mem_.xi_hat, pjm_.phi_hat, e_t,
                                       mem_.delta_e_window, params_);
    xi_resets_ += reset_feedback_gain(mem_.xi_hat, xi_init_, params_);
  }

  const VectorXd e_hat = predict_error(y_d_next, y_t, pjm_.phi_hat, du_b_prev_);
  VectorXd delta_e_next(m_ * n_e);
  delta_e_next.head(m_) = e_hat - e_t;
  if (n_e > 1) delta_e_next.tail(m_ * (n_e - 1)) = delta_e.head(m_ * (n_e - 1));

  mem_.delta_e_window = delta_e_next;

  const VectorXd u_f = mem_.u_ff.col(t);
  const VectorXd u = compose_control(u_b_ + feedback_control(mem_.xi_hat, delta_e_next),
                                     u_f, params_.u_min, params_.u_max);
  // Back-calculate the feedback state from the saturated input so the
  // accumulated feedback does not wind up.
  const VectorXd u_b_new = u - u_f;
  du_b_prev_ = u_b_new - u_b_;
  u_b_ = u_b_new;
  y_prev_ = y_t;
  return u;
}

void DdilcController::end_iteration(const VectorXd& y_T, const VectorXd& y_d_T) {
  e_current_.col(horizon_) = y_d_T - y_T;
  mem_.e_prev = e_current_;
  mem_.has_previous = true;
  ++iteration_;
}

void DdilcController::restore_feedforward(const MatrixXd& u_ff) {
  if (u_ff.rows() != m_ || u_ff.cols() != horizon_) {
    throw DomainError("feedforward series has the wrong shape");
  }
  mem_.u_ff = u_ff;
}

}  // namespace musclearm
