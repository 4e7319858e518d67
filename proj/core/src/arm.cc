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

#include "musclearm/arm.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "musclearm/errors.h"

namespace musclearm {
namespace {

using Eigen::Isometry3d;
using Eigen::Matrix3d;
using Eigen::MatrixXd;
using Eigen::Vector3d;
using Eigen::VectorXd;

Isometry3d dh_transform(const DhParams& dh, double q) {
  const double th = q + dh.theta_offset;
  const double ct = std::cos(th), st = std::sin(th);
  const double ca = std::cos(dh.alpha), sa = std::sin(dh.alpha);
  Isometry3d t = Isometry3d::Identity();
  t.linear() << ct, -st * ca, st * sa,
                st, ct * ca, -ct * sa,
                0.0, sa, ca;
  t.translation() << dh.a * ct, dh.a * st, dh.d;
  return t;
}

// frames[0] is the base; frames[i] is the frame at the distal end of link i.
std::vector<Isometry3d> chain_frames(const ArmModel& model, const VectorXd& q) {
  const int n = model.n_joints();
  std::vector<Isometry3d> frames(n + 1);
  frames[0] = Isometry3d::Identity();
  for (int i = 0; i < n; ++i) {
    frames[i + 1] = frames[i] * dh_transform(model.links[i].dh, q(i));
  }
  return frames;
}

void require_size(const VectorXd& v, int n, const char* what) {
  if (v.size() != n) {
    throw DomainError(std::string(what) + " has size " +
                      std::to_string(v.size()) + ", expected " +
                      std::to_string(n));
  }
}

bool all_finite(const ArmState& s) {
  if (!s.q.allFinite() || !s.qdot.allFinite()) return false;
  for (const auto& m : s.muscle_states) {
    if (!std::isfinite(m.activation) || !std::isfinite(m.l_fiber_norm)) {
      return false;
    }
  }
  return true;
}

}  // namespace

void ArmModel::validate() const {
  const int n = n_joints();
  if (n < 1) throw ModelError(name + ": arm needs at least one joint");
  if (static_cast<int>(joint_limits.size()) != n) {
    throw ModelError(name + ": joint_limits size mismatch");
  }
  if (q_ref.size() != n) throw ModelError(name + ": q_ref size mismatch");
  if (viscous_friction.size() != n) {
    throw ModelError(name + ": viscous_friction size mismatch");
  }
  if (task_dims < 1 || task_dims > 3) {
    throw ModelError(name + ": task_dims must be 1, 2 or 3");
  }
  for (int j = 0; j < n; ++j) {
    const Link& l = links[j];
    if (l.length() < 0.0) throw ModelError(name + ": link length must be non-negative");
    if (!(l.mass > 0.0)) throw ModelError(name + ": link mass must be positive");
    if (!(l.inertia.trace() > 0.0)) {
      throw ModelError(name + ": link inertia must be positive");
    }
    const auto [lo, hi] = joint_limits[j];
    if (!(lo < hi)) throw ModelError(name + ": joint limit min must be < max");
    if (q_ref(j) < lo || q_ref(j) > hi) {
      throw ModelError(name + ": q_ref outside joint limits");
    }
    if (viscous_friction(j) < 0.0) {
      throw ModelError(name + ": viscous friction must be non-negative");
    }
  }
  if (muscles.size() != routing.size()) {
    throw ModelError(name + ": one MuscleParams per route required");
  }
  std::vector<int> positive(n, 0), negative(n, 0);
  for (std::size_t i = 0; i < routing.size(); ++i) {
    const MuscleRoute& r = routing[i];
    if (r.joint < 0 || r.joint >= n) {
      throw ModelError(name + ": muscle " + std::to_string(i) +
                       " spans a non-existent joint");
    }
    if (!(r.moment_arm > 0.0)) throw ModelError(name + ": moment arm must be positive");
    if (r.sign != 1 && r.sign != -1) throw ModelError(name + ": sign must be +1 or -1");
    if (!(r.l_ref > 0.0)) throw ModelError(name + ": l_ref must be positive");
    (r.sign > 0 ? positive : negative)[r.joint]++;
    try {
      muscles[i].validate();
    } catch (const DomainError& e) {
      throw ModelError(name + ": muscle " + std::to_string(i) + ": " + e.what());
    }
  }
  for (int j = 0; j < n; ++j) {
    if (positive[j] == 0 || negative[j] == 0) {
      throw ModelError(name + ": joint " + std::to_string(j) +
                       " lacks an antagonist muscle pair");
    }
  }
}

ArmModel ArmModel::with_tip_load(double load_mass) const {
  if (load_mass < 0.0) throw DomainError("tip load mass must be non-negative");
  ArmModel out = *this;
  if (load_mass == 0.0 || links.empty()) return out;
  Link& last = out.links.back();
  const double m = last.mass;
  const double total = m + load_mass;
  // The tip is the origin of the last frame.
  const Vector3d com = last.com * (m / total);
  const auto shift = [](double mass, const Vector3d& d) -> Matrix3d {
    return mass * (d.squaredNorm() * Matrix3d::Identity() - d * d.transpose());
  };
  last.inertia = last.inertia + shift(m, last.com - com) + shift(load_mass, -com);
  last.com = com;
  last.mass = total;
  return out;
}

VectorXd muscle_lengths(const ArmModel& model, const VectorXd& q) {
  require_size(q, model.n_joints(), "q");
  VectorXd l(model.n_muscles());
  for (int i = 0; i < model.n_muscles(); ++i) {
    const MuscleRoute& r = model.routing[i];
    l(i) = r.l_ref - r.sign * r.moment_arm * (q(r.joint) - model.q_ref(r.joint));
  }
  return l;
}

MatrixXd moment_arm_matrix(const ArmModel& model, const VectorXd& q) {
  require_size(q, model.n_joints(), "q");
  MatrixXd L = MatrixXd::Zero(model.n_muscles(), model.n_joints());
  for (int i = 0; i < model.n_muscles(); ++i) {
    const MuscleRoute& r = model.routing[i];
    L(i, r.joint) = r.sign * r.moment_arm;
  }
  return L;
}

VectorXd joint_torques(const ArmModel& model, const VectorXd& forces,
                       const VectorXd& q) {
  require_size(forces, model.n_muscles(), "forces");
  if ((forces.array() < 0.0).any()) {
    throw DomainError("tendon forces must be non-negative");
  }
  return moment_arm_matrix(model, q).transpose() * forces;
}

Vector3d tip_position(const ArmModel& model, const VectorXd& q) {
  require_size(q, model.n_joints(), "q");
  return chain_frames(model, q).back().translation();
}

VectorXd forward_kinematics(const ArmModel& model, const VectorXd& q) {
  return tip_position(model, q).head(model.task_dims);
}

MatrixXd task_jacobian(const ArmModel& model, const VectorXd& q) {
  require_size(q, model.n_joints(), "q");
  const auto frames = chain_frames(model, q);
  const Vector3d tip = frames.back().translation();
  MatrixXd J(model.task_dims, model.n_joints());
  for (int j = 0; j < model.n_joints(); ++j) {
    const Vector3d z = frames[j].linear().col(2);
    const Vector3d col = z.cross(tip - frames[j].translation());
    J.col(j) = col.head(model.task_dims);
  }
  return J;
}

IkVelocityResult ik_velocity(const MatrixXd& J, const VectorXd& p_dot,
                             const VectorXd& k_q) {
  const auto m = J.rows();
  const auto n = J.cols();
  if (p_dot.size() != m) throw DomainError("p_dot size does not match J rows");
  IkVelocityResult out;
  Eigen::JacobiSVD<MatrixXd> svd(J);
  const double sigma_min =
      m <= n ? svd.singularValues()(m - 1) : 0.0;
  MatrixXd JJt = J * J.transpose();
  if (sigma_min < kIkSingularThreshold) {
    out.damped = true;
    JJt.diagonal().array() += kIkDamping;
  }
  const MatrixXd J_pinv = J.transpose() * JJt.ldlt().solve(MatrixXd::Identity(m, m));
  out.qdot = J_pinv * p_dot;
  if (k_q.size() == n) {
    out.qdot += k_q - J_pinv * (J * k_q);
  } else if (k_q.size() != 0) {
    throw DomainError("k_q size does not match joint count");
  }
  return out;
}

IkVelocityResult ik_velocity(const ArmModel& model, const VectorXd& p_dot,
                             const VectorXd& q, const VectorXd& k_q) {
  return ik_velocity(task_jacobian(model, q), p_dot, k_q);
}

std::optional<VectorXd> solve_ik(const ArmModel& model, const VectorXd& target,
                                 const VectorXd& q_seed, double tolerance) {
  const int n = model.n_joints();
  require_size(q_seed, n, "q_seed");
  VectorXd mid(n), lo(n), hi(n);
  for (int j = 0; j < n; ++j) {
    lo(j) = model.joint_limits[j].first;
    hi(j) = model.joint_limits[j].second;
    mid(j) = 0.5 * (lo(j) + hi(j));
  }
  VectorXd q = q_seed.cwiseMax(lo).cwiseMin(hi);
  constexpr int kMaxIter = 200;
  for (int it = 0; it < kMaxIter; ++it) {
    const VectorXd err = target - forward_kinematics(model, q);
    if (err.norm() < tolerance) return q;
    const VectorXd step = ik_velocity(model, err, q, 0.1 * (mid - q)).qdot;
    // Cap the Newton step so far-off targets do not overshoot the limits.
    const double scale = std::min(1.0, 0.5 / std::max(step.cwiseAbs().maxCoeff(), 1e-300));
    q = (q + scale * step).cwiseMax(lo).cwiseMin(hi);
  }
  if ((target - forward_kinematics(model, q)).norm() < tolerance) return q;
  return std::nullopt;
}

VectorXd inverse_dynamics(const ArmModel& model, const VectorXd& q,
                          const VectorXd& qdot, const VectorXd& qddot,
                          double gravity_scale) {
  const int n = model.n_joints();
  const auto frames = chain_frames(model, q);
  std::vector<Vector3d> w(n + 1), wd(n + 1), ae(n + 1), ac(n + 1), pc(n + 1),
      z(n + 1), p(n + 1);
  for (int i = 0; i <= n; ++i) {
    z[i] = frames[i].linear().col(2);
    p[i] = frames[i].translation();
  }
  w[0].setZero();
  wd[0].setZero();
  ae[0] = -gravity_scale * model.gravity;
  for (int i = 1; i <= n; ++i) {
    const Link& link = model.links[i - 1];
    const Vector3d zqd = z[i - 1] * qdot(i - 1);
    w[i] = w[i - 1] + zqd;
    wd[i] = wd[i - 1] + z[i - 1] * qddot(i - 1) + w[i - 1].cross(zqd);
    const Vector3d r = p[i] - p[i - 1];
    ae[i] = ae[i - 1] + wd[i].cross(r) + w[i].cross(w[i].cross(r));
    const Vector3d rc = frames[i].linear() * link.com;
    pc[i] = p[i] + rc;
    ac[i] = ae[i] + wd[i].cross(rc) + w[i].cross(w[i].cross(rc));
  }
  VectorXd tau(n);
  Vector3d f_next = Vector3d::Zero();
  Vector3d n_next = Vector3d::Zero();
  for (int i = n; i >= 1; --i) {
    const Link& link = model.links[i - 1];
    const Matrix3d R = frames[i].linear();
    const Matrix3d Iw = R * link.inertia * R.transpose();
    const Vector3d F = link.mass * ac[i];
    const Vector3d N = Iw * wd[i] + w[i].cross(Iw * w[i]);
    const Vector3d f = f_next + F;
    const Vector3d nm = n_next + (p[i] - p[i - 1]).cross(f_next) +
                        (pc[i] - p[i - 1]).cross(F) + N;
    tau(i - 1) = nm.dot(z[i - 1]);
    f_next = f;
    n_next = nm;
  }
  return tau;
}

MatrixXd mass_matrix(const ArmModel& model, const VectorXd& q) {
  const int n = model.n_joints();
  MatrixXd H(n, n);
  const VectorXd zero = VectorXd::Zero(n);
  for (int j = 0; j < n; ++j) {
    H.col(j) = inverse_dynamics(model, q, zero, VectorXd::Unit(n, j), 0.0);
  }
  return 0.5 * (H + H.transpose());
}

VectorXd forward_dynamics(const ArmModel& model, const VectorXd& q,
                          const VectorXd& qdot, const VectorXd& tau,
                          const VectorXd& f_ext) {
  const int n = model.n_joints();
  require_size(q, n, "q");
  require_size(qdot, n, "qdot");
  require_size(tau, n, "tau");
  VectorXd rhs = tau - inverse_dynamics(model, q, qdot, VectorXd::Zero(n));
  if (model.viscous_friction.size() == n) {
    rhs -= model.viscous_friction.cwiseProduct(qdot);
  }
  if (f_ext.size() != 0 && !f_ext.isZero(0.0)) {
    rhs += task_jacobian(model, q).transpose() * f_ext;
  }
  const MatrixXd H = mass_matrix(model, q);
  Eigen::LLT<MatrixXd> llt(H);
  if (llt.info() != Eigen::Success || llt.rcond() < kMassMatrixMinRcond) {
    throw ModelError("mass matrix is not positive definite or ill-conditioned");
  }
  return llt.solve(rhs);
}

double kinetic_energy(const ArmModel& model, const VectorXd& q,
                      const VectorXd& qdot) {
  return 0.5 * qdot.dot(mass_matrix(model, q) * qdot);
}

double potential_energy(const ArmModel& model, const VectorXd& q) {
  const auto frames = chain_frames(model, q);
  double v = 0.0;
  for (int i = 1; i <= model.n_joints(); ++i) {
    const Link& link = model.links[i - 1];
    const Vector3d pc = frames[i] * link.com;
    v -= link.mass * model.gravity.dot(pc);
  }
  return v;
}

void rk4_rigid_step(const ArmModel& model, VectorXd& q, VectorXd& qdot,
                    const VectorXd& tau, const VectorXd& f_ext, double dt) {
  const VectorXd k1v = forward_dynamics(model, q, qdot, tau, f_ext);
  const VectorXd& k1q = qdot;
  const VectorXd q2 = q + 0.5 * dt * k1q, v2 = qdot + 0.5 * dt * k1v;
  const VectorXd k2v = forward_dynamics(model, q2, v2, tau, f_ext);
  const VectorXd q3 = q + 0.5 * dt * v2, v3 = qdot + 0.5 * dt * k2v;
  const VectorXd k3v = forward_dynamics(model, q3, v3, tau, f_ext);
  const VectorXd q4 = q + dt * v3, v4 = qdot + dt * k3v;
  const VectorXd k4v = forward_dynamics(model, q4, v4, tau, f_ext);
  q += dt / 6.0 * (k1q + 2.0 * v2 + 2.0 * v3 + v4);
  qdot += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
}

ArmStepResult integrate_step(const ArmModel& model, const ArmState& state,
                             const VectorXd& excitations, const VectorXd& f_ext,
                             double dt) {
  if (!(dt > 0.0)) throw DomainError("dt must be positive");
  const int n_m = model.n_muscles();
  require_size(excitations, n_m, "excitations");

  ArmStepResult out;
  StepDiagnostics& diag = out.diagnostics;
  out.state.muscle_states.resize(n_m);
  diag.tendon_forces.resize(n_m);

  const VectorXd l_mtu = muscle_lengths(model, state.q);
  for (int i = 0; i < n_m; ++i) {
    const MuscleStepResult r = step_muscle(
        model.muscles[i], state.muscle_states[i], excitations(i), l_mtu(i), dt);
    out.state.muscle_states[i] = r.state;
    diag.tendon_forces(i) = r.tendon_force;
    diag.clamped_arguments += r.equilibrium.argument_clamped ? 1 : 0;
    diag.floored_activations += r.equilibrium.activation_floored ? 1 : 0;
    diag.slack_tendons += r.equilibrium.tendon_slack ? 1 : 0;
  }
  diag.torques = joint_torques(model, diag.tendon_forces, state.q);

  out.state.q = state.q;
  out.state.qdot = state.qdot;
  rk4_rigid_step(model, out.state.q, out.state.qdot, diag.torques, f_ext, dt);

  for (int j = 0; j < model.n_joints(); ++j) {
    const auto [lo, hi] = model.joint_limits[j];
    if (out.state.q(j) < lo) {
      out.state.q(j) = lo;
      out.state.qdot(j) = std::max(out.state.qdot(j), 0.0);
      diag.joint_limit_hit = true;
    } else if (out.state.q(j) > hi) {
      out.state.q(j) = hi;
      out.state.qdot(j) = std::min(out.state.qdot(j), 0.0);
      diag.joint_limit_hit = true;
    }
  }
  if (!all_finite(out.state)) {
    throw IntegrationDiverged("non-finite arm state", state);
  }
  return out;
}

ArmState rest_state(const ArmModel& model, const VectorXd& q,
                    const VectorXd& activations) {
  require_size(activations, model.n_muscles(), "activations");
  ArmState s;
  s.q = q;
  s.qdot = VectorXd::Zero(model.n_joints());
  const VectorXd l = muscle_lengths(model, q);
  s.muscle_states.reserve(model.n_muscles());
  for (int i = 0; i < model.n_muscles(); ++i) {
    s.muscle_states.push_back(
        isometric_state(model.muscles[i], activations(i), l(i)));
  }
  return s;
}

}  // namespace musclearm
