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

// Rigid serial arm driven by single-joint, constant-moment-arm muscles.
//
// Kinematics follow the standard Denavit-Hartenberg convention: frame i sits
// at the distal end of link i and joint i rotates about z_{i-1}. Link mass
// properties are expressed in frame i. Dynamics are evaluated with the
// recursive Newton-Euler algorithm in base coordinates.

#ifndef MUSCLEARM_ARM_H_
#define MUSCLEARM_ARM_H_

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "musclearm/muscle.h"

namespace musclearm {

struct DhParams {
  double a = 0.0;
  double alpha = 0.0;
  double d = 0.0;
  double theta_offset = 0.0;

  bool operator==(const DhParams&) const = default;
};

struct Link {
  DhParams dh;
  double mass = 0.0;
  Eigen::Vector3d com = Eigen::Vector3d::Zero();       // frame i
  Eigen::Matrix3d inertia = Eigen::Matrix3d::Zero();   // about com, frame i

  double length() const { return std::hypot(dh.a, dh.d); }
};

// One muscle spanning exactly one joint. sign = +1 marks a muscle that
// shortens as the joint angle increases.
struct MuscleRoute {
  int joint = 0;
  double moment_arm = 0.02;
  int sign = 1;
  double l_ref = 0.0;  // MTU length at q_ref
};

struct ArmModel {
  std::string name;
  std::vector<Link> links;
  std::vector<std::pair<double, double>> joint_limits;
  Eigen::Vector3d gravity = Eigen::Vector3d::Zero();
  Eigen::VectorXd viscous_friction;
  Eigen::VectorXd q_ref;
  std::vector<MuscleRoute> routing;
  std::vector<MuscleParams> muscles;
  int task_dims = 2;

  int n_joints() const { return static_cast<int>(links.size()); }
  int n_muscles() const { return static_cast<int>(routing.size()); }

  // Structural invariants: antagonist coverage of every joint, positive
  // geometry and inertia, ordered joint limits. Throws ModelError.
  void validate() const;

  // Copy with a point mass rigidly attached at the end-effector.
  ArmModel with_tip_load(double mass) const;
};

struct ArmState {
  Eigen::VectorXd q;
  Eigen::VectorXd qdot;
  std::vector<MuscleState> muscle_states;
};

class IntegrationDiverged : public std::runtime_error {
 public:
  IntegrationDiverged(const std::string& what, ArmState last_good)
      : std::runtime_error(what), last_good_(std::move(last_good)) {}
  const ArmState& last_good() const { return last_good_; }

 private:
  ArmState last_good_;
};

Eigen::VectorXd muscle_lengths(const ArmModel& model, const Eigen::VectorXd& q);
// L(q), muscles x joints, equal to -dl/dq.
Eigen::MatrixXd moment_arm_matrix(const ArmModel& model,
                                  const Eigen::VectorXd& q);
// Joint torques produced by tendon forces, tau = L(q)^T F. Forces must be
// non-negative.
Eigen::VectorXd joint_torques(const ArmModel& model,
                              const Eigen::VectorXd& forces,
                              const Eigen::VectorXd& q);

Eigen::Vector3d tip_position(const ArmModel& model, const Eigen::VectorXd& q);
// Tip position restricted to the model's task dimensions.
Eigen::VectorXd forward_kinematics(const ArmModel& model,
                                   const Eigen::VectorXd& q);
Eigen::MatrixXd task_jacobian(const ArmModel& model, const Eigen::VectorXd& q);

struct IkVelocityResult {
  Eigen::VectorXd qdot;
  bool damped = false;  // singularity flag
};

inline constexpr double kIkSingularThreshold = 1e-4;
inline constexpr double kIkDamping = 1e-6;

// qdot = J+ pdot + (I - J+ J) k_q with J+ = J^T (J J^T)^-1, switching to a
// damped least-squares inverse when the smallest singular value of J drops
// below kIkSingularThreshold.
IkVelocityResult ik_velocity(const Eigen::MatrixXd& jacobian,
                             const Eigen::VectorXd& p_dot,
                             const Eigen::VectorXd& k_q);
IkVelocityResult ik_velocity(const ArmModel& model, const Eigen::VectorXd& p_dot,
                             const Eigen::VectorXd& q,
                             const Eigen::VectorXd& k_q);

// Resolved-rate position IK with a null-space pull toward mid-range.
// Returns nullopt when the target cannot be reached within joint limits.
std::optional<Eigen::VectorXd> solve_ik(const ArmModel& model,
                                        const Eigen::VectorXd& target,
                                        const Eigen::VectorXd& q_seed,
                                        double tolerance = 1e-10);

// Inverse dynamics H qdd + C qd + G (no friction) with the model gravity
// scaled by gravity_scale.
Eigen::VectorXd inverse_dynamics(const ArmModel& model,
                                 const Eigen::VectorXd& q,
                                 const Eigen::VectorXd& qdot,
                                 const Eigen::VectorXd& qddot,
                                 double gravity_scale = 1.0);
Eigen::MatrixXd mass_matrix(const ArmModel& model, const Eigen::VectorXd& q);

inline constexpr double kMassMatrixMinRcond = 1e-12;

// qdd = H^-1 (tau + J^T f_ext - C qd - G - tau_f qd). Throws ModelError when
// H is ill-conditioned.
Eigen::VectorXd forward_dynamics(const ArmModel& model,
                                 const Eigen::VectorXd& q,
                                 const Eigen::VectorXd& qdot,
                                 const Eigen::VectorXd& tau,
                                 const Eigen::VectorXd& f_ext);

double kinetic_energy(const ArmModel& model, const Eigen::VectorXd& q,
                      const Eigen::VectorXd& qdot);
double potential_energy(const ArmModel& model, const Eigen::VectorXd& q);

struct StepDiagnostics {
  Eigen::VectorXd tendon_forces;  // N
  Eigen::VectorXd torques;        // N m
  int clamped_arguments = 0;
  int floored_activations = 0;
  int slack_tendons = 0;
  bool joint_limit_hit = false;
};

struct ArmStepResult {
  ArmState state;
  StepDiagnostics diagnostics;
};

// One control tick: MTU lengths from q, muscle steps, torque mapping, then
// an RK4 step of (q, qdot) with the tendon forces frozen. Joint limits act
// as inelastic hard stops. Throws IntegrationDiverged on a non-finite state.
ArmStepResult integrate_step(const ArmModel& model, const ArmState& state,
                             const Eigen::VectorXd& excitations,
                             const Eigen::VectorXd& f_ext, double dt);

// Rigid-body-only RK4 step with fixed joint torques.
void rk4_rigid_step(const ArmModel& model, Eigen::VectorXd& q,
                    Eigen::VectorXd& qdot, const Eigen::VectorXd& tau,
                    const Eigen::VectorXd& f_ext, double dt);

// Rest state at q with every muscle in isometric equilibrium for the given
// activations.
ArmState rest_state(const ArmModel& model, const Eigen::VectorXd& q,
                    const Eigen::VectorXd& activations);

}  // namespace musclearm

#endif  // MUSCLEARM_ARM_H_
