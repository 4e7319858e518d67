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

// Hill-type muscle-tendon unit: first-order activation dynamics, the
// active/passive force-length, force-velocity and tendon force-strain
// curves, and the fiber/tendon force-equilibrium state update.
//
// Lengths inside MuscleState are normalized by the optimal fiber length;
// fiber velocity is normalized so that one unit shortens or lengthens the
// fiber by l0_fiber per second. Forces returned by the curve functions are
// normalized by f0_max.

#ifndef MUSCLEARM_MUSCLE_H_
#define MUSCLEARM_MUSCLE_H_

namespace musclearm {

struct MuscleParams {
  double f0_max = 1000.0;         // N
  double l0_fiber = 0.05;         // m
  double l_slack_tendon = 0.10;   // m
  double pennation_factor = 1.0;  // cos(pennation angle)
  double t_act = 0.010;           // s
  double t_deact = 0.040;         // s
  double gamma = 0.45;
  double k_pe = 4.0;
  double eps0_m = 0.6;
  double eps0_t = 0.04;
  double k_toe = 3.0;
  double f_toe = 0.33;
  double a_min = 0.01;

  // Toe/linear transition strain. Solved from slope continuity at the
  // transition together with ft(eps0_t) = 1; evaluates to 0.6086 * eps0_t.
  double eps_toe() const;
  // Linear-region stiffness, 1.7119 / eps0_t by the same two conditions.
  double k_lin() const;

  // Throws DomainError naming the offending field.
  void validate() const;

  bool operator==(const MuscleParams&) const = default;
};

struct MuscleState {
  double activation = 0.0;
  double l_fiber_norm = 1.0;
  double v_fiber_norm = 0.0;  // cached from the last equilibrium solve

  bool operator==(const MuscleState&) const = default;
};

// Upper plateau of the force-velocity curve (eccentric asymptote).
inline constexpr double kFvPlateau = 1.6;

double activation_time_constant(const MuscleParams& p, double u, double a);
double activation_rate(const MuscleParams& p, double u, double a);

double active_force_length(const MuscleParams& p, double l_norm);
double passive_force_length(const MuscleParams& p, double l_norm);

// fv(v) = 1.6 - 1.6 exp(-1.1 / (1 - v)^4 + 0.1 / (1 - v)^2), defined for
// v < 1. This sign layout gives fv(0) ~ 1 with the 1.6 eccentric plateau.
double force_velocity(double v_norm);
// Bracketed root search on the monotone branch of force_velocity.
// fv_target must lie in (0, 1.6).
double inverse_force_velocity(double fv_target);

// Normalized tendon force; zero for a slack tendon (strain <= 0).
double tendon_force(const MuscleParams& p, double strain);
double tendon_strain(const MuscleParams& p, double l_fiber_norm, double l_mtu);

struct EquilibriumResult {
  double v_norm = 0.0;
  double tendon_force_norm = 0.0;
  bool activation_floored = false;
  bool argument_clamped = false;
  bool tendon_slack = false;
};

// Solves F^t = F^m cos(alpha) for the normalized fiber velocity.
EquilibriumResult fiber_velocity_from_equilibrium(const MuscleParams& p,
                                                  const MuscleState& state,
                                                  double a, double l_mtu);

struct MuscleStepResult {
  MuscleState state;
  double tendon_force = 0.0;  // N
  EquilibriumResult equilibrium;
};

// Exact exponential step for activation (t_a frozen over dt), explicit
// Euler for fiber length.
MuscleStepResult step_muscle(const MuscleParams& p, const MuscleState& state,
                             double u, double l_mtu, double dt);

// Normalized fiber length at which the unit is in isometric equilibrium
// (zero fiber velocity) for activation a and MTU length l_mtu. Returns the
// length leaving the tendon exactly slack when no stretched equilibrium
// exists.
double isometric_fiber_length(const MuscleParams& p, double a, double l_mtu);

MuscleState isometric_state(const MuscleParams& p, double a, double l_mtu);

}  // namespace musclearm

#endif  // MUSCLEARM_MUSCLE_H_
