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

#include "musclearm/presets.h"

#include <cmath>
#include <numbers>
#include <string>

#include "musclearm/errors.h"

namespace musclearm {
namespace {

using Eigen::Matrix3d;
using Eigen::Vector3d;
using Eigen::VectorXd;

constexpr double kRestActivation = 0.5;
constexpr double kRestFiberLength = 0.8;

// Slender rod along -x of its distal frame.
Link planar_rod(double length, double mass) {
  Link l;
  l.dh = DhParams{length, 0.0, 0.0, 0.0};
  l.mass = mass;
  l.com = Vector3d(-0.5 * length, 0.0, 0.0);
  const double i_rod = mass * length * length / 12.0;
  l.inertia = Vector3d(1e-4, i_rod, i_rod).asDiagonal();
  return l;
}

Link spatial_segment(const DhParams& dh, double mass, const Vector3d& com,
                     double length) {
  Link l;
  l.dh = dh;
  l.mass = mass;
  l.com = com;
  const double i_rod = mass * length * length / 12.0 + 1e-4;
  l.inertia = Vector3d(i_rod, i_rod, 1e-4 + 0.01 * i_rod).asDiagonal();
  return l;
}

void add_muscles(ArmModel& model, const MuscleParams& muscle,
                 const std::vector<int>& per_joint_flexors,
                 const std::vector<int>& per_joint_extensors,
                 double moment_arm) {
  const double l_ref =
      reference_mtu_length(muscle, kRestActivation, kRestFiberLength);
  for (int j = 0; j < model.n_joints(); ++j) {
    for (int sign : {1, -1}) {
      const int count = sign > 0 ? per_joint_flexors[j] : per_joint_extensors[j];
      for (int c = 0; c < count; ++c) {
        model.routing.push_back(MuscleRoute{j, moment_arm, sign, l_ref});
        model.muscles.push_back(muscle);
      }
    }
  }
}

ArmPreset planar2x4(const MuscleParams& muscle) {
  ArmPreset p;
  ArmModel& m = p.model;
  m.name = std::string(kPlanar2x4);
  m.links = {planar_rod(0.38, 1.2), planar_rod(0.34, 0.9)};
  m.joint_limits = {{-0.6, 2.2}, {0.2, 2.8}};
  // Table-top arm: gravity is normal to the plane of motion.
  m.gravity = Vector3d(0.0, 0.0, -9.81);
  m.viscous_friction = VectorXd::Constant(2, 0.05);
  m.q_ref = (VectorXd(2) << 0.5, 1.6).finished();
  m.task_dims = 2;
  add_muscles(m, muscle, {1, 1}, {1, 1}, 0.02);

  p.start = forward_kinematics(m, m.q_ref);
  p.chord_dir = (VectorXd(2) << -1.0, 0.0).finished();
  p.transverse_dir = (VectorXd(2) << 0.0, 1.0).finished();
  p.rated_load = 2.5;
  return p;
}

// Seven joints: three at the shoulder, elbow, forearm rotation and two at
// the wrist; upper arm 380 mm, forearm 340 mm, hand 262 mm.
ArmPreset spatial_ltdm(const MuscleParams& muscle) {
  using std::numbers::pi;
  ArmPreset p;
  ArmModel& m = p.model;
  m.name = std::string(kSpatialLtdm);
  const double small = 0.05;
  m.links = {
      spatial_segment({0.0, -pi / 2, 0.0, 0.0}, small, Vector3d::Zero(), 0.02),
      spatial_segment({0.0, pi / 2, 0.0, 0.0}, small, Vector3d::Zero(), 0.02),
      spatial_segment({0.0, -pi / 2, 0.38, 0.0}, 1.0, Vector3d(0.0, 0.19, 0.0), 0.38),
      spatial_segment({0.0, pi / 2, 0.0, 0.0}, small, Vector3d::Zero(), 0.02),
      spatial_segment({0.0, -pi / 2, 0.34, 0.0}, 0.7, Vector3d(0.0, 0.17, 0.0), 0.34),
      spatial_segment({0.0, pi / 2, 0.0, 0.0}, small, Vector3d::Zero(), 0.02),
      spatial_segment({0.262, 0.0, 0.0, 0.0}, 0.3, Vector3d(-0.131, 0.0, 0.0), 0.262),
  };
  m.joint_limits = {{0.0, 0.4},  {0.0, 1.1},  {0.0, 1.1}, {0.0, 1.57},
                    {0.0, 1.57}, {-1.0, 1.0}, {-1.0, 1.0}};
  m.gravity = Vector3d(0.0, 0.0, -9.81);
  m.viscous_friction = VectorXd::Constant(7, 0.05);
  m.q_ref = (VectorXd(7) << 0.2, 0.55, 0.55, 0.785, 0.785, 0.0, 0.0).finished();
  m.task_dims = 3;
  // Seven shoulder muscles, two each at elbow and forearm, four at the wrist.
  add_muscles(m, muscle, {2, 1, 1, 1, 1, 1, 1}, {1, 1, 1, 1, 1, 1, 1}, 0.02);

  p.start = forward_kinematics(m, m.q_ref);
  p.chord_dir = (VectorXd(3) << 0.0, 1.0, 0.0).finished();
  p.transverse_dir = (VectorXd(3) << 0.0, 0.0, 1.0).finished();
  p.rated_load = 2.5;
  return p;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {std::string(kPlanar2x4), std::string(kSpatialLtdm)};
}

MuscleParams default_muscle_params(std::string_view preset) {
  MuscleParams p;
  if (preset == kSpatialLtdm) p.f0_max = 1500.0;
  return p;
}

double reference_mtu_length(const MuscleParams& p, double a,
                            double l_fiber_norm) {
  const double ft = p.pennation_factor *
                    (std::max(a, p.a_min) * active_force_length(p, l_fiber_norm) *
                         force_velocity(0.0) +
                     passive_force_length(p, l_fiber_norm));
  double strain = 0.0;
  if (ft > p.f_toe) {
    strain = p.eps_toe() + (ft - p.f_toe) / p.k_lin();
  } else if (ft > 0.0) {
    strain = p.eps_toe() / p.k_toe *
             std::log1p(ft * std::expm1(p.k_toe) / p.f_toe);
  }
  return l_fiber_norm * p.l0_fiber * p.pennation_factor +
         p.l_slack_tendon * (1.0 + strain);
}

ArmPreset make_preset(std::string_view name, const MuscleParams& muscle) {
  muscle.validate();
  ArmPreset p;
  if (name == kPlanar2x4) {
    p = planar2x4(muscle);
  } else if (name == kSpatialLtdm) {
    p = spatial_ltdm(muscle);
  } else {
    throw ModelError("unknown arm preset '" + std::string(name) + "'");
  }
  p.model.validate();
  return p;
}

}  // namespace musclearm
