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

#ifndef MUSCLEARM_TRAJECTORY_H_
#define MUSCLEARM_TRAJECTORY_H_

#include <Eigen/Dense>

#include "musclearm/arm.h"

namespace musclearm {

// A sine path laid along a straight chord of the workspace. The chord
// coordinate runs out and back on a raised cosine, s(t) = S (1 - cos(2 pi t
// / duration)) / 2 with S = cycles * spatial_period / 2, so the tip starts
// and ends at rest on `offset` and traces `cycles` spatial periods in
// total. The transverse excursion is amplitude * sin(2 pi s / period).
struct TrajectorySpec {
  double amplitude = 0.150;       // m
  double spatial_period = 0.200;  // m
  int cycles = 2;
  double duration = 60.0;         // s
  Eigen::VectorXd offset;         // start point; empty -> preset default
  Eigen::VectorXd chord_dir;      // empty -> preset default
  Eigen::VectorXd transverse_dir;

  void validate() const;
  double chord_length() const { return 0.5 * cycles * spatial_period; }
};

int horizon_ticks(const TrajectorySpec& spec, double dt);

// Desired positions y_d(0..T) as a dims x (T + 1) matrix.
Eigen::MatrixXd generate_trajectory(const TrajectorySpec& spec, double dt);

// Joint-space path tracking the trajectory, solved by resolved-rate IK
// seeded from q_start. Throws UnreachableError with the first sample that
// cannot be reached inside the joint limits. Only every `stride`-th sample
// is solved; the rest are linearly interpolated.
Eigen::MatrixXd joint_path(const ArmModel& model, const Eigen::MatrixXd& y_d,
                           const Eigen::VectorXd& q_start, int stride = 10);

}  // namespace musclearm

#endif  // MUSCLEARM_TRAJECTORY_H_
