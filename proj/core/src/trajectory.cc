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

#include "musclearm/trajectory.h"

#include <cmath>
#include <numbers>
#include <string>

#include "musclearm/errors.h"

namespace musclearm {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void TrajectorySpec::validate() const {
  if (!(amplitude > 0.0)) throw DomainError("trajectory amplitude must be > 0");
  if (!(spatial_period > 0.0)) {
    throw DomainError("trajectory spatial_period must be > 0");
  }
  if (!(duration > 0.0)) throw DomainError("trajectory duration must be > 0");
  if (cycles < 1) throw DomainError("trajectory cycles must be >= 1");
  const auto n = offset.size();
  if (n == 0 || chord_dir.size() != n || transverse_dir.size() != n) {
    throw DomainError("trajectory placement vectors must share one dimension");
  }
  if (std::abs(chord_dir.norm() - 1.0) > 1e-9 ||
      std::abs(transverse_dir.norm() - 1.0) > 1e-9) {
    throw DomainError("trajectory directions must be unit vectors");
  }
}

int horizon_ticks(const TrajectorySpec& spec, double dt) {
  if (!(dt > 0.0)) throw DomainError("dt must be positive");
  return static_cast<int>(std::llround(spec.duration / dt));
}

MatrixXd generate_trajectory(const TrajectorySpec& spec, double dt) {
  using std::numbers::pi;
  spec.validate();
  const int T = horizon_ticks(spec, dt);
  const double S = spec.chord_length();
  MatrixXd y(spec.offset.size(), T + 1);
  for (int t = 0; t <= T; ++t) {
    // Phase from the tick index keeps the endpoint exactly periodic.
    const double phase = 2.0 * pi * static_cast<double>(t) / T;
    const double s = 0.5 * S * (1.0 - std::cos(phase));
    const double w = spec.amplitude * std::sin(2.0 * pi * s / spec.spatial_period);
    y.col(t) = spec.offset + s * spec.chord_dir + w * spec.transverse_dir;
  }
  return y;
}

MatrixXd joint_path(const ArmModel& model, const MatrixXd& y_d,
                    const VectorXd& q_start, int stride) {
  const Eigen::Index cols = y_d.cols();
  MatrixXd q(model.n_joints(), cols);
  VectorXd seed = q_start;
  Eigen::Index last = -1;
  for (Eigen::Index t = 0; t < cols; t += stride) {
    const auto sol = solve_ik(model, y_d.col(t), seed, 1e-9);
    if (!sol) {
      throw UnreachableError("trajectory sample " + std::to_string(t) +
                                 " is outside the reachable workspace",
                             static_cast<std::size_t>(t));
    }
    q.col(t) = *sol;
    seed = *sol;
    if (last >= 0) {
      for (Eigen::Index k = last + 1; k < t; ++k) {
        const double w = static_cast<double>(k - last) / (t - last);
        q.col(k) = (1.0 - w) * q.col(last) + w * q.col(t);
      }
    }
    last = t;
    if (t + stride >= cols && t != cols - 1) t = cols - 1 - stride;
  }
  return q;
}

}  // namespace musclearm
