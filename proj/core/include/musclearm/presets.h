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

#ifndef MUSCLEARM_PRESETS_H_
#define MUSCLEARM_PRESETS_H_

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "musclearm/arm.h"
#include "musclearm/muscle.h"

namespace musclearm {

// An arm model plus the workspace placement its benchmark trajectory uses.
struct ArmPreset {
  ArmModel model;
  Eigen::VectorXd start;           // trajectory start point (task space)
  Eigen::VectorXd chord_dir;       // unit vector along the sine chord
  Eigen::VectorXd transverse_dir;  // unit vector of the sine excursion
  double rated_load = 2.5;         // kg
};

inline constexpr std::string_view kPlanar2x4 = "planar2x4";
inline constexpr std::string_view kSpatialLtdm = "spatial-ltdm";

std::vector<std::string> preset_names();

// Muscle constants a preset uses when the config does not override them.
MuscleParams default_muscle_params(std::string_view preset);

// Builds a preset with every muscle using `muscle`. Reference MTU lengths
// are derived so that at q_ref each fiber rests on the ascending limb of
// its force-length curve when the unit is half activated. Throws
// ModelError for unknown names.
ArmPreset make_preset(std::string_view name, const MuscleParams& muscle);
inline ArmPreset make_preset(std::string_view name) {
  return make_preset(name, default_muscle_params(name));
}

// MTU length at which a unit with activation a sits in isometric
// equilibrium with normalized fiber length l_fiber_norm.
double reference_mtu_length(const MuscleParams& p, double a,
                            double l_fiber_norm);

}  // namespace musclearm

#endif  // MUSCLEARM_PRESETS_H_
