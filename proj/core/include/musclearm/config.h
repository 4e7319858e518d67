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

// Sectioned INI experiment configuration.
//
//   [experiment] name, iterations, repetitions, seed, output, dt
//   [arm]        preset
//   [muscle]     MuscleParams overrides on top of the preset defaults
//   [controller] DDILC and learning-schedule parameters
//   [trajectory] amplitude, spatial_period, cycles, duration
//   [disturbance] load_fraction, noise_*, sweep_fractions
//   [pid]        baseline gains and tuning grid
//   [lowpass]    carrier, amplitude, f_low, f_high
//   [output]     log_stride, dump_iterations
//
// Lists are comma separated. Unknown sections or keys are errors. Any key
// can be overridden from the environment as MUSCLEARM_<SECTION>_<KEY>.

#ifndef MUSCLEARM_CONFIG_H_
#define MUSCLEARM_CONFIG_H_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "musclearm/harness.h"
#include "musclearm/muscle.h"

namespace musclearm {

struct ExperimentSection {
  std::string name = "default";
  int iterations = 50;
  int repetitions = 10;
  std::uint64_t seed = 0;
  std::string output = "out";
  double dt = 1e-3;

  bool operator==(const ExperimentSection&) const = default;
};

struct ControllerSection {
  double eta = 0.002;
  double lambda = 1.0;
  double rho = 1.0;
  double mu = 1.0;
  int window = 1;
  double c1 = 0.1;
  double c2 = 10.0;
  double a_diag = 2.0;
  int learning_lead = 400;
  bool carry_xi = false;
  double beta_gain = 0.3;
  double xi_gain = 0.1;
  double xi_jitter = 0.2;
  double xi_bound_factor = 3.0;
  double phi_diag = 0.0;
  double probe_delta = 0.02;
  double probe_settle = 5.0;
  int divergence_window = 3;

  bool operator==(const ControllerSection&) const = default;
};

struct TrajectorySection {
  double amplitude = 0.15;
  double spatial_period = 0.2;
  int cycles = 2;
  double duration = 60.0;

  bool operator==(const TrajectorySection&) const = default;
};

struct DisturbanceSection {
  double load_fraction = 0.0;
  double noise_amplitude = 0.0;
  double noise_f_lo = 1.0;
  double noise_f_hi = 50.0;
  int noise_components = 8;
  std::vector<double> sweep_fractions = {0.0, 0.05, 0.10, 0.15, 0.20, 0.25, 0.30};

  bool operator==(const DisturbanceSection&) const = default;
};

struct PidSection {
  double kp = 0.0;  // 0 -> tune on the grid below
  double ki = 0.0;
  double kd = 0.0;
  double integral_limit = 0.05;
  std::vector<double> kp_grid = {200.0, 400.0, 800.0, 1600.0};
  std::vector<double> ki_ratio_grid = {4.0, 16.0, 32.0, 48.0, 64.0};
  double kd_ratio = 0.1;

  bool operator==(const PidSection&) const = default;
};

struct LowpassSection {
  double carrier = 0.5;
  double amplitude = 0.1;
  double f_low = 1.0;
  double f_high = 50.0;

  bool operator==(const LowpassSection&) const = default;
};

struct OutputSection {
  int log_stride = 100;
  bool dump_iterations = true;

  bool operator==(const OutputSection&) const = default;
};

struct ExperimentConfig {
  ExperimentSection experiment;
  std::string preset = "planar2x4";
  std::map<std::string, double> muscle_overrides;  // keyed by field name
  ControllerSection controller;
  TrajectorySection trajectory;
  DisturbanceSection disturbance;
  PidSection pid;
  LowpassSection lowpass;
  OutputSection output;

  bool operator==(const ExperimentConfig&) const = default;

  // Throws ConfigError naming the offending field.
  void validate() const;

  // Preset defaults with the overrides applied.
  MuscleParams muscle_params() const;
  IlcSettings ilc_settings() const;
  TrajectorySpec trajectory_spec() const;
  DisturbanceSpec disturbance_spec() const;
  PidGains pid_gains() const;
};

// Throws ConfigError carrying the line number on syntax errors and the
// `section.key` name on unknown keys or invalid values.
ExperimentConfig parse_config(const std::string& text);
// Throws IoError when the file cannot be read.
ExperimentConfig load_config(const std::string& path);

// Canonical text form; parse_config(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& config);

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

// Applies MUSCLEARM_<SECTION>_<KEY> overrides and revalidates. The default
// lookup reads the process environment.
void apply_env_overrides(ExperimentConfig& config, const EnvLookup& lookup = {});

// All `section.key` names accepted by the parser, in serialization order.
std::vector<std::string> config_keys();

}  // namespace musclearm

#endif  // MUSCLEARM_CONFIG_H_
