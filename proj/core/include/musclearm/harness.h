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

// Experiment protocol: benchmark setup, single trials, the iteration loop,
// load-disturbance sweeps, the PID baseline, metrics and the activation
// low-pass measurement.

#ifndef MUSCLEARM_HARNESS_H_
#define MUSCLEARM_HARNESS_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "musclearm/arm.h"
#include "musclearm/ddilc.h"
#include "musclearm/presets.h"
#include "musclearm/trajectory.h"

namespace musclearm {

struct DisturbanceSpec {
  double load_fraction = 0.0;  // tip mass as a fraction of the rated load, in [0, 0.5]
  double noise_amplitude = 0.0;
  double noise_f_lo = 1.0;  // Hz
  double noise_f_hi = 50.0;
  int noise_components = 8;

  void validate() const;
};

// Maps m task commands in [0, 1] to muscle excitations: each joint command
// is 0.5 + S (c - 0.5); muscles with sign +1 receive the joint command and
// their antagonists its complement, both floored at a_min.
struct CommandMap {
  Eigen::MatrixXd synergy;  // joints x m

  static CommandMap for_model(const ArmModel& model);
  int commands() const { return static_cast<int>(synergy.cols()); }
  Eigen::VectorXd excitations(const ArmModel& model,
                              const Eigen::VectorXd& commands) const;
  // Least-squares command vector reproducing the given joint commands.
  Eigen::VectorXd from_joint_commands(const Eigen::VectorXd& joint_cmd) const;
};

// Everything a trial needs that does not change between iterations.
struct Benchmark {
  ArmPreset preset;
  ArmModel model;  // preset model, possibly carrying a tip load
  TrajectorySpec trajectory;
  double dt = 1e-3;
  Eigen::MatrixXd y_d;     // task dims x (T + 1)
  Eigen::MatrixXd q_d;     // joints x (T + 1), desired posture path
  Eigen::MatrixXd l_d;     // muscles x (T + 1), desired MTU lengths
  CommandMap command_map;
  Eigen::VectorXd u_bias;  // commands holding the start posture
  ArmState start;

  int horizon() const { return static_cast<int>(y_d.cols()) - 1; }
  int outputs() const { return static_cast<int>(y_d.rows()); }
  double rated_load() const { return preset.rated_load; }
};

// Fills trajectory placement defaults from the preset, checks
// reachability and builds the rest state at the trajectory start.
Benchmark make_benchmark(const ArmPreset& preset, TrajectorySpec trajectory,
                         double dt);
// Same benchmark with a point load of `fraction * rated_load` at the tip.
Benchmark with_load(const Benchmark& bench, double fraction);

class TrialController {
 public:
  virtual ~TrialController() = default;
  virtual void begin() {}
  virtual Eigen::VectorXd control(int t, const Eigen::VectorXd& y_t,
                                  const Eigen::VectorXd& y_d_t,
                                  const Eigen::VectorXd& y_d_next) = 0;
  virtual void end(const Eigen::VectorXd& /*y_T*/,
                   const Eigen::VectorXd& /*y_d_T*/) {}
};

// Holds a fixed command vector for the whole trial.
class ConstantController : public TrialController {
 public:
  explicit ConstantController(Eigen::VectorXd u) : u_(std::move(u)) {}
  Eigen::VectorXd control(int, const Eigen::VectorXd&, const Eigen::VectorXd&,
                          const Eigen::VectorXd&) override {
    return u_;
  }

 private:
  Eigen::VectorXd u_;
};

// Open-loop replay of a recorded command series (m x T).
class ReplayController : public TrialController {
 public:
  explicit ReplayController(Eigen::MatrixXd commands)
      : commands_(std::move(commands)) {}
  Eigen::VectorXd control(int t, const Eigen::VectorXd&, const Eigen::VectorXd&,
                          const Eigen::VectorXd&) override {
    return commands_.col(t);
  }

 private:
  Eigen::MatrixXd commands_;
};

// Runs the controller in decoupled output coordinates y' = W y.
class DdilcTrialController : public TrialController {
 public:
  DdilcTrialController(DdilcController& controller, Eigen::MatrixXd output_map)
      : ctrl_(controller), w_(std::move(output_map)) {}
  void begin() override { ctrl_.begin_iteration(); }
  Eigen::VectorXd control(int t, const Eigen::VectorXd& y_t,
                          const Eigen::VectorXd& y_d_t,
                          const Eigen::VectorXd& y_d_next) override {
    return ctrl_.control(t, w_ * y_t, w_ * y_d_t, w_ * y_d_next);
  }
  void end(const Eigen::VectorXd& y_T, const Eigen::VectorXd& y_d_T) override {
    ctrl_.end_iteration(w_ * y_T, w_ * y_d_T);
  }

 private:
  DdilcController& ctrl_;
  Eigen::MatrixXd w_;
};

struct PidGains {
  double kp = 0.0;  // N / m
  double ki = 0.0;  // N / (m s)
  double kd = 0.0;  // N s / m
  double integral_limit = 0.05;  // m s

  bool operator==(const PidGains&) const = default;
};

// Task-space PID: a tip force kp e + ki int(e) + kd de/dt is mapped to joint
// torques through J^T at the desired posture, scaled into differential joint commands by each
// joint's summed muscle torque capacity and saturated to [0, 1].
class PidController : public TrialController {
 public:
  PidController(const Benchmark& bench, PidGains gains);
  void begin() override;
  Eigen::VectorXd control(int t, const Eigen::VectorXd& y_t,
                          const Eigen::VectorXd& y_d_t,
                          const Eigen::VectorXd& y_d_next) override;

 private:
  const Benchmark& bench_;
  PidGains gains_;
  Eigen::VectorXd torque_scale_;
  Eigen::VectorXd integral_;
  Eigen::VectorXd e_prev_;
};

struct TrialLog {
  double dt = 1e-3;
  Eigen::MatrixXd y_d;          // dims x (T + 1)
  Eigen::MatrixXd y;            // dims x (T + 1)
  Eigen::MatrixXd q;            // joints x (T + 1)
  Eigen::MatrixXd qdot;         // joints x (T + 1)
  Eigen::MatrixXd commands;     // m x T
  Eigen::MatrixXd activations;  // muscles x T
  Eigen::MatrixXd forces;       // muscles x T, N
  Eigen::MatrixXd l_mtu;        // muscles x (T + 1)
  Eigen::MatrixXd l_desired;    // muscles x (T + 1)
  bool diverged = false;
  std::string failure;
  int ticks_completed = 0;
  long clamped_arguments = 0;
  long floored_activations = 0;
  long joint_limit_hits = 0;
};

// Simulates one iteration. Integration failures and error excursions above
// divergence_limit (m) are recorded in the log, not thrown.
TrialLog run_trial(const Benchmark& bench, TrialController& controller,
                   const DisturbanceSpec& disturbance, std::uint64_t seed,
                   double divergence_limit = 0.5);

struct TrialMetrics {
  double mean_abs_mm = 0.0;
  double mse_mm2 = 0.0;
  double std_mm = 0.0;
  double max_mm = 0.0;
  double muscle_mean_abs_mm = 0.0;
  double muscle_mse_mm2 = 0.0;
  std::size_t samples = 0;
};

// Tracking error is the Euclidean tip-position error per sample.
TrialMetrics compute_metrics(const TrialLog& log);
// Same statistics for a plain series of scalar errors given in mm.
TrialMetrics metrics_from_errors_mm(const std::vector<double>& errors_mm);

struct IlcSettings {
  int iterations = 50;
  // beta is filled from the probe. The learning lead of 400 ticks offsets
  // the phase lag of the muscle-limb response on the benchmark.
  DdilcParams params = [] {
    DdilcParams p;
    p.learning_lead = 400;
    return p;
  }();
  double beta_gain = 0.3;    // beta = beta_gain * Phi(1, k)^-1
  double xi_gain = 0.1;      // Xi_hat(1, 1) ~ xi_gain * Phi(1, k)^-1
  double xi_jitter = 0.2;    // relative random perturbation of Xi_hat(1, 1)
  double xi_bound_factor = 3.0;
  double probe_delta = 0.02;
  double probe_settle = 5.0;  // s
  // Diagonal of Phi(1, k) in decoupled output units; 0 -> sqrt(a_diag) * c2.
  double phi_diag = 0.0;
  int divergence_window = 3;
};

struct SensitivityProbe {
  Eigen::MatrixXd gain;  // outputs x commands, m per unit command
};

// Static output/command sensitivity at the start posture from central
// step perturbations of each command.
SensitivityProbe probe_sensitivity(const Benchmark& bench, double delta,
                                   double settle);

struct IterationRecord {
  int iteration = 0;
  TrialMetrics metrics;
  double beta_scale = 1.0;
  bool diverged = false;
  bool monitor_event = false;
};

struct IlcResult {
  std::vector<IterationRecord> iterations;
  SensitivityProbe probe;
  Eigen::MatrixXd output_map;      // W
  Eigen::MatrixXd final_commands;  // m x T applied in the last iteration
  Eigen::MatrixXd final_feedforward;
  Eigen::MatrixXd final_xi;
  Eigen::MatrixXd final_phi;
  int monitor_events = 0;
};

using IterationCallback = std::function<void(
    int iteration, const TrialLog& log, const DdilcController& controller)>;

IlcResult run_ilc(const Benchmark& bench, const IlcSettings& settings,
                  const DisturbanceSpec& disturbance, std::uint64_t seed,
                  const IterationCallback& on_iteration = {});

struct SweepRow {
  double fraction = 0.0;
  double load_kg = 0.0;
  double mean_abs_mm = 0.0;   // averaged over repetitions
  double mse_mm2 = 0.0;
  double std_over_reps_mm = 0.0;
  bool diverged = false;
  std::vector<TrialMetrics> repetitions;
};

using SweepCallback = std::function<void(double fraction, int repetition,
                                         const TrialLog& log)>;

// Open-loop replay of `commands` with a tip load of each fraction of the
// rated load.
std::vector<SweepRow> disturbance_sweep(const Benchmark& bench,
                                        const Eigen::MatrixXd& commands,
                                        const std::vector<double>& fractions,
                                        const DisturbanceSpec& noise,
                                        int repetitions, std::uint64_t seed,
                                        const SweepCallback& on_trial = {});

bool non_decreasing(const std::vector<SweepRow>& rows, double tolerance = 0.0);

TrialLog pid_baseline(const Benchmark& bench, const PidGains& gains,
                      const DisturbanceSpec& disturbance = {},
                      std::uint64_t seed = 0);

struct PidTuning {
  PidGains best;
  TrialMetrics metrics;
  int candidates = 0;
};

// Grid search over kp x ki (kd tied to kp) for the lowest mean error.
PidTuning tune_pid(const Benchmark& bench, const std::vector<double>& kp_grid,
                   const std::vector<double>& ki_ratio_grid, double kd_ratio);

struct LowpassResult {
  double frequency = 0.0;
  // Ratios of response amplitude at `frequency` to the excitation-noise
  // amplitude, in dB (negative = attenuation). Empty for zero noise.
  std::optional<double> activation_gain_db;
  std::optional<double> force_gain_db;  // force normalized by f0_max
};

// Single isometric unit held at a carrier excitation with a sinusoidal
// noise tone.
LowpassResult lowpass_response(const MuscleParams& muscle, double carrier,
                               double amplitude, double frequency,
                               double dt = 1e-3);

struct LowpassComparison {
  LowpassResult low;
  LowpassResult high;
  // Attenuation of the high band relative to the low band (positive dB).
  std::optional<double> force_extra_attenuation_db;
  std::optional<double> activation_extra_attenuation_db;
  double first_order_prediction_db = 0.0;
};

LowpassComparison lowpass_attenuation_test(const MuscleParams& muscle,
                                           double carrier, double amplitude,
                                           double f_low, double f_high,
                                           double dt = 1e-3);

// Effective first-order time constant of the activation filter for small
// oscillations about `carrier`: the harmonic mean of the rise and fall
// constants.
double effective_activation_time_constant(const MuscleParams& muscle,
                                          double carrier);
// 20 log10 of |H(f_low)| / |H(f_high)| for H(s) = 1 / (1 + s tau).
double first_order_attenuation_db(double tau, double f_low, double f_high);

}  // namespace musclearm

#endif  // MUSCLEARM_HARNESS_H_
