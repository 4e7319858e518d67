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

#include "musclearm/harness.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <string>
#include <utility>

#include "musclearm/errors.h"

namespace musclearm {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kMmPerM = 1000.0;

MatrixXd pseudo_inverse(const MatrixXd& a) {
  return a.completeOrthogonalDecomposition().pseudoInverse();
}

// Sum of random-phase tones inside a band, one independent set per channel.
class ActivationNoise {
 public:
  ActivationNoise(const DisturbanceSpec& spec, int channels, std::uint64_t seed)
      : amplitude_(spec.noise_amplitude) {
    if (amplitude_ <= 0.0) return;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> freq(spec.noise_f_lo, spec.noise_f_hi);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    const int k = std::max(1, spec.noise_components);
    tones_.resize(channels);
    for (auto& ch : tones_) {
      for (int i = 0; i < k; ++i) ch.push_back({freq(rng), phase(rng)});
    }
    per_tone_ = amplitude_ / std::sqrt(static_cast<double>(k));
  }

  bool active() const { return amplitude_ > 0.0; }

  void apply(double time, VectorXd& excitations) const {
    for (Eigen::Index c = 0; c < excitations.size(); ++c) {
      double n = 0.0;
      for (const auto& [f, ph] : tones_[c]) {
        n += std::sin(2.0 * std::numbers::pi * f * time + ph);
      }
      excitations(c) = std::clamp(excitations(c) + per_tone_ * n, 0.0, 1.0);
    }
  }

 private:
  struct Tone {
    double frequency;
    double phase;
  };
  double amplitude_;
  double per_tone_ = 0.0;
  std::vector<std::vector<Tone>> tones_;
};

// Joint commands (0.5 = balanced) that cancel gravity at q with the arm at
// rest, found by Newton iteration on the static torque balance.
VectorXd static_joint_commands(const ArmModel& model, const CommandMap& map,
                               const VectorXd& q) {
  const int n = model.n_joints();
  const auto torque = [&](const VectorXd& jc) {
    const VectorXd c = map.from_joint_commands(jc);
    const ArmState s = rest_state(model, q, map.excitations(model, c));
    VectorXd f(model.n_muscles());
    const VectorXd l = muscle_lengths(model, q);
    for (int i = 0; i < model.n_muscles(); ++i) {
      f(i) = model.muscles[i].f0_max *
             tendon_force(model.muscles[i],
                          tendon_strain(model.muscles[i],
                                        s.muscle_states[i].l_fiber_norm, l(i)));
    }
    return VectorXd(joint_torques(model, f, q) -
                    inverse_dynamics(model, q, VectorXd::Zero(n),
                                     VectorXd::Zero(n)));
  };
  VectorXd jc = VectorXd::Constant(n, 0.5);
  for (int it = 0; it < 30; ++it) {
    const VectorXd r = torque(jc);
    if (r.norm() < 1e-9) break;
    MatrixXd Jt(n, n);
    constexpr double h = 1e-6;
    for (int j = 0; j < n; ++j) {
      VectorXd p = jc;
      p(j) += h;
      Jt.col(j) = (torque(p) - r) / h;
    }
    jc = (jc - Jt.fullPivLu().solve(r)).cwiseMax(0.02).cwiseMin(0.98);
  }
  return jc;
}

double bin_amplitude(const std::vector<double>& x, double frequency, double dt) {
  std::complex<double> acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double w = 2.0 * std::numbers::pi * frequency * dt * static_cast<double>(i);
    acc += x[i] * std::complex<double>(std::cos(w), -std::sin(w));
  }
  return 2.0 * std::abs(acc) / static_cast<double>(x.size());
}

}  // namespace

void DisturbanceSpec::validate() const {
  if (!(load_fraction >= 0.0 && load_fraction <= 0.5)) {
    throw DomainError("disturbance load_fraction must lie in [0, 0.5]");
  }
  if (noise_amplitude < 0.0) {
    throw DomainError("disturbance noise_amplitude must be >= 0");
  }
  if (!(noise_f_lo > 0.0 && noise_f_lo <= noise_f_hi)) {
    throw DomainError("disturbance noise band must satisfy 0 < f_lo <= f_hi");
  }
  if (noise_components < 1) {
    throw DomainError("disturbance noise_components must be >= 1");
  }
}

CommandMap CommandMap::for_model(const ArmModel& model) {
  CommandMap map;
  const int n = model.n_joints();
  if (n == model.task_dims) {
    map.synergy = MatrixXd::Identity(n, n);
    return map;
  }
  // One synergy per task direction: the minimum-norm joint motion producing
  // it at the reference posture, scaled to a unit peak joint command.
  MatrixXd s = pseudo_inverse(task_jacobian(model, model.q_ref));
  for (Eigen::Index c = 0; c < s.cols(); ++c) {
    const double peak = s.col(c).cwiseAbs().maxCoeff();
    if (peak > 0.0) s.col(c) /= peak;
  }
  map.synergy = s;
  return map;
}

VectorXd CommandMap::excitations(const ArmModel& model,
                                 const VectorXd& commands) const {
  const VectorXd joint =
      (VectorXd::Constant(synergy.rows(), 0.5) +
       synergy * (commands - VectorXd::Constant(commands.size(), 0.5)))
          .cwiseMax(0.0)
          .cwiseMin(1.0);
  VectorXd u(model.n_muscles());
  for (int i = 0; i < model.n_muscles(); ++i) {
    const MuscleRoute& r = model.routing[i];
    const double drive = r.sign > 0 ? joint(r.joint) : 1.0 - joint(r.joint);
    u(i) = std::max(drive, model.muscles[i].a_min);
  }
  return u;
}

VectorXd CommandMap::from_joint_commands(const VectorXd& joint_cmd) const {
  const VectorXd centered = joint_cmd - VectorXd::Constant(joint_cmd.size(), 0.5);
  VectorXd c;
  if (synergy.rows() == synergy.cols() && synergy.isIdentity(0.0)) {
    c = centered;
  } else {
    c = pseudo_inverse(synergy) * centered;
  }
  return (c + VectorXd::Constant(c.size(), 0.5)).cwiseMax(0.0).cwiseMin(1.0);
}

Benchmark make_benchmark(const ArmPreset& preset, TrajectorySpec trajectory,
                         double dt) {
  if (!(dt > 0.0)) throw DomainError("dt must be positive");
  if (trajectory.offset.size() == 0) trajectory.offset = preset.start;
  if (trajectory.chord_dir.size() == 0) trajectory.chord_dir = preset.chord_dir;
  if (trajectory.transverse_dir.size() == 0) {
    trajectory.transverse_dir = preset.transverse_dir;
  }
  if (trajectory.offset.size() != preset.model.task_dims) {
    throw DomainError("trajectory dimension does not match the arm task space");
  }

  Benchmark b;
  b.preset = preset;
  b.model = preset.model;
  b.trajectory = trajectory;
  b.dt = dt;
  b.y_d = generate_trajectory(trajectory, dt);

  const auto q_start = solve_ik(b.model, b.y_d.col(0), b.model.q_ref, 1e-12);
  if (!q_start) {
    throw UnreachableError("trajectory start is outside the reachable workspace", 0);
  }
  b.q_d = joint_path(b.model, b.y_d, *q_start);
  b.l_d.resize(b.model.n_muscles(), b.q_d.cols());
  for (Eigen::Index t = 0; t < b.q_d.cols(); ++t) {
    b.l_d.col(t) = muscle_lengths(b.model, b.q_d.col(t));
  }
  b.command_map = CommandMap::for_model(b.model);
  b.u_bias = b.command_map.from_joint_commands(
      static_joint_commands(b.model, b.command_map, *q_start));
  b.start = rest_state(b.model, *q_start,
                       b.command_map.excitations(b.model, b.u_bias));
  return b;
}

Benchmark with_load(const Benchmark& bench, double fraction) {
  if (!(fraction >= 0.0 && fraction <= 0.5)) {
    throw DomainError("load fraction must lie in [0, 0.5]");
  }
  Benchmark out = bench;
  out.model = bench.preset.model.with_tip_load(fraction * bench.rated_load());
  return out;
}

PidController::PidController(const Benchmark& bench, PidGains gains)
    : bench_(bench), gains_(gains) {
  const ArmModel& m = bench.model;
  torque_scale_ = VectorXd::Zero(m.n_joints());
  for (int i = 0; i < m.n_muscles(); ++i) {
    torque_scale_(m.routing[i].joint) +=
        m.routing[i].moment_arm * m.muscles[i].f0_max;
  }
}

void PidController::begin() {
  integral_ = VectorXd::Zero(bench_.outputs());
  e_prev_.resize(0);
}

VectorXd PidController::control(int t, const VectorXd& y_t, const VectorXd& y_d_t,
                                const VectorXd&) {
  const double dt = bench_.dt;
  const VectorXd e = y_d_t - y_t;
  integral_ = (integral_ + e * dt)
                  .cwiseMax(-gains_.integral_limit)
                  .cwiseMin(gains_.integral_limit);
  const VectorXd de = e_prev_.size() == e.size() ? VectorXd((e - e_prev_) / dt)
                                                 : VectorXd::Zero(e.size());
  e_prev_ = e;
  const VectorXd force = gains_.kp * e + gains_.ki * integral_ + gains_.kd * de;
  const VectorXd tau =
      task_jacobian(bench_.model, bench_.q_d.col(t)).transpose() * force;
  const VectorXd bias_joint =
      VectorXd::Constant(bench_.model.n_joints(), 0.5) +
      bench_.command_map.synergy *
          (bench_.u_bias - VectorXd::Constant(bench_.u_bias.size(), 0.5));
  const VectorXd joint_cmd = bias_joint + tau.cwiseQuotient(torque_scale_);
  return bench_.command_map.from_joint_commands(joint_cmd);
}

TrialLog run_trial(const Benchmark& bench, TrialController& controller,
                   const DisturbanceSpec& disturbance, std::uint64_t seed,
                   double divergence_limit) {
  disturbance.validate();
  const ArmModel model =
      disturbance.load_fraction > 0.0
          ? bench.preset.model.with_tip_load(disturbance.load_fraction *
                                             bench.rated_load())
          : bench.model;
  const int T = bench.horizon();
  const int n = model.n_joints();
  const int n_m = model.n_muscles();
  const int m = bench.command_map.commands();

  TrialLog log;
  log.dt = bench.dt;
  log.y_d = bench.y_d;
  log.y = MatrixXd::Zero(bench.outputs(), T + 1);
  log.q = MatrixXd::Zero(n, T + 1);
  log.qdot = MatrixXd::Zero(n, T + 1);
  log.commands = MatrixXd::Zero(m, T);
  log.activations = MatrixXd::Zero(n_m, T);
  log.forces = MatrixXd::Zero(n_m, T);
  log.l_mtu = MatrixXd::Zero(n_m, T + 1);
  log.l_desired = bench.l_d;

  const ActivationNoise noise(disturbance, n_m, seed);
  const VectorXd no_force;
  ArmState state = bench.start;
  controller.begin();

  const auto record = [&](int t) {
    log.q.col(t) = state.q;
    log.qdot.col(t) = state.qdot;
    log.y.col(t) = forward_kinematics(model, state.q);
    log.l_mtu.col(t) = muscle_lengths(model, state.q);
  };

  for (int t = 0; t < T; ++t) {
    record(t);
    log.ticks_completed = t;
    if ((log.y.col(t) - bench.y_d.col(t)).norm() > divergence_limit) {
      log.diverged = true;
      log.failure = "tracking error exceeded the divergence limit";
      return log;
    }
    const VectorXd u = controller.control(t, log.y.col(t), bench.y_d.col(t),
                                          bench.y_d.col(t + 1));
    VectorXd exc = bench.command_map.excitations(model, u);
    if (noise.active()) noise.apply(t * bench.dt, exc);
    try {
      ArmStepResult r = integrate_step(model, state, exc, no_force, bench.dt);
      state = std::move(r.state);
      log.commands.col(t) = u;
      log.forces.col(t) = r.diagnostics.tendon_forces;
      for (int i = 0; i < n_m; ++i) {
        log.activations(i, t) = state.muscle_states[i].activation;
      }
      log.clamped_arguments += r.diagnostics.clamped_arguments;
      log.floored_activations += r.diagnostics.floored_activations;
      log.joint_limit_hits += r.diagnostics.joint_limit_hit ? 1 : 0;
    } catch (const std::exception& e) {
      log.diverged = true;
      log.failure = e.what();
      return log;
    }
  }
  record(T);
  log.ticks_completed = T;
  if (!log.y.allFinite()) {
    log.diverged = true;
    log.failure = "non-finite output";
    return log;
  }
  controller.end(log.y.col(T), bench.y_d.col(T));
  return log;
}

TrialMetrics metrics_from_errors_mm(const std::vector<double>& errors_mm) {
  if (errors_mm.empty()) throw DomainError("cannot compute metrics of an empty log");
  TrialMetrics out;
  double sum = 0.0, sum_sq = 0.0, peak = 0.0;
  for (double e : errors_mm) {
    const double a = std::abs(e);
    sum += a;
    sum_sq += a * a;
    peak = std::max(peak, a);
  }
  const double n = static_cast<double>(errors_mm.size());
  out.samples = errors_mm.size();
  out.mean_abs_mm = sum / n;
  out.mse_mm2 = sum_sq / n;
  out.std_mm = std::sqrt(std::max(0.0, out.mse_mm2 - out.mean_abs_mm * out.mean_abs_mm));
  out.max_mm = peak;
  return out;
}

TrialMetrics compute_metrics(const TrialLog& log) {
  const int samples = log.ticks_completed + 1;
  if (log.y.cols() == 0 || samples <= 0) {
    throw DomainError("cannot compute metrics of an empty log");
  }
  std::vector<double> err(samples);
  for (int t = 0; t < samples; ++t) {
    err[t] = (log.y_d.col(t) - log.y.col(t)).norm() * kMmPerM;
  }
  TrialMetrics out = metrics_from_errors_mm(err);
  if (log.l_mtu.rows() > 0 && log.l_desired.cols() >= samples) {
    std::vector<double> lerr;
    lerr.reserve(static_cast<std::size_t>(samples) * log.l_mtu.rows());
    for (int t = 0; t < samples; ++t) {
      for (Eigen::Index i = 0; i < log.l_mtu.rows(); ++i) {
        lerr.push_back((log.l_mtu(i, t) - log.l_desired(i, t)) * kMmPerM);
      }
    }
    const TrialMetrics lm = metrics_from_errors_mm(lerr);
    out.muscle_mean_abs_mm = lm.mean_abs_mm;
    out.muscle_mse_mm2 = lm.mse_mm2;
  }
  return out;
}

SensitivityProbe probe_sensitivity(const Benchmark& bench, double delta,
                                   double settle) {
  if (!(delta > 0.0) || !(settle > 0.0)) {
    throw DomainError("probe delta and settle time must be positive");
  }
  const int m = bench.command_map.commands();
  const int ticks = static_cast<int>(std::llround(settle / bench.dt));
  const VectorXd no_force;
  SensitivityProbe probe;
  probe.gain = MatrixXd::Zero(bench.outputs(), m);
  for (int j = 0; j < m; ++j) {
    VectorXd y_end[2];
    for (int side = 0; side < 2; ++side) {
      VectorXd u = bench.u_bias;
      u(j) = std::clamp(u(j) + (side == 0 ? delta : -delta), 0.0, 1.0);
      const VectorXd exc = bench.command_map.excitations(bench.model, u);
      ArmState s = bench.start;
      for (int t = 0; t < ticks; ++t) {
        s = integrate_step(bench.model, s, exc, no_force, bench.dt).state;
      }
      y_end[side] = forward_kinematics(bench.model, s.q);
    }
    probe.gain.col(j) = (y_end[0] - y_end[1]) / (2.0 * delta);
  }
  return probe;
}

IlcResult run_ilc(const Benchmark& bench, const IlcSettings& settings,
                  const DisturbanceSpec& disturbance, std::uint64_t seed,
                  const IterationCallback& on_iteration) {
  if (settings.iterations < 1) throw DomainError("iterations must be >= 1");
  const int m = bench.command_map.commands();
  if (bench.outputs() != m) {
    throw DomainError("controller needs as many commands as task outputs");
  }
  DdilcParams params = settings.params;
  const double phi_diag = settings.phi_diag > 0.0
                              ? settings.phi_diag
                              : std::sqrt(params.bounds.a_diag) * params.bounds.c2;
  IlcResult result;
  result.probe = probe_sensitivity(bench, settings.probe_delta, settings.probe_settle);
  Eigen::FullPivLU<MatrixXd> lu(result.probe.gain);
  if (!lu.isInvertible()) {
    throw DomainError("probed static gain is singular; outputs are not controllable");
  }
  result.output_map = phi_diag * lu.inverse();
  const MatrixXd phi0 = MatrixXd::Identity(m, m) * phi_diag;

  params.beta = (settings.beta_gain / phi_diag) * MatrixXd::Identity(m, m);
  const double xi_nominal = settings.xi_gain / phi_diag;
  if (!std::isfinite(params.xi_bound)) {
    params.xi_bound = settings.xi_bound_factor * xi_nominal;
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-1.0, 1.0);
  MatrixXd xi0 = MatrixXd::Zero(m, m * params.window);
  for (Eigen::Index i = 0; i < m; ++i) {
    xi0(i, i) = xi_nominal * (1.0 + settings.xi_jitter * jitter(rng));
  }

  DdilcController ctrl(params, phi0, xi0, bench.horizon(), bench.u_bias);
  DdilcTrialController adapter(ctrl, result.output_map);

  const MatrixXd beta0 = params.beta;
  double beta_scale = 1.0;
  double best_error = std::numeric_limits<double>::infinity();
  MatrixXd best_ff = ctrl.memory().u_ff;
  int rising = 0;
  double last_error = std::numeric_limits<double>::infinity();

  for (int k = 1; k <= settings.iterations; ++k) {
    const TrialLog log = run_trial(bench, adapter, disturbance, seed + k,
                                   std::max(0.5, 4.0 * bench.trajectory.amplitude));
    // Feedforward the trial actually used (the update for k + 1 is applied
    // lazily at the next begin_iteration).
    const MatrixXd used_ff = ctrl.memory().u_ff;
    IterationRecord rec;
    rec.iteration = k;
    rec.metrics = compute_metrics(log);
    rec.diverged = log.diverged;
    rec.beta_scale = beta_scale;

    if (!log.diverged && rec.metrics.mean_abs_mm < best_error) {
      best_error = rec.metrics.mean_abs_mm;
      best_ff = used_ff;
    }
    rising = (!log.diverged && rec.metrics.mean_abs_mm > last_error) ? rising + 1 : 0;
    last_error = rec.metrics.mean_abs_mm;
    if (on_iteration) on_iteration(k, log, ctrl);

    if (log.diverged || rising >= settings.divergence_window) {
      beta_scale *= 0.5;
      ctrl.set_beta(beta_scale * beta0);
      ctrl.restore_feedforward(best_ff);
      ctrl.discard_last_error();
      rec.monitor_event = true;
      ++result.monitor_events;
      rising = 0;
      last_error = std::numeric_limits<double>::infinity();
    }
    result.iterations.push_back(rec);
    if (k == settings.iterations) result.final_commands = log.commands;
  }
  result.final_feedforward = ctrl.memory().u_ff;
  result.final_xi = ctrl.memory().xi_hat;
  result.final_phi = ctrl.pjm().phi_hat;
  return result;
}

std::vector<SweepRow> disturbance_sweep(const Benchmark& bench,
                                        const MatrixXd& commands,
                                        const std::vector<double>& fractions,
                                        const DisturbanceSpec& noise,
                                        int repetitions, std::uint64_t seed,
                                        const SweepCallback& on_trial) {
  if (repetitions < 1) throw DomainError("repetitions must be >= 1");
  std::vector<SweepRow> rows;
  for (double f : fractions) {
    SweepRow row;
    row.fraction = f;
    row.load_kg = f * bench.rated_load();
    DisturbanceSpec d = noise;
    d.load_fraction = f;
    for (int r = 0; r < repetitions; ++r) {
      // Without activation noise every repetition is the same deterministic
      // trial.
      if (r > 0 && noise.noise_amplitude <= 0.0) {
        row.repetitions.push_back(row.repetitions.front());
        continue;
      }
      ReplayController replay(commands);
      const TrialLog log = run_trial(bench, replay, d, seed + 7919ULL * r,
                                     std::max(0.5, 4.0 * bench.trajectory.amplitude));
      row.diverged = row.diverged || log.diverged;
      row.repetitions.push_back(compute_metrics(log));
      if (on_trial) on_trial(f, r, log);
    }
    double sum = 0.0, sum_mse = 0.0;
    for (const auto& m : row.repetitions) {
      sum += m.mean_abs_mm;
      sum_mse += m.mse_mm2;
    }
    const double n = static_cast<double>(row.repetitions.size());
    row.mean_abs_mm = sum / n;
    row.mse_mm2 = sum_mse / n;
    double var = 0.0;
    for (const auto& m : row.repetitions) {
      var += (m.mean_abs_mm - row.mean_abs_mm) * (m.mean_abs_mm - row.mean_abs_mm);
    }
    row.std_over_reps_mm = std::sqrt(var / n);
    rows.push_back(std::move(row));
  }
  return rows;
}

bool non_decreasing(const std::vector<SweepRow>& rows, double tolerance) {
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].mean_abs_mm < rows[i - 1].mean_abs_mm - tolerance) return false;
  }
  return true;
}

TrialLog pid_baseline(const Benchmark& bench, const PidGains& gains,
                      const DisturbanceSpec& disturbance, std::uint64_t seed) {
  if (!std::isfinite(gains.kp) || !std::isfinite(gains.ki) ||
      !std::isfinite(gains.kd)) {
    throw DomainError("PID gains must be finite");
  }
  PidController pid(bench, gains);
  return run_trial(bench, pid, disturbance, seed,
                   std::max(0.5, 4.0 * bench.trajectory.amplitude));
}

PidTuning tune_pid(const Benchmark& bench, const std::vector<double>& kp_grid,
                   const std::vector<double>& ki_ratio_grid, double kd_ratio) {
  PidTuning out;
  double best = std::numeric_limits<double>::infinity();
  for (double kp : kp_grid) {
    for (double ki_ratio : ki_ratio_grid) {
      PidGains g{kp, kp * ki_ratio, kp * kd_ratio};
      const TrialLog log = pid_baseline(bench, g);
      ++out.candidates;
      if (log.diverged) continue;
      const TrialMetrics m = compute_metrics(log);
      if (m.mean_abs_mm < best) {
        best = m.mean_abs_mm;
        out.best = g;
        out.metrics = m;
      }
    }
  }
  if (!std::isfinite(best)) throw DomainError("every PID candidate diverged");
  return out;
}

LowpassResult lowpass_response(const MuscleParams& muscle, double carrier,
                               double amplitude, double frequency, double dt) {
  if (!(frequency > 0.0)) throw DomainError("noise frequency must be positive");
  if (carrier - amplitude < 0.0 || carrier + amplitude > 1.0) {
    throw DomainError("carrier +/- noise amplitude must stay inside [0, 1]");
  }
  LowpassResult out;
  out.frequency = frequency;
  if (amplitude <= 0.0) return out;

  const double l_mtu = reference_mtu_length(muscle, carrier, 0.8);
  MuscleState s = isometric_state(muscle, carrier, l_mtu);
  const double period = 1.0 / frequency;
  const double settle = std::max(3.0, 5.0 * period);
  const int measure_periods = static_cast<int>(std::ceil(2.0 / period));
  const int settle_ticks = static_cast<int>(std::llround(settle / dt));
  const int measure_ticks =
      static_cast<int>(std::llround(measure_periods * period / dt));

  std::vector<double> act, force;
  act.reserve(measure_ticks);
  force.reserve(measure_ticks);
  for (int i = 0; i < settle_ticks + measure_ticks; ++i) {
    const double u =
        carrier + amplitude * std::sin(2.0 * std::numbers::pi * frequency * i * dt);
    const MuscleStepResult r = step_muscle(muscle, s, u, l_mtu, dt);
    s = r.state;
    if (i >= settle_ticks) {
      act.push_back(s.activation);
      force.push_back(r.tendon_force / muscle.f0_max);
    }
  }
  // Sample k of the measured window sits at time (settle_ticks + k + 1) dt;
  // the phase offset does not affect the bin magnitude.
  out.activation_gain_db =
      20.0 * std::log10(bin_amplitude(act, frequency, dt) / amplitude);
  out.force_gain_db =
      20.0 * std::log10(bin_amplitude(force, frequency, dt) / amplitude);
  return out;
}

double effective_activation_time_constant(const MuscleParams& muscle,
                                          double carrier) {
  const double rise = activation_time_constant(muscle, 1.0, carrier);
  const double fall = activation_time_constant(muscle, 0.0, carrier);
  return 2.0 / (1.0 / rise + 1.0 / fall);
}

double first_order_attenuation_db(double tau, double f_low, double f_high) {
  const auto mag2 = [tau](double f) {
    const double w = 2.0 * std::numbers::pi * f * tau;
    return 1.0 + w * w;
  };
  return 10.0 * std::log10(mag2(f_high) / mag2(f_low));
}

LowpassComparison lowpass_attenuation_test(const MuscleParams& muscle,
                                           double carrier, double amplitude,
                                           double f_low, double f_high,
                                           double dt) {
  LowpassComparison out;
  out.low = lowpass_response(muscle, carrier, amplitude, f_low, dt);
  out.high = lowpass_response(muscle, carrier, amplitude, f_high, dt);
  out.first_order_prediction_db = first_order_attenuation_db(
      effective_activation_time_constant(muscle, carrier), f_low, f_high);
  if (out.low.force_gain_db && out.high.force_gain_db) {
    out.force_extra_attenuation_db = *out.low.force_gain_db - *out.high.force_gain_db;
    out.activation_extra_attenuation_db =
        *out.low.activation_gain_db - *out.high.activation_gain_db;
  }
  return out;
}

}  // namespace musclearm
