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

#include "musclearm/dispatch.h"

#include <algorithm>
#include <exception>
#include <memory>

#include <fmt/format.h>
#include <json.hpp>

#include "musclearm/arm.h"
#include "musclearm/errors.h"
#include "musclearm/harness.h"
#include "musclearm/io.h"
#include "musclearm/presets.h"

namespace musclearm {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

constexpr const char* kSummarySchema = "musclearm-summary v1";

json metrics_json(const TrialMetrics& m) {
  return {{"mean_abs_mm", m.mean_abs_mm},
          {"mse_mm2", m.mse_mm2},
          {"std_mm", m.std_mm},
          {"max_mm", m.max_mm},
          {"muscle_mean_abs_mm", m.muscle_mean_abs_mm},
          {"muscle_mse_mm2", m.muscle_mse_mm2},
          {"samples", m.samples}};
}

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json trial_counters(const TrialLog& log) {
  return {{"diverged", log.diverged},
          {"failure", log.failure},
          {"ticks_completed", log.ticks_completed},
          {"clamped_arguments", log.clamped_arguments},
          {"floored_activations", log.floored_activations},
          {"joint_limit_hits", log.joint_limit_hits}};
}

// Shared state of one command invocation.
class Run {
 public:
  Run(const DispatchOptions& options, ExperimentConfig config, std::ostream& log)
      : options_(options),
        cfg_(std::move(config)),
        log_(log),
        root_(fs::path(cfg_.experiment.output) / cfg_.experiment.name) {
    ensure_dir(root_);
    write_config_copy(root_, cfg_);
    summary_["schema"] = kSummarySchema;
    summary_["command"] = options_.command;
    summary_["experiment"] = cfg_.experiment.name;
    summary_["preset"] = cfg_.preset;
    summary_["seed"] = cfg_.experiment.seed;
    summary_["config"] = serialize_config(cfg_);
  }

  const ExperimentConfig& cfg() const { return cfg_; }
  const fs::path& root() const { return root_; }
  json& summary() { return summary_; }

  fs::path condition(const std::string& name) {
    const fs::path dir = ensure_dir(root_ / name);
    write_config_copy(dir, cfg_);
    return dir;
  }

  const Benchmark& bench() {
    if (!bench_) {
      progress("building benchmark '{}'", cfg_.preset);
      const ArmPreset preset = make_preset(cfg_.preset, cfg_.muscle_params());
      bench_ = make_benchmark(preset, cfg_.trajectory_spec(), cfg_.experiment.dt);
    }
    return *bench_;
  }

  template <typename... Args>
  void progress(fmt::format_string<Args...> f, Args&&... args) {
    if (!options_.quiet) log_ << fmt::format(f, std::forward<Args>(args)...) << '\n';
  }

  void finish() {
    write_text(root_ / "run_summary.json", summary_.dump(2) + "\n");
  }

  IlcResult learn(const fs::path& dir) {
    const Benchmark& b = bench();
    const int stride = cfg_.output.log_stride;
    const bool dumps = cfg_.output.dump_iterations;
    const IterationCallback cb = [&](int k, const TrialLog& log,
                                     const DdilcController& ctrl) {
      const TrialMetrics m = compute_metrics(log);
      progress("iter {:3d}  mean {:.4f} mm  max {:.4f} mm{}", k, m.mean_abs_mm,
               m.max_mm, log.diverged ? "  (diverged)" : "");
      if (!dumps) return;
      write_trial_csv(dir / fmt::format("iter_{}.csv", k), log, stride);
      write_matrix_csv(dir / fmt::format("phi_{}.csv", k), "phi_hat", ctrl.pjm().phi_hat);
      write_matrix_csv(dir / fmt::format("xi_{}.csv", k), "xi_hat", ctrl.memory().xi_hat);
      const Eigen::MatrixXd& uff = ctrl.memory().u_ff;
      std::vector<std::string> header = {"t"};
      for (Eigen::Index i = 0; i < uff.rows(); ++i) header.push_back(fmt::format("uff{}", i));
      std::vector<std::vector<double>> rows;
      for (Eigen::Index t = 0; t < uff.cols(); t += stride) {
        std::vector<double> row = {static_cast<double>(t) * b.dt};
        for (Eigen::Index i = 0; i < uff.rows(); ++i) row.push_back(uff(i, t));
        rows.push_back(std::move(row));
      }
      write_csv(dir / fmt::format("uff_{}.csv", k), "feedforward", header, rows);
    };
    IlcResult r = run_ilc(b, cfg_.ilc_settings(), cfg_.disturbance_spec(),
                          cfg_.experiment.seed, cb);

    json its = json::array();
    for (const IterationRecord& rec : r.iterations) {
      json j = {{"iteration", rec.iteration}};
      j.update(metrics_json(rec.metrics));
      j["diverged"] = rec.diverged;
      j["beta_scale"] = rec.beta_scale;
      j["monitor_event"] = rec.monitor_event;
      its.push_back(std::move(j));
    }
    std::vector<std::vector<double>> curve;
    for (const IterationRecord& rec : r.iterations) {
      curve.push_back({static_cast<double>(rec.iteration), rec.metrics.mean_abs_mm,
                       rec.metrics.mse_mm2, rec.metrics.std_mm, rec.metrics.max_mm});
    }
    write_csv(dir / "error_curve.csv", "ilc-error-curve",
              {"iteration", "mean_abs_mm", "mse_mm2", "std_mm", "max_mm"}, curve);

    const TrialMetrics& first = r.iterations.front().metrics;
    const TrialMetrics& last = r.iterations.back().metrics;
    summary_["ilc"] = {
        {"iterations", its},
        {"final", metrics_json(last)},
        {"final_over_first", first.mean_abs_mm > 0.0 ? last.mean_abs_mm / first.mean_abs_mm
                                                     : 0.0},
        {"final_over_amplitude", last.mean_abs_mm / (1000.0 * b.trajectory.amplitude)},
        {"monitor_events", r.monitor_events},
        {"probe_gain", matrix_json(r.probe.gain)},
        {"output_map", matrix_json(r.output_map)},
        {"final_phi", matrix_json(r.final_phi)},
        {"final_xi", matrix_json(r.final_xi)}};
    return r;
  }

 private:
  const DispatchOptions& options_;
  ExperimentConfig cfg_;
  std::ostream& log_;
  fs::path root_;
  json summary_;
  std::optional<Benchmark> bench_;
};

void cmd_curves(Run& run) {
  write_curves_csv(run.root() / "curves.csv", run.cfg().muscle_params());
  run.summary()["files"] = {"curves.csv"};
}

void cmd_simulate(Run& run, const std::string& controller) {
  const Benchmark& b = run.bench();
  std::unique_ptr<TrialController> ctrl;
  if (controller == "hold") {
    ctrl = std::make_unique<ConstantController>(b.u_bias);
  } else if (controller == "pid") {
    ctrl = std::make_unique<PidController>(b, run.cfg().pid_gains());
  } else {
    throw ConfigError("unknown simulate controller '" + controller + "' (hold, pid)",
                      "controller");
  }
  const fs::path dir = run.condition("simulate_" + controller);
  const TrialLog log =
      run_trial(b, *ctrl, run.cfg().disturbance_spec(), run.cfg().experiment.seed);
  write_trial_csv(dir / "iter_1.csv", log, run.cfg().output.log_stride);
  run.summary()["simulate"] = {{"controller", controller},
                               {"metrics", metrics_json(compute_metrics(log))},
                               {"trial", trial_counters(log)}};
}

void cmd_ilc(Run& run) { run.learn(run.condition("ilc")); }

void cmd_sweep(Run& run) {
  const IlcResult learned = run.learn(run.condition("ilc"));
  const ExperimentConfig& cfg = run.cfg();
  DisturbanceSpec noise = cfg.disturbance_spec();
  noise.load_fraction = 0.0;
  std::vector<fs::path> dirs;
  for (double f : cfg.disturbance.sweep_fractions) {
    dirs.push_back(run.condition("load_" + format_number(f)));
  }
  const auto& fractions = cfg.disturbance.sweep_fractions;
  const SweepCallback cb = [&](double f, int rep, const TrialLog& log) {
    const auto it = std::find(fractions.begin(), fractions.end(), f);
    const fs::path dir = dirs[static_cast<std::size_t>(it - fractions.begin())];
    write_trial_csv(dir / fmt::format("rep_{}.csv", rep + 1), log,
                    cfg.output.log_stride);
    run.progress("load {:.3f}  rep {}  mean {:.4f} mm", f, rep + 1,
                 compute_metrics(log).mean_abs_mm);
  };
  const auto rows =
      disturbance_sweep(run.bench(), learned.final_commands, fractions, noise,
                        cfg.experiment.repetitions, cfg.experiment.seed, cb);
  json table = json::array();
  std::vector<std::vector<double>> csv;
  for (const SweepRow& r : rows) {
    table.push_back({{"fraction", r.fraction},
                     {"load_kg", r.load_kg},
                     {"mean_abs_mm", r.mean_abs_mm},
                     {"mse_mm2", r.mse_mm2},
                     {"std_over_reps_mm", r.std_over_reps_mm},
                     {"diverged", r.diverged},
                     {"repetitions", static_cast<int>(r.repetitions.size())}});
    csv.push_back({r.fraction, r.load_kg, r.mean_abs_mm, r.mse_mm2, r.std_over_reps_mm,
                   r.diverged ? 1.0 : 0.0});
  }
  write_csv(run.root() / "sweep.csv", "sweep",
            {"fraction", "load_kg", "mean_abs_mm", "mse_mm2", "std_over_reps_mm",
             "diverged"},
            csv);
  run.summary()["sweep"] = {{"rows", table}, {"non_decreasing", non_decreasing(rows)}};
}

void cmd_compare(Run& run) {
  const IlcResult learned = run.learn(run.condition("ilc"));
  const ExperimentConfig& cfg = run.cfg();
  const Benchmark& b = run.bench();
  PidGains gains = cfg.pid_gains();
  bool tuned = false;
  if (gains.kp == 0.0 && gains.ki == 0.0 && gains.kd == 0.0) {
    run.progress("tuning PID stand-in on {} candidates",
                 cfg.pid.kp_grid.size() * cfg.pid.ki_ratio_grid.size());
    gains = tune_pid(b, cfg.pid.kp_grid, cfg.pid.ki_ratio_grid, cfg.pid.kd_ratio).best;
    gains.integral_limit = cfg.pid.integral_limit;
    tuned = true;
  }
  const TrialLog pid = pid_baseline(b, gains, cfg.disturbance_spec(), cfg.experiment.seed);
  write_trial_csv(run.condition("pid") / "iter_1.csv", pid, cfg.output.log_stride);
  const TrialMetrics pm = compute_metrics(pid);
  run.progress("pid  mean {:.4f} mm", pm.mean_abs_mm);
  run.summary()["compare"] = {
      {"ddilc_final", metrics_json(learned.iterations.back().metrics)},
      {"pid_stand_in",
       {{"kp", gains.kp},
        {"ki", gains.ki},
        {"kd", gains.kd},
        {"tuned", tuned},
        {"metrics", metrics_json(pm)},
        {"trial", trial_counters(pid)}}}};
}

void cmd_lowpass(Run& run) {
  const ExperimentConfig& cfg = run.cfg();
  const MuscleParams p = cfg.muscle_params();
  const auto& lp = cfg.lowpass;
  const LowpassComparison c = lowpass_attenuation_test(p, lp.carrier, lp.amplitude,
                                                       lp.f_low, lp.f_high,
                                                       cfg.experiment.dt);
  std::vector<double> freqs = {lp.f_low, 2.0, 5.0, 10.0, 20.0, lp.f_high};
  std::sort(freqs.begin(), freqs.end());
  freqs.erase(std::unique(freqs.begin(), freqs.end()), freqs.end());
  const double tau = effective_activation_time_constant(p, lp.carrier);
  std::vector<std::vector<double>> rows;
  for (double f : freqs) {
    const LowpassResult r =
        lowpass_response(p, lp.carrier, lp.amplitude, f, cfg.experiment.dt);
    rows.push_back({f, r.activation_gain_db.value_or(0.0), r.force_gain_db.value_or(0.0),
                    -first_order_attenuation_db(tau, 0.0, f)});
  }
  write_csv(run.root() / "lowpass.csv", "lowpass",
            {"frequency_hz", "activation_gain_db", "force_gain_db", "first_order_db"},
            rows);
  run.summary()["lowpass"] = {
      {"f_low", lp.f_low},
      {"f_high", lp.f_high},
      {"force_extra_attenuation_db", c.force_extra_attenuation_db.value_or(0.0)},
      {"activation_extra_attenuation_db",
       c.activation_extra_attenuation_db.value_or(0.0)},
      {"first_order_prediction_db", c.first_order_prediction_db},
      {"effective_tau_s", tau}};
}

std::string error_json(const std::string& type, const std::string& message,
                       const std::string& field = {}, int line = 0) {
  json e = {{"type", type}, {"message", message}};
  if (!field.empty()) e["field"] = field;
  if (line > 0) e["line"] = line;
  return json{{"error", e}}.dump();
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"curves", "simulate", "ilc",
                                                 "sweep",  "compare",  "lowpass"};
  return names;
}

ExperimentConfig resolve_config(const DispatchOptions& options) {
  ExperimentConfig cfg;
  if (options.config_path) {
    cfg = load_config(*options.config_path);
  } else if (options.config_text) {
    cfg = parse_config(*options.config_text);
  }
  if (options.use_env) apply_env_overrides(cfg);
  if (options.seed) cfg.experiment.seed = *options.seed;
  if (options.out) cfg.experiment.output = *options.out;
  if (options.preset) cfg.preset = *options.preset;
  cfg.validate();
  return cfg;
}

DispatchOutcome dispatch(const DispatchOptions& options, std::ostream& log) {
  DispatchOutcome outcome;
  try {
    const auto& names = command_names();
    if (std::find(names.begin(), names.end(), options.command) == names.end()) {
      outcome.exit_code = 2;
      outcome.message = error_json("usage", "unknown command '" + options.command + "'");
      return outcome;
    }
    Run run(options, resolve_config(options), log);
    outcome.output_dir = run.root();
    const std::string& c = options.command;
    if (c == "curves") cmd_curves(run);
    if (c == "simulate") cmd_simulate(run, options.controller);
    if (c == "ilc") cmd_ilc(run);
    if (c == "sweep") cmd_sweep(run);
    if (c == "compare") cmd_compare(run);
    if (c == "lowpass") cmd_lowpass(run);
    run.finish();
    outcome.message = json{{"status", "ok"},
                           {"command", c},
                           {"output", run.root().generic_string()}}
                          .dump();
  } catch (const ConfigError& e) {
    outcome.exit_code = 2;
    outcome.message = error_json("config", e.what(), e.field(), e.line());
  } catch (const std::filesystem::filesystem_error& e) {
    outcome.exit_code = 4;
    outcome.message = error_json("io", e.what());
  } catch (const IoError& e) {
    outcome.exit_code = 4;
    outcome.message = error_json("io", e.what());
  } catch (const UnreachableError& e) {
    outcome.exit_code = 3;
    outcome.message = error_json("unreachable", e.what());
  } catch (const std::logic_error& e) {
    // DomainError and OutOfRangeError
    outcome.exit_code = 3;
    outcome.message = error_json("domain", e.what());
  } catch (const std::runtime_error& e) {
    outcome.exit_code = 3;
    outcome.message = error_json("model", e.what());
  } catch (const std::exception& e) {
    outcome.exit_code = 1;
    outcome.message = error_json("internal", e.what());
  }
  return outcome;
}

}  // namespace musclearm
