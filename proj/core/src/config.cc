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

#include "musclearm/config.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "musclearm/errors.h"
#include "musclearm/presets.h"

namespace musclearm {
namespace {

namespace pt = boost::property_tree;

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad_value(const std::string& field, const std::string& text,
                            const char* expected) {
  throw ConfigError(fmt::format("{}: cannot read '{}' as {}", field, text, expected),
                    field);
}

double to_double(const std::string& field, const std::string& raw) {
  const std::string text = trim(raw);
  double v = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || end != text.data() + text.size() ||
      !std::isfinite(v)) {
    bad_value(field, text, "a finite number");
  }
  return v;
}

template <typename Int>
Int to_integer(const std::string& field, const std::string& raw) {
  const std::string text = trim(raw);
  Int v = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || end != text.data() + text.size()) {
    bad_value(field, text, "an integer");
  }
  return v;
}

bool to_bool(const std::string& field, const std::string& raw) {
  std::string text = trim(raw);
  std::transform(text.begin(), text.end(), text.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  bad_value(field, text, "a boolean");
}

std::vector<double> to_list(const std::string& field, const std::string& raw) {
  std::vector<double> out;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(field, item));
  return out;
}

std::string from_double(double v) { return fmt::format("{}", v); }

std::string from_list(const std::vector<double>& v) {
  return fmt::format("{}", fmt::join(v, ", "));
}

struct Range {
  double lo = -kInf;
  double hi = kInf;
  bool lo_open = false;
  bool hi_open = false;

  bool contains(double x) const {
    return (lo_open ? x > lo : x >= lo) && (hi_open ? x < hi : x <= hi);
  }
  std::string describe() const {
    if (hi == kInf) return fmt::format("must be {} {}", lo_open ? ">" : ">=", lo);
    if (lo == -kInf) return fmt::format("must be {} {}", hi_open ? "<" : "<=", hi);
    return fmt::format("must lie in {}{}, {}{}", lo_open ? "(" : "[", lo, hi,
                       hi_open ? ")" : "]");
  }
};

constexpr Range kPositive{0.0, kInf, true, false};
constexpr Range kNonNegative{0.0, kInf, false, false};
constexpr Range kAtLeastOne{1.0, kInf, false, false};

struct Field {
  std::string section;
  std::string key;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  // Empty when the value is fine, else the reason.
  std::function<std::string(const ExperimentConfig&)> check;

  std::string name() const { return section + "." + key; }
};

template <typename T>
using Access = T& (*)(ExperimentConfig&);

template <typename T>
std::function<std::string(const ExperimentConfig&)> range_check(Access<T> acc,
                                                                 Range r) {
  return [acc, r](const ExperimentConfig& c) -> std::string {
    const double v = static_cast<double>(acc(const_cast<ExperimentConfig&>(c)));
    return r.contains(v) ? std::string() : r.describe();
  };
}

Field real(std::string s, std::string k, Access<double> acc, Range r = {}) {
  return {std::move(s), std::move(k),
          [acc](const ExperimentConfig& c) {
            return from_double(acc(const_cast<ExperimentConfig&>(c)));
          },
          [acc, f = std::string()](ExperimentConfig& c, const std::string& v) {
            acc(c) = to_double(f, v);
          },
          range_check(acc, r)};
}

Field integer(std::string s, std::string k, Access<int> acc, Range r = {}) {
  return {std::move(s), std::move(k),
          [acc](const ExperimentConfig& c) {
            return std::to_string(acc(const_cast<ExperimentConfig&>(c)));
          },
          [acc](ExperimentConfig& c, const std::string& v) {
            acc(c) = to_integer<int>({}, v);
          },
          range_check(acc, r)};
}

Field boolean(std::string s, std::string k, Access<bool> acc) {
  return {std::move(s), std::move(k),
          [acc](const ExperimentConfig& c) {
            return std::string(acc(const_cast<ExperimentConfig&>(c)) ? "true"
                                                                       : "false");
          },
          [acc](ExperimentConfig& c, const std::string& v) { acc(c) = to_bool({}, v); },
          [](const ExperimentConfig&) { return std::string(); }};
}

Field list(std::string s, std::string k, Access<std::vector<double>> acc, Range r) {
  return {std::move(s), std::move(k),
          [acc](const ExperimentConfig& c) {
            return from_list(acc(const_cast<ExperimentConfig&>(c)));
          },
          [acc](ExperimentConfig& c, const std::string& v) { acc(c) = to_list({}, v); },
          [acc, r](const ExperimentConfig& c) -> std::string {
            const auto& v = acc(const_cast<ExperimentConfig&>(c));
            if (v.empty()) return "must not be empty";
            for (double x : v) {
              if (!r.contains(x)) return "entries " + r.describe();
            }
            return {};
          }};
}

struct MuscleField {
  const char* key;
  double MuscleParams::*member;
  Range range;
};

const std::vector<MuscleField>& muscle_fields() {
  static const std::vector<MuscleField> fields = {
      {"f0_max", &MuscleParams::f0_max, kPositive},
      {"l0_fiber", &MuscleParams::l0_fiber, kPositive},
      {"l_slack_tendon", &MuscleParams::l_slack_tendon, kPositive},
      {"pennation_factor", &MuscleParams::pennation_factor, {0.0, 1.0, true, false}},
      {"t_act", &MuscleParams::t_act, kPositive},
      {"t_deact", &MuscleParams::t_deact, kPositive},
      {"gamma", &MuscleParams::gamma, kPositive},
      {"k_pe", &MuscleParams::k_pe, kPositive},
      {"eps0_m", &MuscleParams::eps0_m, kPositive},
      {"eps0_t", &MuscleParams::eps0_t, kPositive},
      {"k_toe", &MuscleParams::k_toe, kPositive},
      {"f_toe", &MuscleParams::f_toe, {0.0, 1.0, true, true}},
      {"a_min", &MuscleParams::a_min, {0.0, 1.0, true, true}},
  };
  return fields;
}

#define MA_ACCESS(type, expr) \
  +[](ExperimentConfig& c) -> type& { return c.expr; }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> t;
    t.push_back({"experiment", "name",
                 [](const ExperimentConfig& c) { return c.experiment.name; },
                 [](ExperimentConfig& c, const std::string& v) {
                   c.experiment.name = trim(v);
                 },
                 [](const ExperimentConfig& c) -> std::string {
                   const auto& n = c.experiment.name;
                   if (n.empty()) return "must not be empty";
                   const bool ok = std::all_of(n.begin(), n.end(), [](unsigned char ch) {
                     return std::isalnum(ch) || ch == '_' || ch == '-' || ch == '.';
                   });
                   return ok ? std::string() : "may only use [A-Za-z0-9_.-]";
                 }});
    t.push_back(integer("experiment", "iterations",
                        MA_ACCESS(int, experiment.iterations), kAtLeastOne));
    t.push_back(integer("experiment", "repetitions",
                        MA_ACCESS(int, experiment.repetitions), kAtLeastOne));
    t.push_back({"experiment", "seed",
                 [](const ExperimentConfig& c) {
                   return std::to_string(c.experiment.seed);
                 },
                 [](ExperimentConfig& c, const std::string& v) {
                   c.experiment.seed = to_integer<std::uint64_t>({}, v);
                 },
                 [](const ExperimentConfig&) { return std::string(); }});
    t.push_back({"experiment", "output",
                 [](const ExperimentConfig& c) { return c.experiment.output; },
                 [](ExperimentConfig& c, const std::string& v) {
                   c.experiment.output = trim(v);
                 },
                 [](const ExperimentConfig& c) {
                   return c.experiment.output.empty() ? std::string("must not be empty")
                                                      : std::string();
                 }});
    t.push_back(real("experiment", "dt", MA_ACCESS(double, experiment.dt),
                     {0.0, 0.01, true, false}));

    t.push_back({"arm", "preset", [](const ExperimentConfig& c) { return c.preset; },
                 [](ExperimentConfig& c, const std::string& v) { c.preset = trim(v); },
                 [](const ExperimentConfig& c) -> std::string {
                   const auto names = preset_names();
                   if (std::find(names.begin(), names.end(), c.preset) != names.end()) {
                     return {};
                   }
                   return fmt::format("must be one of: {}", fmt::join(names, ", "));
                 }});

    for (const MuscleField& mf : muscle_fields()) {
      const std::string key = mf.key;
      const Range r = mf.range;
      t.push_back({"muscle", key,
                   [key](const ExperimentConfig& c) {
                     return from_double(c.muscle_overrides.at(key));
                   },
                   [key](ExperimentConfig& c, const std::string& v) {
                     c.muscle_overrides[key] = to_double({}, v);
                   },
                   [key, r](const ExperimentConfig& c) -> std::string {
                     const auto it = c.muscle_overrides.find(key);
                     if (it == c.muscle_overrides.end() || r.contains(it->second)) {
                       return {};
                     }
                     return r.describe();
                   }});
    }

    t.push_back(real("controller", "eta", MA_ACCESS(double, controller.eta), kPositive));
    t.push_back(real("controller", "lambda", MA_ACCESS(double, controller.lambda),
                     kPositive));
    t.push_back(real("controller", "rho", MA_ACCESS(double, controller.rho),
                     {0.0, 1.0, true, false}));
    t.push_back(real("controller", "mu", MA_ACCESS(double, controller.mu), kPositive));
    t.push_back(integer("controller", "window", MA_ACCESS(int, controller.window),
                        {1.0, 64.0}));
    t.push_back(real("controller", "c1", MA_ACCESS(double, controller.c1), kNonNegative));
    t.push_back(real("controller", "c2", MA_ACCESS(double, controller.c2), kPositive));
    t.push_back(real("controller", "a_diag", MA_ACCESS(double, controller.a_diag),
                     kAtLeastOne));
    t.push_back(integer("controller", "learning_lead",
                        MA_ACCESS(int, controller.learning_lead), {1.0, 1e6}));
    t.push_back(boolean("controller", "carry_xi", MA_ACCESS(bool, controller.carry_xi)));
    t.push_back(real("controller", "beta_gain", MA_ACCESS(double, controller.beta_gain),
                     {0.0, 2.0, true, false}));
    t.push_back(real("controller", "xi_gain", MA_ACCESS(double, controller.xi_gain),
                     kNonNegative));
    t.push_back(real("controller", "xi_jitter", MA_ACCESS(double, controller.xi_jitter),
                     {0.0, 1.0, false, true}));
    t.push_back(real("controller", "xi_bound_factor",
                     MA_ACCESS(double, controller.xi_bound_factor), kPositive));
    t.push_back(real("controller", "phi_diag", MA_ACCESS(double, controller.phi_diag),
                     kNonNegative));
    t.push_back(real("controller", "probe_delta",
                     MA_ACCESS(double, controller.probe_delta), {0.0, 0.25, true, false}));
    t.push_back(real("controller", "probe_settle",
                     MA_ACCESS(double, controller.probe_settle), kPositive));
    t.push_back(integer("controller", "divergence_window",
                        MA_ACCESS(int, controller.divergence_window), kAtLeastOne));

    t.push_back(real("trajectory", "amplitude", MA_ACCESS(double, trajectory.amplitude),
                     kPositive));
    t.push_back(real("trajectory", "spatial_period",
                     MA_ACCESS(double, trajectory.spatial_period), kPositive));
    t.push_back(integer("trajectory", "cycles", MA_ACCESS(int, trajectory.cycles),
                        kAtLeastOne));
    t.push_back(real("trajectory", "duration", MA_ACCESS(double, trajectory.duration),
                     kPositive));

    t.push_back(real("disturbance", "load_fraction",
                     MA_ACCESS(double, disturbance.load_fraction), {0.0, 0.5}));
    t.push_back(real("disturbance", "noise_amplitude",
                     MA_ACCESS(double, disturbance.noise_amplitude), {0.0, 0.5}));
    t.push_back(real("disturbance", "noise_f_lo",
                     MA_ACCESS(double, disturbance.noise_f_lo), kPositive));
    t.push_back(real("disturbance", "noise_f_hi",
                     MA_ACCESS(double, disturbance.noise_f_hi), kPositive));
    t.push_back(integer("disturbance", "noise_components",
                        MA_ACCESS(int, disturbance.noise_components), {1.0, 256.0}));
    t.push_back(list("disturbance", "sweep_fractions",
                     MA_ACCESS(std::vector<double>, disturbance.sweep_fractions),
                     {0.0, 0.5}));

    t.push_back(real("pid", "kp", MA_ACCESS(double, pid.kp), kNonNegative));
    t.push_back(real("pid", "ki", MA_ACCESS(double, pid.ki), kNonNegative));
    t.push_back(real("pid", "kd", MA_ACCESS(double, pid.kd), kNonNegative));
    t.push_back(real("pid", "integral_limit", MA_ACCESS(double, pid.integral_limit),
                     kPositive));
    t.push_back(list("pid", "kp_grid", MA_ACCESS(std::vector<double>, pid.kp_grid),
                     kPositive));
    t.push_back(list("pid", "ki_ratio_grid",
                     MA_ACCESS(std::vector<double>, pid.ki_ratio_grid), kNonNegative));
    t.push_back(real("pid", "kd_ratio", MA_ACCESS(double, pid.kd_ratio), kNonNegative));

    t.push_back(real("lowpass", "carrier", MA_ACCESS(double, lowpass.carrier),
                     {0.0, 1.0, true, true}));
    t.push_back(real("lowpass", "amplitude", MA_ACCESS(double, lowpass.amplitude),
                     {0.0, 0.5}));
    t.push_back(real("lowpass", "f_low", MA_ACCESS(double, lowpass.f_low), kPositive));
    t.push_back(real("lowpass", "f_high", MA_ACCESS(double, lowpass.f_high), kPositive));

    t.push_back(integer("output", "log_stride", MA_ACCESS(int, output.log_stride),
                        kAtLeastOne));
    t.push_back(boolean("output", "dump_iterations",
                        MA_ACCESS(bool, output.dump_iterations)));
    return t;
  }();
  return table;
}

#undef MA_ACCESS

const Field* find_field(const std::string& section, const std::string& key) {
  for (const Field& f : fields()) {
    if (f.section == section && f.key == key) return &f;
  }
  return nullptr;
}

// Runs the setter, attaching the field name to conversion errors.
void assign(const Field& f, ExperimentConfig& c, const std::string& value) {
  try {
    f.set(c, value);
  } catch (const ConfigError& e) {
    std::string what = e.what();
    if (what.rfind(": ", 0) == 0) what = what.substr(2);
    throw ConfigError(f.name() + ": " + what, f.name());
  }
}

std::string env_name(const Field& f) {
  std::string n = "MUSCLEARM_" + f.section + "_" + f.key;
  std::transform(n.begin(), n.end(), n.begin(),
                 [](unsigned char ch) { return std::toupper(ch); });
  return n;
}

[[noreturn]] void invalid(const std::string& field, const std::string& why) {
  throw ConfigError(field + " " + why, field);
}

// 1-based line of `key` inside [section], 0 when not found.
int locate(const std::string& text, const std::string& section,
           const std::string& key) {
  std::istringstream in(text);
  std::string line;
  std::string current;
  for (int n = 1; std::getline(in, line); ++n) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == ';' || t[0] == '#') continue;
    if (t.front() == '[' && t.back() == ']') {
      current = trim(std::string_view(t).substr(1, t.size() - 2));
      if (key.empty() && current == section) return n;
      continue;
    }
    const auto eq = t.find('=');
    const std::string k = trim(std::string_view(t).substr(0, eq));
    if (current == section && k == key) return n;
  }
  return 0;
}

}  // namespace

MuscleParams ExperimentConfig::muscle_params() const {
  MuscleParams p = default_muscle_params(preset);
  for (const MuscleField& mf : muscle_fields()) {
    const auto it = muscle_overrides.find(mf.key);
    if (it != muscle_overrides.end()) p.*(mf.member) = it->second;
  }
  return p;
}

void ExperimentConfig::validate() const {
  for (const auto& [key, value] : muscle_overrides) {
    if (!find_field("muscle", key)) invalid("muscle." + key, "is not a known key");
  }
  for (const Field& f : fields()) {
    if (const std::string why = f.check(*this); !why.empty()) invalid(f.name(), why);
  }
  try {
    muscle_params().validate();
  } catch (const DomainError& e) {
    invalid("muscle", e.what());
  }
  if (!(disturbance.noise_f_lo <= disturbance.noise_f_hi)) {
    invalid("disturbance.noise_f_lo", "must be <= noise_f_hi");
  }
  if (!(lowpass.f_low < lowpass.f_high)) {
    invalid("lowpass.f_low", "must be < f_high");
  }
  if (lowpass.carrier - lowpass.amplitude < 0.0 ||
      lowpass.carrier + lowpass.amplitude > 1.0) {
    invalid("lowpass.amplitude", "must keep carrier +/- amplitude inside [0, 1]");
  }
  const int m = make_preset(preset).model.task_dims;
  const AssumptionBounds b{controller.c1, controller.c2, controller.a_diag};
  if (!b.admissible(m)) {
    invalid("controller.c2",
            fmt::format("must exceed c1 (2 a_diag + 1)(m - 1) = {} for m = {}",
                        controller.c1 * (2.0 * controller.a_diag + 1.0) * (m - 1), m));
  }
  const double ticks = trajectory.duration / experiment.dt;
  if (ticks < 10.0 || ticks > 1e7) {
    invalid("trajectory.duration", "must span between 10 and 1e7 ticks of dt");
  }
}

IlcSettings ExperimentConfig::ilc_settings() const {
  IlcSettings s;
  s.iterations = experiment.iterations;
  s.params.eta = controller.eta;
  s.params.lambda = controller.lambda;
  s.params.rho = controller.rho;
  s.params.mu = controller.mu;
  s.params.window = controller.window;
  s.params.bounds = {controller.c1, controller.c2, controller.a_diag};
  s.params.learning_lead = controller.learning_lead;
  s.params.carry_xi = controller.carry_xi;
  s.beta_gain = controller.beta_gain;
  s.xi_gain = controller.xi_gain;
  s.xi_jitter = controller.xi_jitter;
  s.xi_bound_factor = controller.xi_bound_factor;
  s.phi_diag = controller.phi_diag;
  s.probe_delta = controller.probe_delta;
  s.probe_settle = controller.probe_settle;
  s.divergence_window = controller.divergence_window;
  return s;
}

TrajectorySpec ExperimentConfig::trajectory_spec() const {
  TrajectorySpec t;
  t.amplitude = trajectory.amplitude;
  t.spatial_period = trajectory.spatial_period;
  t.cycles = trajectory.cycles;
  t.duration = trajectory.duration;
  return t;
}

DisturbanceSpec ExperimentConfig::disturbance_spec() const {
  DisturbanceSpec d;
  d.load_fraction = disturbance.load_fraction;
  d.noise_amplitude = disturbance.noise_amplitude;
  d.noise_f_lo = disturbance.noise_f_lo;
  d.noise_f_hi = disturbance.noise_f_hi;
  d.noise_components = disturbance.noise_components;
  return d;
}

PidGains ExperimentConfig::pid_gains() const {
  return {pid.kp, pid.ki, pid.kd, pid.integral_limit};
}

ExperimentConfig parse_config(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(fmt::format("line {}: {}", e.line(), e.message()), "",
                      static_cast<int>(e.line()));
  }
  ExperimentConfig cfg;
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      if (!body.data().empty()) {
        throw ConfigError("key '" + section + "' must sit inside a [section]", section,
                          locate(text, "", section));
      }
    }
    bool known = false;
    for (const Field& f : fields()) known = known || f.section == section;
    if (!known) {
      const int line = locate(text, section, "");
      throw ConfigError(fmt::format("line {}: unknown section [{}]", line, section),
                        section, line);
    }
    if (body.empty()) continue;
    for (const auto& [key, value] : body) {
      const int line = locate(text, section, key);
      const Field* f = find_field(section, key);
      if (!f) {
        throw ConfigError(fmt::format("line {}: unknown key {}.{}", line, section, key),
                          section + "." + key, line);
      }
      try {
        assign(*f, cfg, value.data());
      } catch (const ConfigError& e) {
        throw ConfigError(fmt::format("line {}: {}", line, e.what()), e.field(), line);
      }
    }
  }
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    const auto dot = e.field().find('.');
    const int line = dot == std::string::npos
                         ? 0
                         : locate(text, e.field().substr(0, dot), e.field().substr(dot + 1));
    if (line == 0) throw;
    throw ConfigError(fmt::format("line {}: {}", line, e.what()), e.field(), line);
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& config) {
  std::string out;
  std::string section;
  for (const Field& f : fields()) {
    if (f.section == "muscle" && !config.muscle_overrides.count(f.key)) continue;
    if (f.section != section) {
      if (!out.empty()) out += '\n';
      out += "[" + f.section + "]\n";
      section = f.section;
    }
    out += f.key + " = " + f.get(config) + "\n";
  }
  if (config.muscle_overrides.empty()) {
    // Keep the section order stable even without overrides.
    const auto pos = out.find("[controller]");
    out.insert(pos, "[muscle]\n\n");
  }
  return out;
}

void apply_env_overrides(ExperimentConfig& config, const EnvLookup& lookup) {
  const EnvLookup get = lookup ? lookup : [](const std::string& name) {
    const char* v = std::getenv(name.c_str());
    return v ? std::optional<std::string>(v) : std::nullopt;
  };
  for (const Field& f : fields()) {
    if (const auto v = get(env_name(f))) assign(f, config, *v);
  }
  config.validate();
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const Field& f : fields()) out.push_back(f.name());
  return out;
}

}  // namespace musclearm
