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

#include "musclearm/muscle.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include <boost/math/tools/roots.hpp>

#include "musclearm/errors.h"

namespace musclearm {
namespace {

// The fv curve is monotone for (1 - v)^-2 above this value; below it the
// exponent turns back up and fv dips slightly negative before returning to 0.
constexpr double kFvMonotoneS = 0.1 / 2.2;
constexpr double kFvUpperBracket = 1.0 - 1e-3;

double fv_lower_bracket() { return 1.0 - 1.0 / std::sqrt(kFvMonotoneS); }

void require_unit_interval(double x, const char* name) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw DomainError(std::string(name) + " must lie in [0, 1], got " +
                      std::to_string(x));
  }
}

void require_positive(double x, const char* name) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError(std::string(name) + " must be positive, got " +
                      std::to_string(x));
  }
}

// A = F_toe k e^k / (e^k - 1): toe-region slope at the transition times
// eps_toe.
double toe_slope_factor(const MuscleParams& p) {
  const double ek = std::exp(p.k_toe);
  return p.f_toe * p.k_toe * ek / (ek - 1.0);
}

}  // namespace

double MuscleParams::eps_toe() const {
  // (1 - x) / x = (1 - F_toe) / A with x = eps_toe / eps0_t.
  const double ratio = (1.0 - f_toe) / toe_slope_factor(*this);
  return eps0_t / (1.0 + ratio);
}

double MuscleParams::k_lin() const {
  return toe_slope_factor(*this) / eps_toe();
}

void MuscleParams::validate() const {
  require_positive(f0_max, "f0_max");
  require_positive(l0_fiber, "l0_fiber");
  require_positive(l_slack_tendon, "l_slack_tendon");
  require_positive(t_act, "t_act");
  require_positive(t_deact, "t_deact");
  require_positive(gamma, "gamma");
  require_positive(k_pe, "k_pe");
  require_positive(eps0_m, "eps0_m");
  require_positive(eps0_t, "eps0_t");
  require_positive(k_toe, "k_toe");
  if (!(pennation_factor > 0.0 && pennation_factor <= 1.0)) {
    throw DomainError("pennation_factor must lie in (0, 1]");
  }
  if (!(f_toe > 0.0 && f_toe < 1.0)) {
    throw DomainError("f_toe must lie in (0, 1)");
  }
  if (!(a_min > 0.0 && a_min < 1.0)) {
    throw DomainError("a_min must lie in (0, 1)");
  }
}

double activation_time_constant(const MuscleParams& p, double u, double a) {
  require_unit_interval(u, "excitation u");
  require_unit_interval(a, "activation a");
  const double s = 0.5 + 1.5 * a;
  return u >= a ? p.t_act * s : p.t_deact / s;
}

double activation_rate(const MuscleParams& p, double u, double a) {
  return (u - a) / activation_time_constant(p, u, a);
}

double active_force_length(const MuscleParams& p, double l_norm) {
  if (!(l_norm > 0.0)) throw DomainError("fiber length must be positive");
  const double d = l_norm - 1.0;
  return std::exp(-2.0 * d * d / p.gamma);
}

double passive_force_length(const MuscleParams& p, double l_norm) {
  if (!(l_norm > 0.0)) throw DomainError("fiber length must be positive");
  return std::expm1(p.k_pe * (l_norm - 1.0) / p.eps0_m) / std::expm1(p.k_pe);
}

double force_velocity(double v_norm) {
  if (!(v_norm < 1.0)) {
    throw DomainError("force_velocity requires v_norm < 1");
  }
  const double s = 1.0 / ((1.0 - v_norm) * (1.0 - v_norm));
  return kFvPlateau - kFvPlateau * std::exp(-1.1 * s * s + 0.1 * s);
}

double inverse_force_velocity(double fv_target) {
  if (!(fv_target > 0.0 && fv_target < kFvPlateau)) {
    throw OutOfRangeError("inverse_force_velocity target must lie in (0, 1.6)");
  }
  const auto residual = [fv_target](double v) {
    return force_velocity(v) - fv_target;
  };
  double lo = fv_lower_bracket();
  double hi = kFvUpperBracket;
  // fv is flat to machine precision near the plateau; widen toward 1 when
  // the target sits above fv(hi).
  while (residual(hi) < 0.0 && hi < 1.0 - 1e-9) hi = 1.0 - (1.0 - hi) * 0.1;
  std::uintmax_t max_iter = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(
      residual, lo, hi, boost::math::tools::eps_tolerance<double>(52),
      max_iter);
  return 0.5 * (a + b);
}

double tendon_force(const MuscleParams& p, double strain) {
  if (strain <= 0.0) return 0.0;
  const double eps_toe = p.eps_toe();
  if (strain <= eps_toe) {
    return p.f_toe / std::expm1(p.k_toe) *
           std::expm1(p.k_toe * strain / eps_toe);
  }
  return p.k_lin() * (strain - eps_toe) + p.f_toe;
}

double tendon_strain(const MuscleParams& p, double l_fiber_norm,
                     double l_mtu) {
  const double l_tendon =
      l_mtu - l_fiber_norm * p.l0_fiber * p.pennation_factor;
  return l_tendon / p.l_slack_tendon - 1.0;
}

EquilibriumResult fiber_velocity_from_equilibrium(const MuscleParams& p,
                                                  const MuscleState& state,
                                                  double a, double l_mtu) {
  require_unit_interval(a, "activation a");
  if (!(l_mtu > 0.0)) throw DomainError("MTU length must be positive");

  EquilibriumResult out;
  double a_eff = a;
  if (a_eff < p.a_min) {
    a_eff = p.a_min;
    out.activation_floored = true;
  }
  const double l = state.l_fiber_norm;
  const double strain = tendon_strain(p, l, l_mtu);
  out.tendon_slack = strain <= 0.0;
  out.tendon_force_norm = tendon_force(p, strain);

  const double fl = active_force_length(p, l);
  const double active_capacity = a_eff * fl;
  if (active_capacity < 1e-9) {
    throw DegenerateEquilibrium("a * fl below the equilibrium floor");
  }
  double arg =
      (out.tendon_force_norm / p.pennation_factor - passive_force_length(p, l)) /
      active_capacity;

  static const double kArgLo = force_velocity(-1.0) + 1e-6;
  constexpr double kArgHi = kFvPlateau - 1e-6;
  if (arg < kArgLo) {
    arg = kArgLo;
    out.argument_clamped = true;
  } else if (arg > kArgHi) {
    arg = kArgHi;
    out.argument_clamped = true;
  }
  out.v_norm = inverse_force_velocity(arg);
  return out;
}

MuscleStepResult step_muscle(const MuscleParams& p, const MuscleState& state,
                             double u, double l_mtu, double dt) {
  if (!(dt > 0.0)) throw DomainError("dt must be positive");
  require_unit_interval(u, "excitation u");

  MuscleStepResult out;
  out.equilibrium =
      fiber_velocity_from_equilibrium(p, state, state.activation, l_mtu);

  const double t_a = activation_time_constant(p, u, state.activation);
  out.state.activation = u + (state.activation - u) * std::exp(-dt / t_a);
  out.state.v_fiber_norm = out.equilibrium.v_norm;
  out.state.l_fiber_norm = state.l_fiber_norm + out.equilibrium.v_norm * dt;

  out.tendon_force =
      p.f0_max *
      tendon_force(p, tendon_strain(p, out.state.l_fiber_norm, l_mtu));
  return out;
}

double isometric_fiber_length(const MuscleParams& p, double a, double l_mtu) {
  require_unit_interval(a, "activation a");
  const double a_eff = std::max(a, p.a_min);
  const double fv0 = force_velocity(0.0);
  const double l_slack =
      (l_mtu - p.l_slack_tendon) / (p.l0_fiber * p.pennation_factor);
  constexpr double kShortest = 0.2;
  if (l_slack <= kShortest) return 1.0;

  const auto g = [&](double l) {
    return tendon_force(p, tendon_strain(p, l, l_mtu)) / p.pennation_factor -
           passive_force_length(p, l) - a_eff * active_force_length(p, l) * fv0;
  };
  // Walk down from the slack length to the first sign change; this picks
  // the root closest to the slack side when the descending limb allows
  // several.
  constexpr double kStep = 0.01;
  double hi = l_slack;
  double g_hi = g(hi);
  for (double lo = hi - kStep; lo >= kShortest; lo -= kStep) {
    const double g_lo = g(lo);
    if ((g_lo > 0.0) != (g_hi > 0.0)) {
      std::uintmax_t max_iter = 200;
      const auto [x0, x1] = boost::math::tools::toms748_solve(
          g, lo, hi, g_lo, g_hi,
          boost::math::tools::eps_tolerance<double>(52), max_iter);
      return 0.5 * (x0 + x1);
    }
    hi = lo;
    g_hi = g_lo;
  }
  throw DegenerateEquilibrium("no isometric fiber length for this MTU length");
}

MuscleState isometric_state(const MuscleParams& p, double a, double l_mtu) {
  MuscleState s;
  s.activation = a;
  s.l_fiber_norm = isometric_fiber_length(p, a, l_mtu);
  s.v_fiber_norm = 0.0;
  return s;
}

}  // namespace musclearm
