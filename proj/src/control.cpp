#include "hfc/control.hpp"

#include <algorithm>
#include <cmath>

namespace hfc::control {

ErrorSample error_step(double f_desired, double f_measured, ControllerState& state) {
  ErrorSample s;
  s.e = f_desired - f_measured;
  s.de = state.initialized ? s.e - state.e_prev : 0.0;
  state.e_prev = s.e;
  state.initialized = true;
  return s;
}

double pi_step(const PIGains& gains, double e, double de, double du_max) {
  return std::clamp(gains.kp * de + gains.ki * e, -du_max, du_max);
}

double fuzzy_pi_step(const FuzzyPIGains& gains, double e, double de,
                     const fuzzy::Engine& engine) {
  const double e_norm = std::clamp(gains.ki * e, -1.0, 1.0);
  const double de_norm = std::clamp(gains.kp * de, -1.0, 1.0);
  return gains.kx * engine.evaluate(e_norm, de_norm);
}

PerAxis<double> apply_selection(const SelectionMatrix& s, const PerAxis<double>& du) {
  return {s.x ? du.x : 0.0, s.z ? du.z : 0.0};
}

double accumulate(ControllerState& state, double du, double u_min, double u_max) {
  state.u_accum = std::clamp(state.u_accum + du, u_min, u_max);
  return state.u_accum;
}

AxisController::AxisController(PIGains gains, Limits limits)
    : gains_(gains), limits_(limits) {}

AxisController::AxisController(FuzzyPIGains gains, const fuzzy::Engine& engine, Limits limits)
    : gains_(gains), engine_(&engine), limits_(limits) {}

ControllerKind AxisController::kind() const {
  return std::holds_alternative<PIGains>(gains_) ? ControllerKind::PI : ControllerKind::FuzzyPI;
}

double AxisController::increment(const ErrorSample& err) const {
  if (const auto* pi = std::get_if<PIGains>(&gains_)) {
    return pi_step(*pi, err.e, err.de, limits_.du_max);
  }
  const auto& fz = std::get<FuzzyPIGains>(gains_);
  return std::clamp(fuzzy_pi_step(fz, err.e, err.de, *engine_), -limits_.du_max,
                    limits_.du_max);
}

HybridOutput hybrid_step(const ForceSetpoint& setpoint, const AxisForce& measured,
                         const PerAxis<const AxisController*>& controllers,
                         const SelectionMatrix& selection, PerAxis<ControllerState>& states) {
  HybridOutput out;
  PerAxis<double> raw;
  for (Axis a : kAxes) {
    const ErrorSample err = error_step(setpoint[a], measured[a], states[a]);
    out.e[a] = err.e;
    out.de[a] = err.de;
    raw[a] = controllers[a] ? controllers[a]->increment(err) : 0.0;
  }
  out.du = apply_selection(selection, raw);
  for (Axis a : kAxes) {
    const Limits lim = controllers[a] ? controllers[a]->limits() : Limits{};
    out.u[a] = accumulate(states[a], out.du[a], lim.u_min, lim.u_max);
  }
  return out;
}

}  // namespace hfc::control
