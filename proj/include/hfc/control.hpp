#pragma once

// External force loop: force error and its change, incremental PI and
// fuzzy-PI laws producing Cartesian displacement increments, direction
// selection and clamped accumulation of the correction.

#include <array>
#include <variant>

#include "hfc/fuzzy.hpp"

namespace hfc {

enum class Axis : int { X = 0, Z = 1 };
inline constexpr std::array<Axis, 2> kAxes = {Axis::X, Axis::Z};

/// Pair of per-axis values in the x-z plane.
template <typename T>
struct PerAxis {
  T x{};
  T z{};

  T& operator[](Axis a) { return a == Axis::X ? x : z; }
  const T& operator[](Axis a) const { return a == Axis::X ? x : z; }
  bool operator==(const PerAxis&) const = default;
};

/// Force along x and z [N].
using AxisForce = PerAxis<double>;
using ForceSetpoint = PerAxis<double>;

}  // namespace hfc

namespace hfc::control {

enum class ControllerKind { PI, FuzzyPI };

/// kp maps a change of force error [N] to displacement [m]; ki maps force
/// error [N] to displacement [m].
struct PIGains {
  double kp = 0.0;
  double ki = 0.0;
  bool operator==(const PIGains&) const = default;
};

/// kp scales de and ki scales e into the normalized universe [1/N];
/// kx scales the defuzzified output to a displacement [m].
struct FuzzyPIGains {
  double kp = 0.0;
  double ki = 0.0;
  double kx = 0.0;
  bool operator==(const FuzzyPIGains&) const = default;
};

struct Limits {
  double du_max = 0.5e-3;  // per-tick displacement limit [m]
  double u_min = -20e-3;   // [m]
  double u_max = 20e-3;    // [m]
  bool operator==(const Limits&) const = default;
};

struct ControllerState {
  double u_accum = 0.0;
  double e_prev = 0.0;
  bool initialized = false;
};

struct ErrorSample {
  double e = 0.0;
  double de = 0.0;
};

/// e = f_d - f_e; de = e - e_prev, or 0 on the first call. Updates e_prev.
ErrorSample error_step(double f_desired, double f_measured, ControllerState& state);

/// Incremental PI law kp*de + ki*e, clamped to +-du_max.
double pi_step(const PIGains& gains, double e, double de, double du_max);

/// kx * CoA(infer(fuzzify(ki*e), fuzzify(kp*de))); |result| <= kx.
double fuzzy_pi_step(const FuzzyPIGains& gains, double e, double de,
                     const fuzzy::Engine& engine);

/// Axes whose flag is false carry no force correction.
using SelectionMatrix = PerAxis<bool>;

inline constexpr SelectionMatrix kSelectAll{true, true};

PerAxis<double> apply_selection(const SelectionMatrix& s, const PerAxis<double>& du);

/// u = clamp(u_accum + du, u_min, u_max); stored back into the state.
double accumulate(ControllerState& state, double du, double u_min, double u_max);

/// One scalar force controller for a single axis.
class AxisController {
 public:
  explicit AxisController(PIGains gains, Limits limits = {});
  AxisController(FuzzyPIGains gains, const fuzzy::Engine& engine, Limits limits = {});

  ControllerKind kind() const;
  const Limits& limits() const { return limits_; }
  const std::variant<PIGains, FuzzyPIGains>& gains() const { return gains_; }

  /// Unclamped-by-selection increment for an error sample.
  double increment(const ErrorSample& err) const;

 private:
  std::variant<PIGains, FuzzyPIGains> gains_;
  const fuzzy::Engine* engine_ = nullptr;
  Limits limits_;
};

struct HybridOutput {
  PerAxis<double> e;
  PerAxis<double> de;
  PerAxis<double> du;  // after selection and the per-tick clamp
  PerAxis<double> u;   // accumulated correction
};

/// error_step -> law -> apply_selection -> accumulate on each axis.
/// Errors are tracked on every axis; deselected axes keep their correction.
HybridOutput hybrid_step(const ForceSetpoint& setpoint, const AxisForce& measured,
                         const PerAxis<const AxisController*>& controllers,
                         const SelectionMatrix& selection, PerAxis<ControllerState>& states);

}  // namespace hfc::control
