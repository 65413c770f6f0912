#pragma once

// Closed-loop hybrid force/motion simulation: scenarios, the fixed-step
// loop, response metrics, controller comparison and the grid-search tuner.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hfc/control.hpp"
#include "hfc/plant.hpp"

namespace hfc::sim {

struct Waypoint {
  double t = 0.0;
  plant::Pose pose;
  bool operator==(const Waypoint&) const = default;
};

/// Piecewise-linear nominal path; holds the end poses outside its time span.
class NominalPath {
 public:
  NominalPath() = default;
  /// Throws std::invalid_argument when empty or times are not strictly increasing.
  explicit NominalPath(std::vector<Waypoint> waypoints);

  plant::Pose at(double t) const;
  const std::vector<Waypoint>& waypoints() const { return waypoints_; }
  bool operator==(const NominalPath&) const = default;

 private:
  std::vector<Waypoint> waypoints_;
};

/// Both gain sets are carried so a scenario can switch controller kind
/// without losing the other tuning.
struct ControllerSetup {
  control::ControllerKind kind = control::ControllerKind::PI;
  PerAxis<control::PIGains> pi;
  PerAxis<control::FuzzyPIGains> fuzzy;
  control::Limits limits;
  /// The force loop engages (latched) once |measured force| on a selected
  /// axis exceeds this [N]; 0 engages from the first tick.
  double engage_threshold = 0.5;
  /// Empty selects the built-in table.
  std::string rules_file;
  bool operator==(const ControllerSetup&) const = default;
};

struct Scenario {
  std::string name = "custom";
  NominalPath path;
  ForceSetpoint setpoint;
  control::SelectionMatrix selection = control::kSelectAll;
  /// +1 or -1 per axis: the Cartesian direction in which a positive
  /// correction increases contact on that axis.
  PerAxis<double> normal_sign{1.0, 1.0};
  ControllerSetup controller;
  std::vector<plant::Obstacle> obstacles;
  plant::ArmParams arm;
  plant::SensorParams sensor;
  double dt = 0.01;
  double duration = 1.0;
  std::uint64_t seed = 0;
  bool operator==(const Scenario&) const = default;
};

/// Throws std::invalid_argument describing the first violated constraint.
void validate(const Scenario& s);

struct TraceRow {
  double t = 0.0;
  AxisForce force;  // as measured by the sensor
  PerAxis<double> error;
  PerAxis<double> du;
  PerAxis<double> u;  // after this tick's increment
  plant::Pose nominal;
  plant::Pose commanded;
  plant::Pose actual;
  double q1 = 0.0;
  double q2 = 0.0;
  double tau1 = 0.0;
  double tau2 = 0.0;
};

struct Trace {
  std::vector<TraceRow> rows;
};

class SimulationAborted : public std::runtime_error {
 public:
  SimulationAborted(std::size_t tick, double t, const std::string& cause);
  std::size_t tick() const { return tick_; }
  double time() const { return t_; }

 private:
  std::size_t tick_;
  double t_;
};

/// Runs the scenario for duration/dt ticks. Throws SimulationAborted when a
/// commanded pose leaves the workspace.
Trace run(const Scenario& scenario);

// --- presets ----------------------------------------------------------------

enum class Preset { Exp1, Exp2, Exp3 };

std::string_view preset_name(Preset p);
std::optional<Preset> parse_preset(std::string_view name);

struct Gains {
  PerAxis<control::PIGains> pi;
  PerAxis<control::FuzzyPIGains> fuzzy;
};

/// Gains produced by the tuner for each preset (see presets/tuned/).
Gains shipped_gains(Preset p);

/// Vertical approach onto a box standing in the path; f_d = (0, 10) N.
Scenario experiment1_scenario(control::ControllerKind kind, const Gains& gains);
/// Descend onto a rough surface and slide along it; z force-controlled at 30 N.
Scenario experiment2_scenario(control::ControllerKind kind, const Gains& gains,
                              bool smooth = false);
/// Experiment 2 with friction and both axes force-controlled at (6, 30) N.
Scenario experiment3_scenario(control::ControllerKind kind, const Gains& gains);

Scenario make_preset(Preset p, control::ControllerKind kind);

// --- metrics ----------------------------------------------------------------

struct MetricsOptions {
  double band_pct = 5.0;             // settling band, percent of |setpoint|
  double zero_band = 1.0;            // absolute band when the setpoint is 0 [N]
  double contact_threshold = 0.1;    // first-contact detection [N]
  double steady_fraction = 0.2;      // tail used for steady-state RMS
};

struct Metrics {
  double first_contact_time = 0.0;
  double overshoot_pct = 0.0;
  std::optional<double> settling_time;  // empty: never settled
  double steady_state_rms = 0.0;
  double max_force = 0.0;
  double itae = 0.0;
};

class NoContact : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Throws NoContact when |force| on the axis never exceeds the threshold.
Metrics compute_metrics(const Trace& trace, Axis axis, double setpoint,
                        const MetricsOptions& opts = {});

/// Mean measured force on `axis` over the last `fraction` of the rows.
double tail_mean(const Trace& trace, Axis axis, double fraction);

struct ComparisonReport {
  std::string label_a;
  std::string label_b;
  ControllerSetup controller_a;
  ControllerSetup controller_b;
  Axis axis = Axis::Z;
  double setpoint = 0.0;
  Metrics a;
  Metrics b;
  /// b - a. Settling delta is present only when both settled.
  double d_overshoot_pct = 0.0;
  std::optional<double> d_settling_time;
  double d_steady_state_rms = 0.0;
  double d_max_force = 0.0;
  double d_itae = 0.0;
};

ComparisonReport compare(const Trace& trace_a, const Trace& trace_b, Axis axis,
                         double setpoint, const MetricsOptions& opts = {});

// --- tuner ------------------------------------------------------------------

struct TuneGrid {
  std::vector<double> kp;
  std::vector<double> ki;
  std::vector<double> kx;  // fuzzy-PI only
};

struct TuneWeights {
  double overshoot = 0.01;    // per overshoot percent
  double not_settled = 10.0;  // added when the run never settles
};

struct GainPoint {
  double kp = 0.0;
  double ki = 0.0;
  double kx = 0.0;
  auto operator<=>(const GainPoint&) const = default;
};

struct LeaderboardEntry {
  GainPoint gains;
  bool failed = false;
  std::string failure;
  Metrics metrics;
  double objective = 0.0;
};

struct TuneResult {
  Axis axis = Axis::Z;
  control::ControllerKind kind = control::ControllerKind::PI;
  /// Successful entries best-first, then failed entries in gain order.
  std::vector<LeaderboardEntry> leaderboard;
  const LeaderboardEntry& best() const { return leaderboard.front(); }
};

class AllRunsFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Objective minimized by the tuner: itae + w_os * overshoot_pct
/// + w_ns * [not settled].
double objective(const Metrics& m, const TuneWeights& w);

/// Exhaustive search over the grid for the scenario's controller kind on
/// one axis. Ties break on lower overshoot, then on lexicographic gains.
/// Grid points are evaluated on up to `threads` workers.
TuneResult tune(const Scenario& tmpl, Axis axis, const TuneGrid& grid,
                const TuneWeights& weights, const MetricsOptions& opts = {},
                unsigned threads = 0);

/// Writes the point into the scenario's gains for its controller kind.
void apply_gains(Scenario& s, Axis axis, const GainPoint& g);

}  // namespace hfc::sim
