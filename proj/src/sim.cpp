#include "hfc/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace hfc::sim {

using control::ControllerKind;

NominalPath::NominalPath(std::vector<Waypoint> waypoints) : waypoints_(std::move(waypoints)) {
  if (waypoints_.empty()) throw std::invalid_argument("path needs at least one waypoint");
  for (std::size_t i = 1; i < waypoints_.size(); ++i) {
    if (!(waypoints_[i].t > waypoints_[i - 1].t)) {
      throw std::invalid_argument("path waypoint times must be strictly increasing");
    }
  }
}

plant::Pose NominalPath::at(double t) const {
  if (waypoints_.empty()) return {};
  if (t <= waypoints_.front().t) return waypoints_.front().pose;
  if (t >= waypoints_.back().t) return waypoints_.back().pose;
  auto hi = std::upper_bound(waypoints_.begin(), waypoints_.end(), t,
                             [](double v, const Waypoint& w) { return v < w.t; });
  auto lo = hi - 1;
  const double s = (t - lo->t) / (hi->t - lo->t);
  return {lo->pose.x + s * (hi->pose.x - lo->pose.x),
          lo->pose.z + s * (hi->pose.z - lo->pose.z)};
}

void validate(const Scenario& s) {
  if (!(s.dt > 0.0)) throw std::invalid_argument("dt must be > 0");
  if (!(s.duration >= s.dt)) throw std::invalid_argument("duration must be >= dt");
  if (s.path.waypoints().empty()) throw std::invalid_argument("path is empty");
  plant::validate(s.arm);
  for (const auto& o : s.obstacles) plant::validate(o);
  if (s.sensor.noise_sigma < 0.0) throw std::invalid_argument("sensor noise_sigma must be >= 0");
  for (Axis a : kAxes) {
    if (s.normal_sign[a] != 1.0 && s.normal_sign[a] != -1.0) {
      throw std::invalid_argument("normal_sign must be +1 or -1");
    }
    const auto& pi = s.controller.pi[a];
    const auto& fz = s.controller.fuzzy[a];
    if (pi.kp < 0.0 || pi.ki < 0.0 || fz.kp < 0.0 || fz.ki < 0.0 || fz.kx < 0.0) {
      throw std::invalid_argument("controller gains must be >= 0");
    }
    if (!std::isfinite(s.setpoint[a])) throw std::invalid_argument("setpoint must be finite");
  }
  const auto& lim = s.controller.limits;
  if (!(lim.du_max >= 0.0) || !(lim.u_min <= lim.u_max) || lim.u_min > 0.0 || lim.u_max < 0.0) {
    throw std::invalid_argument("controller limits must satisfy u_min <= 0 <= u_max, du_max >= 0");
  }
}

SimulationAborted::SimulationAborted(std::size_t tick, double t, const std::string& cause)
    : std::runtime_error("simulation aborted at tick " + std::to_string(tick) + " (t=" +
                         std::to_string(t) + " s): " + cause),
      tick_(tick),
      t_(t) {}

Trace run(const Scenario& scenario) {
  validate(scenario);

  const fuzzy::Engine engine(scenario.controller.rules_file.empty()
                                 ? fuzzy::RuleBase::standard()
                                 : fuzzy::RuleBase::load(scenario.controller.rules_file));
  const auto& cs = scenario.controller;
  auto make = [&](Axis a) {
    return cs.kind == ControllerKind::PI
               ? control::AxisController(cs.pi[a], cs.limits)
               : control::AxisController(cs.fuzzy[a], engine, cs.limits);
  };
  const control::AxisController cx = make(Axis::X);
  const control::AxisController cz = make(Axis::Z);
  const PerAxis<const control::AxisController*> controllers{&cx, &cz};

  const plant::Environment env{scenario.obstacles, scenario.seed};
  plant::SensorModel sensor(scenario.sensor, scenario.seed ^ 0x5DEECE66DULL);

  const auto& ap = scenario.arm;
  plant::PlanarArm arm{ap, plant::JointAngles::Zero()};
  try {
    arm.q = plant::ik(ap.l1, ap.l2, scenario.path.at(0.0), ap.elbow);
  } catch (const plant::Unreachable& ex) {
    throw SimulationAborted(0, 0.0, ex.what());
  }
  plant::Pose prev = plant::fk(arm);

  PerAxis<control::ControllerState> states;
  bool engaged = cs.engage_threshold <= 0.0;

  const auto ticks = static_cast<std::size_t>(std::floor(scenario.duration / scenario.dt + 1e-9));
  Trace trace;
  trace.rows.reserve(ticks + 1);
  for (std::size_t k = 0; k <= ticks; ++k) {
    const double t = static_cast<double>(k) * scenario.dt;
    TraceRow row;
    row.t = t;
    row.nominal = scenario.path.at(t);
    row.commanded = {row.nominal.x + scenario.normal_sign.x * states.x.u_accum,
                     row.nominal.z + scenario.normal_sign.z * states.z.u_accum};

    plant::JointAngles q_des;
    try {
      q_des = plant::ik(ap.l1, ap.l2, row.commanded, ap.elbow);
    } catch (const plant::Unreachable& ex) {
      throw SimulationAborted(k, t, ex.what());
    }
    plant::servo_step(arm, q_des, scenario.dt);
    row.actual = plant::fk(arm);
    const plant::Pose velocity{(row.actual.x - prev.x) / scenario.dt,
                               (row.actual.z - prev.z) / scenario.dt};
    prev = row.actual;

    const AxisForce f_true = plant::contact_force(env, row.actual, velocity);
    row.force = sensor.sense(f_true);

    if (!engaged) {
      for (Axis a : kAxes) {
        if (scenario.selection[a] && std::abs(row.force[a]) > cs.engage_threshold) engaged = true;
      }
    }
    if (engaged) {
      const auto out =
          control::hybrid_step(scenario.setpoint, row.force, controllers, scenario.selection, states);
      row.error = out.e;
      row.du = out.du;
      row.u = out.u;
    } else {
      for (Axis a : kAxes) {
        row.error[a] = scenario.setpoint[a] - row.force[a];
        row.u[a] = states[a].u_accum;
      }
    }

    const Eigen::Vector2d tau = plant::joint_torques(arm, f_true);
    row.q1 = arm.q[0];
    row.q2 = arm.q[1];
    row.tau1 = tau[0];
    row.tau2 = tau[1];
    trace.rows.push_back(row);
  }
  return trace;
}

// --- presets ----------------------------------------------------------------

std::string_view preset_name(Preset p) {
  switch (p) {
    case Preset::Exp1: return "exp1";
    case Preset::Exp2: return "exp2";
    case Preset::Exp3: return "exp3";
  }
  return "";
}

std::optional<Preset> parse_preset(std::string_view name) {
  if (name == "exp1") return Preset::Exp1;
  if (name == "exp2") return Preset::Exp2;
  if (name == "exp3") return Preset::Exp3;
  return std::nullopt;
}

Gains shipped_gains(Preset p) {
  // Winners of the grids in presets/tuned/*.cfg; the leaderboards sit next to
  // them. Experiment 1 has no lateral contact to tune on, so x reuses z.
  Gains g;
  switch (p) {
    case Preset::Exp1:
      g.pi.z = {3e-4, 2e-4};
      g.fuzzy.z = {2.0, 0.2, 1e-3};
      g.pi.x = g.pi.z;
      g.fuzzy.x = g.fuzzy.z;
      break;
    case Preset::Exp2:
      g.pi.z = {3e-4, 5e-4};
      g.fuzzy.z = {0.5, 2.0, 5e-4};
      break;
    case Preset::Exp3:
      g.pi.x = {5e-4, 2e-5};
      g.pi.z = {3e-4, 5e-4};
      g.fuzzy.x = {0.2, 0.1, 2e-4};
      g.fuzzy.z = {0.2, 2.0, 5e-4};
      break;
  }
  return g;
}

namespace {

Scenario base_scenario(ControllerKind kind, const Gains& gains) {
  Scenario s;
  s.controller.kind = kind;
  s.controller.pi = gains.pi;
  s.controller.fuzzy = gains.fuzzy;
  s.sensor.noise_sigma = 0.02;
  s.dt = 0.01;
  s.seed = 1;
  return s;
}

}  // namespace

Scenario experiment1_scenario(ControllerKind kind, const Gains& gains) {
  Scenario s = base_scenario(kind, gains);
  s.name = "exp1";
  // Straight descent that ends 10 mm inside the top face of the box.
  s.path = NominalPath({{0.0, {0.60, 0.30}}, {2.0, {0.60, 0.24}}});
  s.obstacles = {plant::Box{0.50, 0.70, 0.0, 0.25, 10'000.0}};
  s.setpoint = {0.0, 10.0};
  s.selection = control::kSelectAll;
  s.normal_sign = {1.0, -1.0};
  s.duration = 5.0;
  return s;
}

Scenario experiment2_scenario(ControllerKind kind, const Gains& gains, bool smooth) {
  Scenario s = base_scenario(kind, gains);
  s.name = smooth ? "exp2-smooth" : "exp2";
  // Descend to 1 mm below the mean surface, then slide 250 mm toward -x.
  s.path = NominalPath({{0.0, {0.70, 0.21}}, {1.0, {0.70, 0.199}}, {6.0, {0.45, 0.199}}});
  plant::RoughSurface surface;
  surface.height_base = 0.20;
  surface.roughness_amplitude = smooth ? 0.0 : 0.3e-3;
  surface.roughness_wavelength = 0.04;
  surface.noise_amplitude = smooth ? 0.0 : 0.1e-3;
  surface.stiffness = 10'000.0;
  surface.friction_coeff = 0.0;
  s.obstacles = {surface};
  s.setpoint = {0.0, 30.0};
  s.selection = {false, true};
  s.normal_sign = {-1.0, -1.0};
  s.duration = 6.0;
  return s;
}

Scenario experiment3_scenario(ControllerKind kind, const Gains& gains) {
  Scenario s = experiment2_scenario(kind, gains, false);
  s.name = "exp3";
  std::get<plant::RoughSurface>(s.obstacles.front()).friction_coeff = 0.2;
  s.setpoint = {6.0, 30.0};
  s.selection = control::kSelectAll;
  return s;
}

Scenario make_preset(Preset p, ControllerKind kind) {
  const Gains g = shipped_gains(p);
  switch (p) {
    case Preset::Exp1: return experiment1_scenario(kind, g);
    case Preset::Exp2: return experiment2_scenario(kind, g);
    case Preset::Exp3: return experiment3_scenario(kind, g);
  }
  return {};
}

// --- metrics ----------------------------------------------------------------

Metrics compute_metrics(const Trace& trace, Axis axis, double setpoint,
                        const MetricsOptions& opts) {
  const auto& rows = trace.rows;
  auto first = std::find_if(rows.begin(), rows.end(), [&](const TraceRow& r) {
    return std::abs(r.force[axis]) > opts.contact_threshold;
  });
  if (first == rows.end()) throw NoContact("trace never registers contact on the axis");
  const auto i0 = static_cast<std::size_t>(first - rows.begin());

  Metrics m;
  m.first_contact_time = rows[i0].t;
  const double band =
      setpoint != 0.0 ? opts.band_pct / 100.0 * std::abs(setpoint) : opts.zero_band;

  double peak_excursion = 0.0;  // beyond the setpoint, in its direction
  for (std::size_t i = i0; i < rows.size(); ++i) {
    const double f = rows[i].force[axis];
    const double excursion = setpoint > 0.0   ? f - setpoint
                             : setpoint < 0.0 ? setpoint - f
                                              : std::abs(f) - band;
    peak_excursion = std::max(peak_excursion, excursion);
  }
  m.overshoot_pct = 100.0 * peak_excursion / (setpoint != 0.0 ? std::abs(setpoint) : band);

  std::optional<std::size_t> last_out;
  for (std::size_t i = rows.size(); i-- > i0;) {
    if (std::abs(rows[i].force[axis] - setpoint) > band) {
      last_out = i;
      break;
    }
  }
  if (!last_out) {
    m.settling_time = m.first_contact_time;
  } else if (*last_out + 1 < rows.size()) {
    m.settling_time = rows[*last_out + 1].t;
  }

  const std::size_t n = rows.size();
  const auto tail = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(opts.steady_fraction * static_cast<double>(n))));
  double sq = 0.0;
  for (std::size_t i = n - tail; i < n; ++i) {
    const double e = rows[i].force[axis] - setpoint;
    sq += e * e;
  }
  m.steady_state_rms = std::sqrt(sq / static_cast<double>(tail));

  for (const auto& r : rows) m.max_force = std::max(m.max_force, std::abs(r.force[axis]));

  const double dt = n > 1 ? rows[1].t - rows[0].t : 0.0;
  for (std::size_t i = i0; i < n; ++i) {
    m.itae += (rows[i].t - m.first_contact_time) * std::abs(setpoint - rows[i].force[axis]) * dt;
  }
  return m;
}

double tail_mean(const Trace& trace, Axis axis, double fraction) {
  const std::size_t n = trace.rows.size();
  if (n == 0) return 0.0;
  const auto tail = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n))), 1, n);
  double sum = 0.0;
  for (std::size_t i = n - tail; i < n; ++i) sum += trace.rows[i].force[axis];
  return sum / static_cast<double>(tail);
}

ComparisonReport compare(const Trace& trace_a, const Trace& trace_b, Axis axis, double setpoint,
                         const MetricsOptions& opts) {
  ComparisonReport r;
  r.axis = axis;
  r.setpoint = setpoint;
  r.a = compute_metrics(trace_a, axis, setpoint, opts);
  r.b = compute_metrics(trace_b, axis, setpoint, opts);
  r.d_overshoot_pct = r.b.overshoot_pct - r.a.overshoot_pct;
  if (r.a.settling_time && r.b.settling_time) {
    r.d_settling_time = *r.b.settling_time - *r.a.settling_time;
  }
  r.d_steady_state_rms = r.b.steady_state_rms - r.a.steady_state_rms;
  r.d_max_force = r.b.max_force - r.a.max_force;
  r.d_itae = r.b.itae - r.a.itae;
  return r;
}

// --- tuner ------------------------------------------------------------------

double objective(const Metrics& m, const TuneWeights& w) {
  return m.itae + w.overshoot * m.overshoot_pct + (m.settling_time ? 0.0 : w.not_settled);
}

void apply_gains(Scenario& s, Axis axis, const GainPoint& g) {
  if (s.controller.kind == ControllerKind::PI) {
    s.controller.pi[axis] = {g.kp, g.ki};
  } else {
    s.controller.fuzzy[axis] = {g.kp, g.ki, g.kx};
  }
}

TuneResult tune(const Scenario& tmpl, Axis axis, const TuneGrid& grid,
                const TuneWeights& weights, const MetricsOptions& opts, unsigned threads) {
  const bool fuzzy = tmpl.controller.kind == ControllerKind::FuzzyPI;
  if (grid.kp.empty() || grid.ki.empty() || (fuzzy && grid.kx.empty())) {
    throw std::invalid_argument("tuning grid must list at least one value per gain");
  }
  if (!std::isfinite(weights.overshoot) || !std::isfinite(weights.not_settled)) {
    throw std::invalid_argument("tuning weights must be finite");
  }

  std::vector<GainPoint> points;
  const std::vector<double> kx = fuzzy ? grid.kx : std::vector<double>{0.0};
  for (double p : grid.kp)
    for (double i : grid.ki)
      for (double x : kx) points.push_back({p, i, x});
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());

  std::vector<LeaderboardEntry> entries(points.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      LeaderboardEntry& e = entries[i];
      e.gains = points[i];
      Scenario s = tmpl;
      apply_gains(s, axis, points[i]);
      try {
        e.metrics = compute_metrics(run(s), axis, s.setpoint[axis], opts);
        e.objective = objective(e.metrics, weights);
      } catch (const SimulationAborted& ex) {
        e.failed = true;
        e.failure = ex.what();
      } catch (const NoContact& ex) {
        e.failed = true;
        e.failure = ex.what();
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, points.size()));
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }

  std::stable_sort(entries.begin(), entries.end(),
                   [](const LeaderboardEntry& a, const LeaderboardEntry& b) {
                     if (a.failed != b.failed) return !a.failed;
                     if (a.failed) return a.gains < b.gains;
                     if (a.objective != b.objective) return a.objective < b.objective;
                     if (a.metrics.overshoot_pct != b.metrics.overshoot_pct) {
                       return a.metrics.overshoot_pct < b.metrics.overshoot_pct;
                     }
                     return a.gains < b.gains;
                   });
  if (entries.front().failed) throw AllRunsFailed("every grid point aborted");

  TuneResult result;
  result.axis = axis;
  result.kind = tmpl.controller.kind;
  result.leaderboard = std::move(entries);
  return result;
}

}  // namespace hfc::sim
