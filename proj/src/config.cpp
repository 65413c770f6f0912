#include "hfc/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace hfc::config {

using control::ControllerKind;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

double parse_double(const std::string& key, std::string_view text) {
  const std::string t = trim(text);
  double v = 0.0;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (!t.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (t.empty() || ec != std::errc{} || ptr != last || !std::isfinite(v)) {
    throw ConfigInvalid(key, "expected a finite number, got '" + t + "'");
  }
  return v;
}

std::uint64_t parse_u64(const std::string& key, std::string_view text) {
  const std::string t = trim(text);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size()) {
    throw ConfigInvalid(key, "expected a non-negative integer, got '" + t + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, std::string_view text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1") return true;
  if (t == "false" || t == "0") return false;
  throw ConfigInvalid(key, "expected true or false, got '" + t + "'");
}

ControllerKind parse_kind(const std::string& key, std::string_view text) {
  const std::string t = trim(text);
  if (t == "pi") return ControllerKind::PI;
  if (t == "fuzzy") return ControllerKind::FuzzyPI;
  throw ConfigInvalid(key, "expected pi or fuzzy, got '" + t + "'");
}

Axis parse_axis(const std::string& key, std::string_view text) {
  const std::string t = trim(text);
  if (t == "x") return Axis::X;
  if (t == "z") return Axis::Z;
  throw ConfigInvalid(key, "expected x or z, got '" + t + "'");
}

std::vector<double> parse_list(const std::string& key, std::string_view text) {
  std::vector<double> out;
  if (trim(text).empty()) return out;
  for (const auto& part : split(text, ',')) out.push_back(parse_double(key, part));
  return out;
}

sim::NominalPath parse_path(const std::string& key, std::string_view text) {
  std::vector<sim::Waypoint> wps;
  for (const auto& part : split(text, ';')) {
    if (part.empty()) continue;
    std::istringstream in(part);
    std::string t, x, z, extra;
    if (!(in >> t >> x >> z) || (in >> extra)) {
      throw ConfigInvalid(key, "waypoints are 't x z' triples separated by ';'");
    }
    wps.push_back({parse_double(key, t), {parse_double(key, x), parse_double(key, z)}});
  }
  try {
    return sim::NominalPath(std::move(wps));
  } catch (const std::invalid_argument& ex) {
    throw ConfigInvalid(key, ex.what());
  }
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += format_double(v[i]);
  }
  return out;
}

std::string path_text(const sim::NominalPath& p) {
  std::string out;
  for (std::size_t i = 0; i < p.waypoints().size(); ++i) {
    const auto& w = p.waypoints()[i];
    if (i) out += "; ";
    out += format_double(w.t) + " " + format_double(w.pose.x) + " " + format_double(w.pose.z);
  }
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;

template <typename Field>
Setter number(Field field) {
  return [field](RunConfig& c, const std::string& k, const std::string& v) {
    field(c) = parse_double(k, v);
  };
}

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = [] {
    std::map<std::string, Setter, std::less<>> t;
    t["name"] = [](RunConfig& c, const std::string&, const std::string& v) {
      c.scenario.name = trim(v);
    };
    t["controller.kind"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.scenario.controller.kind = parse_kind(k, v);
      c.kind_set = true;
    };
    for (Axis a : kAxes) {
      const std::string ax(axis_name(a));
      t["controller.pi." + ax + ".kp"] = number([a](RunConfig& c) -> double& { return c.scenario.controller.pi[a].kp; });
      t["controller.pi." + ax + ".ki"] = number([a](RunConfig& c) -> double& { return c.scenario.controller.pi[a].ki; });
      t["controller.fuzzy." + ax + ".kp"] = number([a](RunConfig& c) -> double& { return c.scenario.controller.fuzzy[a].kp; });
      t["controller.fuzzy." + ax + ".ki"] = number([a](RunConfig& c) -> double& { return c.scenario.controller.fuzzy[a].ki; });
      t["controller.fuzzy." + ax + ".kx"] = number([a](RunConfig& c) -> double& { return c.scenario.controller.fuzzy[a].kx; });
      t["setpoint." + ax] = [a](RunConfig& c, const std::string& k, const std::string& v) {
        c.scenario.setpoint[a] = parse_double(k, v);
        (a == Axis::X ? c.setpoint_x_set : c.setpoint_z_set) = true;
      };
      t["selection." + ax] = [a](RunConfig& c, const std::string& k, const std::string& v) {
        c.scenario.selection[a] = parse_bool(k, v);
      };
      t["normal_sign." + ax] = number([a](RunConfig& c) -> double& { return c.scenario.normal_sign[a]; });
      t["sensor.bias." + ax] = number([a](RunConfig& c) -> double& { return c.scenario.sensor.bias[a]; });
    }
    t["controller.du_max"] = number([](RunConfig& c) -> double& { return c.scenario.controller.limits.du_max; });
    t["controller.u_min"] = number([](RunConfig& c) -> double& { return c.scenario.controller.limits.u_min; });
    t["controller.u_max"] = number([](RunConfig& c) -> double& { return c.scenario.controller.limits.u_max; });
    t["controller.engage_threshold"] = number([](RunConfig& c) -> double& { return c.scenario.controller.engage_threshold; });
    t["controller.rules_file"] = [](RunConfig& c, const std::string&, const std::string& v) {
      c.scenario.controller.rules_file = trim(v);
    };
    t["path"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.scenario.path = parse_path(k, v);
    };
    t["arm.l1"] = number([](RunConfig& c) -> double& { return c.scenario.arm.l1; });
    t["arm.l2"] = number([](RunConfig& c) -> double& { return c.scenario.arm.l2; });
    t["arm.tau_servo"] = number([](RunConfig& c) -> double& { return c.scenario.arm.tau_servo; });
    t["arm.qdot_max"] = number([](RunConfig& c) -> double& { return c.scenario.arm.qdot_max; });
    t["arm.elbow"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      const std::string e = trim(v);
      if (e == "down") {
        c.scenario.arm.elbow = plant::Elbow::Down;
      } else if (e == "up") {
        c.scenario.arm.elbow = plant::Elbow::Up;
      } else {
        throw ConfigInvalid(k, "expected down or up, got '" + e + "'");
      }
    };
    t["sensor.noise_sigma"] = number([](RunConfig& c) -> double& { return c.scenario.sensor.noise_sigma; });
    t["sim.dt"] = number([](RunConfig& c) -> double& { return c.scenario.dt; });
    t["sim.duration"] = number([](RunConfig& c) -> double& { return c.scenario.duration; });
    t["sim.seed"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.scenario.seed = parse_u64(k, v);
    };
    // Short forms used on the command line.
    t["dt"] = t["sim.dt"];
    t["duration"] = t["sim.duration"];
    t["seed"] = t["sim.seed"];
    t["metrics.band_pct"] = number([](RunConfig& c) -> double& { return c.metrics.band_pct; });
    t["metrics.zero_band"] = number([](RunConfig& c) -> double& { return c.metrics.zero_band; });
    t["metrics.contact_threshold"] = number([](RunConfig& c) -> double& { return c.metrics.contact_threshold; });
    t["metrics.steady_fraction"] = number([](RunConfig& c) -> double& { return c.metrics.steady_fraction; });
    t["tune.axis"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.tune_axis = parse_axis(k, v);
    };
    t["tune.grid.kp"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.grid.kp = parse_list(k, v); };
    t["tune.grid.ki"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.grid.ki = parse_list(k, v); };
    t["tune.grid.kx"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.grid.kx = parse_list(k, v); };
    t["tune.weight.overshoot"] = number([](RunConfig& c) -> double& { return c.weights.overshoot; });
    t["tune.weight.not_settled"] = number([](RunConfig& c) -> double& { return c.weights.not_settled; });
    t["compare.a"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.compare_a = parse_kind(k, v); };
    t["compare.b"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.compare_b = parse_kind(k, v); };
    return t;
  }();
  return table;
}

// --- obstacles: obstacle.count, obstacle.<i>.type, obstacle.<i>.<field> ----

struct ObstacleKey {
  std::size_t index;
  std::string field;
};

std::optional<ObstacleKey> parse_obstacle_key(const std::string& key) {
  constexpr std::string_view prefix = "obstacle.";
  if (!key.starts_with(prefix) || key == "obstacle.count") return std::nullopt;
  const auto rest = std::string_view(key).substr(prefix.size());
  const auto dot = rest.find('.');
  if (dot == std::string_view::npos || dot == 0) return std::nullopt;
  std::size_t idx = 0;
  auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + dot, idx);
  if (ec != std::errc{} || ptr != rest.data() + dot) return std::nullopt;
  return ObstacleKey{idx, std::string(rest.substr(dot + 1))};
}

double* surface_field(plant::RoughSurface& s, std::string_view f) {
  if (f == "height_base") return &s.height_base;
  if (f == "roughness_amplitude") return &s.roughness_amplitude;
  if (f == "roughness_wavelength") return &s.roughness_wavelength;
  if (f == "noise_amplitude") return &s.noise_amplitude;
  if (f == "stiffness") return &s.stiffness;
  if (f == "friction_coeff") return &s.friction_coeff;
  return nullptr;
}

double* box_field(plant::Box& b, std::string_view f) {
  if (f == "x_min") return &b.x_min;
  if (f == "x_max") return &b.x_max;
  if (f == "z_min") return &b.z_min;
  if (f == "z_max") return &b.z_max;
  if (f == "stiffness") return &b.stiffness;
  return nullptr;
}

void apply_obstacle_type(RunConfig& c, const std::string& key, std::size_t idx,
                         const std::string& value) {
  auto& obs = c.scenario.obstacles;
  if (idx > obs.size()) throw ConfigInvalid(key, "obstacle indices must be contiguous from 0");
  const std::string t = trim(value);
  plant::Obstacle fresh;
  if (t == "rough_surface") {
    fresh = plant::RoughSurface{};
  } else if (t == "box") {
    fresh = plant::Box{};
  } else {
    throw ConfigInvalid(key, "expected rough_surface or box, got '" + t + "'");
  }
  if (idx == obs.size()) {
    obs.push_back(fresh);
  } else if (obs[idx].index() != fresh.index()) {
    obs[idx] = fresh;
  }
}

void apply_obstacle_field(RunConfig& c, const std::string& key, const ObstacleKey& ok,
                          const std::string& value) {
  auto& obs = c.scenario.obstacles;
  if (ok.index >= obs.size()) {
    throw ConfigInvalid(key, "obstacle " + std::to_string(ok.index) + " has no type");
  }
  double* field = std::visit(
      [&](auto& o) -> double* {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, plant::RoughSurface>) {
          return surface_field(o, ok.field);
        } else {
          return box_field(o, ok.field);
        }
      },
      obs[ok.index]);
  if (!field) throw ConfigInvalid(key, "unknown key");
  *field = parse_double(key, value);
}

void apply_entry(RunConfig& c, const Entry& e) {
  if (e.key == "preset" || e.key == "obstacle.count") return;  // handled earlier
  if (auto ok = parse_obstacle_key(e.key)) {
    if (ok->field == "type") return;  // handled earlier
    apply_obstacle_field(c, e.key, *ok, e.value);
    return;
  }
  auto it = setters().find(e.key);
  if (it == setters().end()) throw ConfigInvalid(e.key, "unknown key");
  it->second(c, e.key, e.value);
}

}  // namespace

ConfigInvalid::ConfigInvalid(std::string key, const std::string& message)
    : std::runtime_error(key.empty() ? message : "'" + key + "': " + message),
      key_(std::move(key)) {}

std::string_view kind_name(ControllerKind k) {
  return k == ControllerKind::PI ? "pi" : "fuzzy";
}

std::string_view axis_name(Axis a) { return a == Axis::X ? "x" : "z"; }

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

// --- Document ----------------------------------------------------------------

Document Document::parse(std::string_view text) {
  Document doc;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      doc.entries_.push_back({"", trim(std::string_view(t).substr(1))});
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigInvalid("", "line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    std::string key = trim(std::string_view(t).substr(0, eq));
    if (key.empty()) {
      throw ConfigInvalid("", "line " + std::to_string(line_no) + ": empty key");
    }
    doc.set(key, trim(std::string_view(t).substr(eq + 1)));
  }
  return doc;
}

Document Document::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigInvalid("", "cannot open config file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

void Document::set(const std::string& key, std::string value) {
  for (auto& e : entries_) {
    if (e.key == key) {
      e.value = std::move(value);
      return;
    }
  }
  entries_.push_back({key, std::move(value)});
}

void Document::comment(const std::string& text) { entries_.push_back({"", text}); }

std::optional<std::string> Document::get(std::string_view key) const {
  for (const auto& e : entries_) {
    if (!e.key.empty() && e.key == key) return e.value;
  }
  return std::nullopt;
}

std::string Document::to_text() const {
  std::string out;
  for (const auto& e : entries_) {
    if (e.key.empty()) {
      out += "# " + e.value + "\n";
    } else {
      out += e.key + " = " + e.value + "\n";
    }
  }
  return out;
}

// --- RunConfig ---------------------------------------------------------------

sim::Scenario default_scenario() {
  sim::Scenario s;
  s.path = sim::NominalPath(std::vector<sim::Waypoint>{{0.0, {0.6, 0.3}}});
  s.duration = 1.0;
  return s;
}

void apply_preset(RunConfig& cfg, sim::Preset p) {
  cfg.scenario = sim::make_preset(p, cfg.scenario.controller.kind);
  cfg.preset = p;
  cfg.setpoint_x_set = true;
  cfg.setpoint_z_set = true;
}

void apply(RunConfig& cfg, const Document& doc) {
  if (auto p = doc.get("preset")) {
    auto preset = sim::parse_preset(trim(*p));
    if (!preset) throw ConfigInvalid("preset", "expected exp1, exp2 or exp3, got '" + *p + "'");
    const ControllerKind kind = cfg.scenario.controller.kind;
    apply_preset(cfg, *preset);
    cfg.scenario.controller.kind = kind;
  }
  std::optional<std::size_t> count;
  if (auto c = doc.get("obstacle.count")) {
    count = static_cast<std::size_t>(parse_u64("obstacle.count", *c));
    if (*count < cfg.scenario.obstacles.size()) cfg.scenario.obstacles.resize(*count);
  }
  // Types first, in index order, so fields can follow in any order.
  std::vector<std::pair<std::size_t, const Entry*>> types;
  for (const auto& e : doc.entries()) {
    if (e.key.empty()) continue;
    if (auto ok = parse_obstacle_key(e.key); ok && ok->field == "type") {
      types.emplace_back(ok->index, &e);
    }
  }
  std::sort(types.begin(), types.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [idx, e] : types) apply_obstacle_type(cfg, e->key, idx, e->value);

  for (const auto& e : doc.entries()) {
    if (!e.key.empty()) apply_entry(cfg, e);
  }
  if (count && *count != cfg.scenario.obstacles.size()) {
    throw ConfigInvalid("obstacle.count", "declares " + std::to_string(*count) +
                                              " obstacles but " +
                                              std::to_string(cfg.scenario.obstacles.size()) +
                                              " are defined");
  }
}

void apply_override(RunConfig& cfg, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigInvalid(trim(assignment), "override must have the form key=value");
  }
  Document doc;
  const std::string key = trim(assignment.substr(0, eq));
  if (key.empty()) throw ConfigInvalid("", "override has an empty key");
  doc.set(key, trim(assignment.substr(eq + 1)));
  apply(cfg, doc);
}

void finalize(const RunConfig& cfg) {
  if (!cfg.kind_set) throw ConfigInvalid("controller.kind", "required (pi or fuzzy)");
  if (!cfg.setpoint_x_set) throw ConfigInvalid("setpoint.x", "required");
  if (!cfg.setpoint_z_set) throw ConfigInvalid("setpoint.z", "required");
  try {
    sim::validate(cfg.scenario);
  } catch (const std::invalid_argument& ex) {
    throw ConfigInvalid("", ex.what());
  }
  if (!(cfg.metrics.band_pct > 0.0) || !(cfg.metrics.zero_band > 0.0)) {
    throw ConfigInvalid("metrics.band_pct", "settling bands must be > 0");
  }
  if (!(cfg.metrics.steady_fraction > 0.0 && cfg.metrics.steady_fraction <= 1.0)) {
    throw ConfigInvalid("metrics.steady_fraction", "must lie in (0, 1]");
  }
  if (!(cfg.metrics.contact_threshold >= 0.0)) {
    throw ConfigInvalid("metrics.contact_threshold", "must be >= 0");
  }
}

Document to_document(const RunConfig& cfg) {
  const auto& s = cfg.scenario;
  Document d;
  d.set("name", s.name);
  d.set("controller.kind", std::string(kind_name(s.controller.kind)));
  for (Axis a : kAxes) {
    const std::string ax(axis_name(a));
    d.set("controller.pi." + ax + ".kp", format_double(s.controller.pi[a].kp));
    d.set("controller.pi." + ax + ".ki", format_double(s.controller.pi[a].ki));
  }
  for (Axis a : kAxes) {
    const std::string ax(axis_name(a));
    d.set("controller.fuzzy." + ax + ".kp", format_double(s.controller.fuzzy[a].kp));
    d.set("controller.fuzzy." + ax + ".ki", format_double(s.controller.fuzzy[a].ki));
    d.set("controller.fuzzy." + ax + ".kx", format_double(s.controller.fuzzy[a].kx));
  }
  d.set("controller.du_max", format_double(s.controller.limits.du_max));
  d.set("controller.u_min", format_double(s.controller.limits.u_min));
  d.set("controller.u_max", format_double(s.controller.limits.u_max));
  d.set("controller.engage_threshold", format_double(s.controller.engage_threshold));
  d.set("controller.rules_file", s.controller.rules_file);
  for (Axis a : kAxes) d.set("setpoint." + std::string(axis_name(a)), format_double(s.setpoint[a]));
  for (Axis a : kAxes) {
    d.set("selection." + std::string(axis_name(a)), s.selection[a] ? "true" : "false");
  }
  for (Axis a : kAxes) {
    d.set("normal_sign." + std::string(axis_name(a)), format_double(s.normal_sign[a]));
  }
  d.set("path", path_text(s.path));
  d.set("obstacle.count", std::to_string(s.obstacles.size()));
  for (std::size_t i = 0; i < s.obstacles.size(); ++i) {
    const std::string p = "obstacle." + std::to_string(i) + ".";
    if (const auto* r = std::get_if<plant::RoughSurface>(&s.obstacles[i])) {
      d.set(p + "type", "rough_surface");
      d.set(p + "height_base", format_double(r->height_base));
      d.set(p + "roughness_amplitude", format_double(r->roughness_amplitude));
      d.set(p + "roughness_wavelength", format_double(r->roughness_wavelength));
      d.set(p + "noise_amplitude", format_double(r->noise_amplitude));
      d.set(p + "stiffness", format_double(r->stiffness));
      d.set(p + "friction_coeff", format_double(r->friction_coeff));
    } else {
      const auto& b = std::get<plant::Box>(s.obstacles[i]);
      d.set(p + "type", "box");
      d.set(p + "x_min", format_double(b.x_min));
      d.set(p + "x_max", format_double(b.x_max));
      d.set(p + "z_min", format_double(b.z_min));
      d.set(p + "z_max", format_double(b.z_max));
      d.set(p + "stiffness", format_double(b.stiffness));
    }
  }
  d.set("arm.l1", format_double(s.arm.l1));
  d.set("arm.l2", format_double(s.arm.l2));
  d.set("arm.tau_servo", format_double(s.arm.tau_servo));
  d.set("arm.qdot_max", format_double(s.arm.qdot_max));
  d.set("arm.elbow", s.arm.elbow == plant::Elbow::Down ? "down" : "up");
  d.set("sensor.noise_sigma", format_double(s.sensor.noise_sigma));
  for (Axis a : kAxes) {
    d.set("sensor.bias." + std::string(axis_name(a)), format_double(s.sensor.bias[a]));
  }
  d.set("sim.dt", format_double(s.dt));
  d.set("sim.duration", format_double(s.duration));
  d.set("sim.seed", std::to_string(s.seed));
  d.set("metrics.band_pct", format_double(cfg.metrics.band_pct));
  d.set("metrics.zero_band", format_double(cfg.metrics.zero_band));
  d.set("metrics.contact_threshold", format_double(cfg.metrics.contact_threshold));
  d.set("metrics.steady_fraction", format_double(cfg.metrics.steady_fraction));
  d.set("tune.axis", std::string(axis_name(cfg.tune_axis)));
  d.set("tune.grid.kp", join(cfg.grid.kp));
  d.set("tune.grid.ki", join(cfg.grid.ki));
  d.set("tune.grid.kx", join(cfg.grid.kx));
  d.set("tune.weight.overshoot", format_double(cfg.weights.overshoot));
  d.set("tune.weight.not_settled", format_double(cfg.weights.not_settled));
  d.set("compare.a", std::string(kind_name(cfg.compare_a)));
  d.set("compare.b", std::string(kind_name(cfg.compare_b)));
  return d;
}

Document gains_document(ControllerKind kind, Axis axis, const sim::GainPoint& g) {
  Document d;
  const std::string p = "controller." + std::string(kind_name(kind)) + "." +
                        std::string(axis_name(axis)) + ".";
  d.set(p + "kp", format_double(g.kp));
  d.set(p + "ki", format_double(g.ki));
  if (kind == ControllerKind::FuzzyPI) d.set(p + "kx", format_double(g.kx));
  return d;
}

}  // namespace hfc::config
