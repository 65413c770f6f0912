#pragma once

// Flat `key = value` documents used for scenario configs, presets, tuner
// grids, best-gains files, leaderboards and run summaries.
//
//   # comment
//   preset = exp2
//   controller.kind = fuzzy
//   controller.fuzzy.z.kx = 0.0005
//   path = 0 0.70 0.21; 1 0.70 0.199
//   obstacle.0.type = rough_surface
//
// Keys are case-sensitive; later occurrences of a key override earlier ones.

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hfc/sim.hpp"

namespace hfc::config {

class ConfigInvalid : public std::runtime_error {
 public:
  ConfigInvalid(std::string key, const std::string& message);
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

struct Entry {
  std::string key;
  std::string value;
};

class Document {
 public:
  /// Throws ConfigInvalid on a line without '=' or with an empty key.
  static Document parse(std::string_view text);
  static Document load(const std::string& path);

  /// Replaces an existing key in place or appends.
  void set(const std::string& key, std::string value);
  void comment(const std::string& text);
  std::optional<std::string> get(std::string_view key) const;

  const std::vector<Entry>& entries() const { return entries_; }
  std::string to_text() const;

 private:
  // Comments are stored as entries with an empty key.
  std::vector<Entry> entries_;
};

/// Defaults for a config that names no preset: free space, the arm holding
/// (0.6, 0.3), 10 ms ticks for 1 s.
sim::Scenario default_scenario();

/// Everything a CLI invocation can configure.
struct RunConfig {
  sim::Scenario scenario = default_scenario();
  sim::MetricsOptions metrics;
  Axis tune_axis = Axis::Z;
  sim::TuneGrid grid;
  sim::TuneWeights weights;
  control::ControllerKind compare_a = control::ControllerKind::PI;
  control::ControllerKind compare_b = control::ControllerKind::FuzzyPI;

  std::optional<sim::Preset> preset;
  bool kind_set = false;
  bool setpoint_x_set = false;
  bool setpoint_z_set = false;
};

/// Applies a preset: scenario, setpoints and shipped gains.
void apply_preset(RunConfig& cfg, sim::Preset p);

/// Applies every key of the document. A `preset` key is applied before the
/// others. Throws ConfigInvalid naming the offending key.
void apply(RunConfig& cfg, const Document& doc);

/// Single `key=value` override, as given to --set.
void apply_override(RunConfig& cfg, std::string_view assignment);

/// Checks required keys and scenario constraints; throws ConfigInvalid.
void finalize(const RunConfig& cfg);

/// Full effective configuration; parsing it back yields the same RunConfig.
Document to_document(const RunConfig& cfg);

/// Gains of one tuned axis, as keys loadable by apply().
Document gains_document(control::ControllerKind kind, Axis axis, const sim::GainPoint& g);

std::string_view kind_name(control::ControllerKind k);
std::string_view axis_name(Axis a);

/// Shortest text that parses back to the same double.
std::string format_double(double v);

}  // namespace hfc::config
