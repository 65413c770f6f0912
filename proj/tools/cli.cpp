#include "cli.hpp"

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "hfc/config.hpp"
#include "hfc/csv.hpp"
#include "hfc/fuzzy.hpp"
#include "hfc/sim.hpp"

namespace hfc::cli {

namespace {

using config::ConfigInvalid;
using config::Document;
using config::RunConfig;
using config::axis_name;
using config::format_double;
using config::kind_name;
using control::ControllerKind;

struct CommonOptions {
  std::string preset;
  std::string controller;
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
};

struct InferOptions {
  double e = 0.0;
  double de = 0.0;
  double kp = 1.0;
  double ki = 1.0;
  double kx = 1.0;
  std::string rules;
};

void add_common(CLI::App& sub, CommonOptions& o) {
  sub.add_option("--preset", o.preset, "Built-in scenario: exp1, exp2 or exp3");
  sub.add_option("--controller", o.controller, "Controller kind: pi or fuzzy");
  sub.add_option("--config", o.config_path, "Config file (key = value)");
  sub.add_option("--set", o.overrides, "Override a config key, key=value (repeatable)");
  sub.add_option("--out", o.out_dir, "Output directory")->capture_default_str();
  sub.add_option("--seed", o.seed, "Random seed for noise and roughness");
}

ControllerKind parse_kind_flag(const std::string& text) {
  if (text == "pi") return ControllerKind::PI;
  if (text == "fuzzy") return ControllerKind::FuzzyPI;
  throw ConfigInvalid("controller.kind", "expected pi or fuzzy, got '" + text + "'");
}

// Layering: defaults, --preset, --config, --controller, --set, --seed.
RunConfig build_config(const CommonOptions& o, bool kind_required) {
  RunConfig cfg;
  if (!o.preset.empty()) {
    auto p = sim::parse_preset(o.preset);
    if (!p) throw ConfigInvalid("preset", "expected exp1, exp2 or exp3, got '" + o.preset + "'");
    config::apply_preset(cfg, *p);
  }
  if (!o.config_path.empty()) config::apply(cfg, Document::load(o.config_path));
  if (!o.controller.empty()) {
    cfg.scenario.controller.kind = parse_kind_flag(o.controller);
    cfg.kind_set = true;
  }
  for (const auto& s : o.overrides) config::apply_override(cfg, s);
  if (o.seed) cfg.scenario.seed = *o.seed;
  if (!kind_required) cfg.kind_set = true;
  config::finalize(cfg);
  if (!cfg.scenario.controller.rules_file.empty()) {
    try {
      (void)fuzzy::RuleBase::load(cfg.scenario.controller.rules_file);
    } catch (const fuzzy::RuleBaseError& ex) {
      throw ConfigInvalid("controller.rules_file", ex.what());
    }
  }
  return cfg;
}

std::string output_path(const std::string& dir, const std::string& file) {
  return (std::filesystem::path(dir) / file).string();
}

void put_metrics(Document& d, const std::string& prefix, const sim::Metrics& m) {
  d.set(prefix + "first_contact_time", format_double(m.first_contact_time));
  d.set(prefix + "overshoot_pct", format_double(m.overshoot_pct));
  d.set(prefix + "settled", m.settling_time ? "true" : "false");
  d.set(prefix + "settling_time", m.settling_time ? format_double(*m.settling_time) : "none");
  d.set(prefix + "steady_state_rms", format_double(m.steady_state_rms));
  d.set(prefix + "max_force", format_double(m.max_force));
  d.set(prefix + "itae", format_double(m.itae));
}

void put_axis_results(Document& d, const std::string& prefix, const RunConfig& cfg,
                      const sim::Trace& trace, Axis a) {
  const auto& s = cfg.scenario;
  d.set(prefix + "force_controlled", s.selection[a] ? "true" : "false");
  d.set(prefix + "setpoint", format_double(s.setpoint[a]));
  d.set(prefix + "steady_state_mean",
        format_double(sim::tail_mean(trace, a, cfg.metrics.steady_fraction)));
  d.set(prefix + "final_half_mean", format_double(sim::tail_mean(trace, a, 0.5)));
  try {
    const auto m = sim::compute_metrics(trace, a, s.setpoint[a], cfg.metrics);
    d.set(prefix + "contact", "true");
    put_metrics(d, prefix, m);
  } catch (const sim::NoContact&) {
    d.set(prefix + "contact", "false");
  }
}

Document config_header(const RunConfig& cfg, const std::string& title) {
  Document d;
  d.comment(title);
  const Document body = config::to_document(cfg);
  for (const auto& e : body.entries()) d.set(e.key, e.value);
  return d;
}

int cmd_run(const CommonOptions& o, std::ostream& out) {
  const RunConfig cfg = build_config(o, true);
  const sim::Trace trace = sim::run(cfg.scenario);

  Document summary = config_header(cfg, "hfcsim run summary");
  summary.set("result.ticks", std::to_string(trace.rows.size()));
  for (Axis a : kAxes) {
    put_axis_results(summary, "result." + std::string(axis_name(a)) + ".", cfg, trace, a);
  }

  const std::string stem = cfg.scenario.name + "-" + std::string(kind_name(cfg.scenario.controller.kind));
  const std::string csv_path = output_path(o.out_dir, stem + ".csv");
  const std::string summary_path = output_path(o.out_dir, stem + ".summary");
  csv::write_file_atomic(csv_path, csv::trace_text(trace));
  csv::write_file_atomic(summary_path, summary.to_text());
  out << "wrote " << csv_path << "\n" << "wrote " << summary_path << "\n";
  return kOk;
}

int cmd_compare(const CommonOptions& o, std::ostream& out) {
  const RunConfig cfg = build_config(o, false);
  sim::Scenario sa = cfg.scenario;
  sim::Scenario sb = cfg.scenario;
  sa.controller.kind = cfg.compare_a;
  sb.controller.kind = cfg.compare_b;
  const sim::Trace ta = sim::run(sa);
  const sim::Trace tb = sim::run(sb);

  Document report = config_header(cfg, "hfcsim comparison report");
  for (Axis a : kAxes) {
    if (!cfg.scenario.selection[a]) continue;
    const std::string p = "report." + std::string(axis_name(a)) + ".";
    report.set(p + "setpoint", format_double(cfg.scenario.setpoint[a]));
    try {
      const auto r = sim::compare(ta, tb, a, cfg.scenario.setpoint[a], cfg.metrics);
      put_metrics(report, p + "a.", r.a);
      put_metrics(report, p + "b.", r.b);
      report.set(p + "delta.overshoot_pct", format_double(r.d_overshoot_pct));
      report.set(p + "delta.settling_time",
                 r.d_settling_time ? format_double(*r.d_settling_time) : "none");
      report.set(p + "delta.steady_state_rms", format_double(r.d_steady_state_rms));
      report.set(p + "delta.max_force", format_double(r.d_max_force));
      report.set(p + "delta.itae", format_double(r.d_itae));
    } catch (const sim::NoContact&) {
      report.set(p + "contact", "false");
    }
    report.set(p + "a.steady_state_mean",
               format_double(sim::tail_mean(ta, a, cfg.metrics.steady_fraction)));
    report.set(p + "b.steady_state_mean",
               format_double(sim::tail_mean(tb, a, cfg.metrics.steady_fraction)));
  }

  const std::string& name = cfg.scenario.name;
  const std::string path_a =
      output_path(o.out_dir, name + "-a-" + std::string(kind_name(cfg.compare_a)) + ".csv");
  const std::string path_b =
      output_path(o.out_dir, name + "-b-" + std::string(kind_name(cfg.compare_b)) + ".csv");
  const std::string path_r = output_path(o.out_dir, name + "-compare.report");
  csv::write_file_atomic(path_a, csv::trace_text(ta));
  csv::write_file_atomic(path_b, csv::trace_text(tb));
  csv::write_file_atomic(path_r, report.to_text());
  out << "wrote " << path_a << "\n" << "wrote " << path_b << "\n" << "wrote " << path_r << "\n";
  return kOk;
}

int cmd_tune(const CommonOptions& o, std::ostream& out) {
  const RunConfig cfg = build_config(o, true);
  const ControllerKind kind = cfg.scenario.controller.kind;
  if (cfg.grid.kp.empty()) throw ConfigInvalid("tune.grid.kp", "required for tune");
  if (cfg.grid.ki.empty()) throw ConfigInvalid("tune.grid.ki", "required for tune");
  if (kind == ControllerKind::FuzzyPI && cfg.grid.kx.empty()) {
    throw ConfigInvalid("tune.grid.kx", "required when tuning the fuzzy controller");
  }
  const Axis axis = cfg.tune_axis;
  const sim::TuneResult result = sim::tune(cfg.scenario, axis, cfg.grid, cfg.weights,
                                           cfg.metrics, std::thread::hardware_concurrency());

  Document board = config_header(cfg, "hfcsim tuner leaderboard, best first");
  board.set("leaderboard.size", std::to_string(result.leaderboard.size()));
  for (std::size_t i = 0; i < result.leaderboard.size(); ++i) {
    const auto& e = result.leaderboard[i];
    const std::string p = "leaderboard." + std::to_string(i + 1) + ".";
    board.set(p + "kp", format_double(e.gains.kp));
    board.set(p + "ki", format_double(e.gains.ki));
    if (kind == ControllerKind::FuzzyPI) board.set(p + "kx", format_double(e.gains.kx));
    if (e.failed) {
      board.set(p + "failed", "true");
      board.set(p + "failure", e.failure);
      continue;
    }
    board.set(p + "objective", format_double(e.objective));
    put_metrics(board, p, e.metrics);
  }

  Document gains = config::gains_document(kind, axis, result.best().gains);
  const std::string stem = cfg.scenario.name + "-" + std::string(kind_name(kind)) + "-" +
                           std::string(axis_name(axis));
  const std::string board_path = output_path(o.out_dir, stem + ".leaderboard");
  const std::string gains_path = output_path(o.out_dir, stem + ".gains");
  csv::write_file_atomic(board_path, board.to_text());
  csv::write_file_atomic(gains_path, gains.to_text());
  out << "wrote " << board_path << "\n" << "wrote " << gains_path << "\n";
  return kOk;
}

std::string set_text(const fuzzy::FuzzySet& s) {
  std::string t;
  for (fuzzy::Label l : fuzzy::kAllLabels) {
    if (s[l] <= 0.0) continue;
    if (!t.empty()) t += " ";
    t += std::string(fuzzy::name(l)) + ":" + format_double(s[l]);
  }
  return t.empty() ? "(empty)" : t;
}

int cmd_infer(const InferOptions& o, std::ostream& out) {
  const fuzzy::RuleBase rules =
      o.rules.empty() ? fuzzy::RuleBase::standard() : fuzzy::RuleBase::load(o.rules);
  const fuzzy::MembershipFamily family;
  const double e_norm = std::clamp(o.ki * o.e, -1.0, 1.0);
  const double de_norm = std::clamp(o.kp * o.de, -1.0, 1.0);
  const auto e_set = fuzzy::fuzzify(e_norm, family);
  const auto de_set = fuzzy::fuzzify(de_norm, family);
  const auto inf = fuzzy::infer_detailed(e_set, de_set, rules, family);
  const double centroid = fuzzy::defuzzify_coa(inf.output);

  out << "e = " << format_double(o.e) << "  de = " << format_double(o.de) << "\n";
  out << "scaled: ki*e = " << format_double(e_norm) << "  kp*de = " << format_double(de_norm)
      << "\n";
  out << "fuzzified e:  " << set_text(e_set) << "\n";
  out << "fuzzified de: " << set_text(de_set) << "\n";
  out << "fired rules:\n";
  for (const auto& r : inf.fired) {
    out << "  e=" << fuzzy::name(r.e) << " de=" << fuzzy::name(r.de) << " -> "
        << fuzzy::name(r.out) << " strength " << format_double(r.strength) << "\n";
  }
  out << "aggregate clip levels:";
  for (fuzzy::Label l : fuzzy::kAllLabels) {
    const double lv = inf.output.levels()[fuzzy::index(l)];
    if (lv > 0.0) out << " " << fuzzy::name(l) << ":" << format_double(lv);
  }
  out << "\ncentroid = " << format_double(centroid) << "\n";
  out << "du = kx*centroid = " << format_double(o.kx * centroid) << "\n";
  return kOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hybrid force/motion control simulator"};
  app.require_subcommand(1);

  CommonOptions run_opts, compare_opts, tune_opts;
  InferOptions infer_opts;
  auto* run = app.add_subcommand("run", "Simulate one scenario, write CSV trace and summary");
  add_common(*run, run_opts);
  auto* cmp = app.add_subcommand("compare", "Run two controllers on one scenario and compare");
  add_common(*cmp, compare_opts);
  auto* tun = app.add_subcommand("tune", "Grid-search the gains of one axis");
  add_common(*tun, tune_opts);
  auto* inf = app.add_subcommand("infer", "Trace one fuzzy controller evaluation");
  inf->add_option("--e", infer_opts.e, "Force error [N]");
  inf->add_option("--de", infer_opts.de, "Change of force error [N]");
  inf->add_option("--kp", infer_opts.kp, "Scale applied to de")->capture_default_str();
  inf->add_option("--ki", infer_opts.ki, "Scale applied to e")->capture_default_str();
  inf->add_option("--kx", infer_opts.kx, "Output scale")->capture_default_str();
  inf->add_option("--rules", infer_opts.rules, "Rule base file (default: built-in table)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kConfigError;
  }

  try {
    if (*run) return cmd_run(run_opts, out);
    if (*cmp) return cmd_compare(compare_opts, out);
    if (*tun) return cmd_tune(tune_opts, out);
    return cmd_infer(infer_opts, out);
  } catch (const ConfigInvalid& ex) {
    err << "config error: " << ex.what() << "\n";
    return kConfigError;
  } catch (const fuzzy::RuleBaseError& ex) {
    err << "config error: " << ex.what() << "\n";
    return kConfigError;
  } catch (const sim::SimulationAborted& ex) {
    err << "simulation aborted at tick " << ex.tick() << " (t = " << format_double(ex.time())
        << " s): " << ex.what() << "\n";
    return kSimulationAborted;
  } catch (const sim::AllRunsFailed& ex) {
    err << "tuner failure: " << ex.what() << "\n";
    return kTunerFailure;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return 1;
  }
}

}  // namespace hfc::cli
