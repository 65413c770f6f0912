// Acceptance suite: one PASS/FAIL line per criterion. With no arguments all
// criteria run; otherwise only the numbered ones. Exit status is nonzero if
// any selected criterion fails.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "cli.hpp"
#include "hfc/control.hpp"
#include "hfc/fuzzy.hpp"
#include "hfc/plant.hpp"
#include "hfc/sim.hpp"
#include "oracles.hpp"

using namespace hfc;
using control::ControllerKind;
using sim::Preset;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), f, a, b);
  return buf;
}

// Rows de = PL..NL, columns e = NL..PL.
constexpr const char* kTable[7][7] = {
    {"nl", "nm", "ns", "zr", "pm", "pl", "pl"},
    {"nl", "nl", "nm", "zr", "pm", "pl", "pl"},
    {"nl", "nl", "ns", "zr", "ps", "pl", "pl"},
    {"nl", "nm", "ns", "zr", "ps", "pm", "pl"},
    {"nl", "nl", "ns", "zr", "ps", "pl", "pl"},
    {"nl", "nl", "nm", "zr", "pm", "pl", "pl"},
    {"nl", "nl", "nm", "zr", "ps", "pm", "pl"},
};

Outcome ac1_rule_base() {
  using namespace fuzzy;
  const RuleBase rb = RuleBase::standard();
  int mismatches = 0, antisym = 0, monotone = 0, zr_col = 0;
  for (Label e : kAllLabels) {
    for (Label de : kAllLabels) {
      if (rb.lookup(e, de) != *parse_label(kTable[6 - index(de)][index(e)])) ++mismatches;
      if (rb.lookup(negate(e), negate(de)) != negate(rb.lookup(e, de))) ++antisym;
    }
  }
  for (Label de : kAllLabels) {
    for (std::size_t i = 0; i + 1 < kLabelCount; ++i) {
      if (index(rb.lookup(label_at(i), de)) > index(rb.lookup(label_at(i + 1), de))) ++monotone;
    }
    if (rb.lookup(Label::ZR, de) != Label::ZR) ++zr_col;
  }
  const bool ok = mismatches == 0 && antisym == 0 && monotone == 0 && zr_col == 0;
  return {ok, "49 cells: " + std::to_string(mismatches) + " mismatches; antisymmetry " +
                  std::to_string(antisym) + ", monotonicity " + std::to_string(monotone) +
                  ", ZR column " + std::to_string(zr_col) + " violations"};
}

Outcome ac2_defuzzifier() {
  using namespace fuzzy;
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> level(0.0, 1.0);
  std::bernoulli_distribution fires(0.4);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    AggregatedOutput agg{MembershipFamily{}};
    std::array<double, kLabelCount> levels{};
    for (std::size_t k = 0; k < kLabelCount; ++k) {
      if (fires(rng)) {
        levels[k] = level(rng);
        agg.add(label_at(k), levels[k]);
      }
    }
    if (agg.empty()) {
      levels[0] = 1.0;
      agg.add(Label::NL, 1.0);
    }
    worst = std::max(worst, std::abs(defuzzify_coa(agg) - oracle::coa_riemann(levels, 1'000'000)));
  }
  const Engine engine;
  const double zero = std::abs(control::fuzzy_pi_step({1.0, 1.0, 1.0}, 0.0, 0.0, engine));
  return {worst <= 1e-6 && zero <= 1e-9,
          fmt("max |CoA - oracle| = %.3g over 100 sets; |du(0,0)| = %.3g", worst, zero)};
}

Outcome ac3_experiment2() {
  const sim::Gains g = sim::shipped_gains(Preset::Exp2);
  std::string detail;
  bool ok = true;
  for (ControllerKind k : {ControllerKind::PI, ControllerKind::FuzzyPI}) {
    const char* name = k == ControllerKind::PI ? "PI" : "fuzzy-PI";
    const sim::Trace smooth = sim::run(sim::experiment2_scenario(k, g, true));
    sim::MetricsOptions tight;
    tight.band_pct = 0.5 / 30.0 * 100.0;
    const auto m = sim::compute_metrics(smooth, Axis::Z, 30.0, tight);
    const double final_err = std::abs(smooth.rows.back().force.z - 30.0);
    const bool smooth_ok = m.settling_time.has_value();
    const double rough_mean =
        sim::tail_mean(sim::run(sim::experiment2_scenario(k, g, false)), Axis::Z, 0.5);
    const bool rough_ok = std::abs(rough_mean - 30.0) <= 1.0;
    ok = ok && smooth_ok && rough_ok;
    detail += std::string(name) + ": smooth " +
              (smooth_ok ? fmt("within 0.5 N from t=%.2f s", *m.settling_time)
                         : fmt("never stays within 0.5 N (final |e| %.3g N)", final_err)) +
              fmt(", rough final-half mean %.3f N; ", rough_mean);
  }
  return {ok, detail};
}

Outcome ac4_experiment1() {
  const sim::Scenario pi_s = sim::make_preset(Preset::Exp1, ControllerKind::PI);
  const sim::Scenario fz_s = sim::make_preset(Preset::Exp1, ControllerKind::FuzzyPI);
  sim::Scenario base = pi_s;
  base.selection = {false, false};
  const auto pi = sim::compute_metrics(sim::run(pi_s), Axis::Z, 10.0);
  const auto fz = sim::compute_metrics(sim::run(fz_s), Axis::Z, 10.0);
  const auto bl = sim::compute_metrics(sim::run(base), Axis::Z, 10.0);

  const bool os = fz.overshoot_pct < pi.overshoot_pct;
  const bool st = fz.settling_time && pi.settling_time && *fz.settling_time < *pi.settling_time;
  const bool safe = pi.max_force < bl.max_force && fz.max_force < bl.max_force;
  auto settle = [](const sim::Metrics& m) {
    return m.settling_time ? fmt("%.2f s", *m.settling_time) : std::string("not settled");
  };
  std::string detail = fmt("overshoot fuzzy %.1f %% vs PI %.1f %%", fz.overshoot_pct, pi.overshoot_pct) +
                       (os ? " (ok)" : " (not smaller)") + "; settling fuzzy " + settle(fz) +
                       " vs PI " + settle(pi) + (st ? " (ok)" : " (not shorter)") +
                       fmt("; max force fuzzy %.1f N, PI %.1f N", fz.max_force, pi.max_force) +
                       fmt(" vs baseline %.1f N", bl.max_force) + (safe ? " (ok)" : " (not below)");
  return {os && st && safe, detail};
}

Outcome ac5_experiment3() {
  std::string detail;
  bool ok = true;
  for (ControllerKind k : {ControllerKind::PI, ControllerKind::FuzzyPI}) {
    const sim::Trace tr = sim::run(sim::make_preset(Preset::Exp3, k));
    const double fx = sim::tail_mean(tr, Axis::X, 0.2);
    const double fz = sim::tail_mean(tr, Axis::Z, 0.2);
    ok = ok && std::abs(fx - 6.0) <= 1.0 && std::abs(fz - 30.0) <= 1.0;
    detail += std::string(k == ControllerKind::PI ? "PI" : "fuzzy-PI") +
              fmt(": steady means x %.3f N, z %.3f N; ", fx, fz);
  }
  return {ok, detail};
}

Outcome ac6_kinematics() {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> radius(0.02, 0.999), angle(-M_PI, M_PI);
  double worst_rt = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double r = radius(rng), a = angle(rng);
    const plant::Pose target{r * std::cos(a), r * std::sin(a)};
    plant::PlanarArm arm;
    arm.q = plant::ik(0.5, 0.5, target, plant::Elbow::Down);
    const plant::Pose p = plant::fk(arm);
    worst_rt = std::max(worst_rt, std::hypot(p.x - target.x, p.z - target.z));
  }
  double worst_j = 0.0;
  const double h = 1e-7;
  bool linear = true;
  std::uniform_real_distribution<double> force(-100.0, 100.0);
  for (int i = 0; i < 100; ++i) {
    plant::PlanarArm arm;
    arm.q = plant::JointAngles(angle(rng), angle(rng));
    const Eigen::Matrix2d j = plant::jacobian(arm);
    for (int c = 0; c < 2; ++c) {
      plant::PlanarArm p = arm, m = arm;
      p.q[c] += h;
      m.q[c] -= h;
      const plant::Pose fp = plant::fk(p), fm = plant::fk(m);
      worst_j = std::max(worst_j, std::abs(j(0, c) - (fp.x - fm.x) / (2 * h)));
      worst_j = std::max(worst_j, std::abs(j(1, c) - (fp.z - fm.z) / (2 * h)));
    }
    const AxisForce f{force(rng), force(rng)};
    const Eigen::Vector2d t = plant::joint_torques(arm, f);
    linear = linear && plant::joint_torques(arm, {4 * f.x, 4 * f.z}) == 4 * t &&
             plant::joint_torques(arm, {-f.x, -f.z}) == -t &&
             plant::joint_torques(arm, {0.0, 0.0}) == Eigen::Vector2d::Zero();
  }
  return {worst_rt <= 1e-9 && worst_j <= 1e-6 && linear,
          fmt("fk/ik round trip max %.3g m; Jacobian vs FD max %.3g", worst_rt, worst_j) +
              (linear ? "; torque map linear" : "; torque map NOT linear")};
}

Outcome ac7_pi_equivalence() {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n(0.0, 20.0);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> e(1000);
    for (auto& v : e) v = n(rng);
    const double kp = 1e-4, ki = 5e-5, u0 = 0.0;
    const auto want = oracle::pi_closed_form(e, kp, ki, u0);
    control::ControllerState s;
    for (std::size_t k = 0; k < e.size(); ++k) {
      const auto err = control::error_step(e[k], 0.0, s);
      const double u = control::accumulate(s, control::pi_step({kp, ki}, err.e, err.de, HUGE_VAL),
                                           -HUGE_VAL, HUGE_VAL);
      worst = std::max(worst, std::abs(u - want[k]));
    }
  }
  return {worst <= 1e-12, fmt("max |incremental - closed form| = %.3g over 1000 sequences", worst)};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

Outcome ac8_determinism() {
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / "hfc_acceptance_determinism";
  fs::remove_all(root);
  int identical = 0, total = 0;
  for (const char* preset : {"exp1", "exp2", "exp3"}) {
    for (const char* kind : {"pi", "fuzzy"}) {
      std::string texts[2];
      for (int rep = 0; rep < 2; ++rep) {
        const std::string dir = (root / std::to_string(rep)).string();
        const char* argv[] = {"hfcsim", "run", "--preset", preset, "--controller", kind,
                              "--seed", "12345", "--out", dir.c_str()};
        std::ostringstream out, err;
        if (cli::run_cli(10, argv, out, err) != 0) return {false, "run failed: " + err.str()};
        texts[rep] = slurp(root / std::to_string(rep) / (std::string(preset) + "-" + kind + ".csv"));
      }
      ++total;
      if (!texts[0].empty() && texts[0] == texts[1]) ++identical;
    }
  }
  fs::remove_all(root);
  return {identical == total,
          std::to_string(identical) + "/" + std::to_string(total) + " preset traces byte-identical"};
}

Outcome ac9_fuzzy_bound() {
  const fuzzy::Engine engine;
  const control::FuzzyPIGains g{0.25, 0.25, 1e-3};
  double worst_bound = 0.0, worst_sym = 0.0;
  for (int i = 0; i <= 100; ++i) {
    for (int j = 0; j <= 100; ++j) {
      const double e = -6.0 + 0.12 * i;
      const double de = -6.0 + 0.12 * j;
      const double du = control::fuzzy_pi_step(g, e, de, engine);
      worst_bound = std::max(worst_bound, std::abs(du) - g.kx);
      worst_sym = std::max(worst_sym, std::abs(control::fuzzy_pi_step(g, -e, -de, engine) + du));
    }
  }
  return {worst_bound <= 0.0 && worst_sym <= 1e-9,
          fmt("max |du| - kx = %.3g; max antisymmetry error %.3g", worst_bound, worst_sym)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::function<Outcome()> criteria[] = {
      ac1_rule_base,   ac2_defuzzifier,   ac3_experiment2,    ac4_experiment1, ac5_experiment3,
      ac6_kinematics,  ac7_pi_equivalence, ac8_determinism, ac9_fuzzy_bound,
  };
  const char* titles[] = {
      "rule-base fidelity",       "defuzzifier correctness", "experiment-2 regulation",
      "experiment-1 comparison",  "experiment-3 regulation", "kinematics",
      "PI-form equivalence",      "determinism",             "fuzzy-PI bound and antisymmetry",
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  int failed = 0;
  for (int n = 1; n <= 9; ++n) {
    if (!selected.empty() && !selected.count(n)) continue;
    const Outcome o = criteria[n - 1]();
    std::printf("AC%d %s  %s: %s\n", n, o.pass ? "PASS" : "FAIL", titles[n - 1], o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
