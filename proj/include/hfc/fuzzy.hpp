#pragma once

// Mamdani fuzzy inference over seven linguistic labels: triangular
// membership families, a 7x7 (e, de) rule base, min/max inference and
// center-of-area defuzzification.

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hfc::fuzzy {

enum class Label : int { NL = 0, NM, NS, ZR, PS, PM, PL };

inline constexpr std::size_t kLabelCount = 7;
inline constexpr std::array<Label, kLabelCount> kAllLabels = {
    Label::NL, Label::NM, Label::NS, Label::ZR, Label::PS, Label::PM, Label::PL};

constexpr std::size_t index(Label l) { return static_cast<std::size_t>(l); }
constexpr Label label_at(std::size_t i) { return static_cast<Label>(i); }
constexpr Label negate(Label l) { return label_at(kLabelCount - 1 - index(l)); }

/// Upper-case name ("NL" .. "PL").
std::string_view name(Label l);
/// Case-insensitive parse; std::nullopt for anything but the seven names.
std::optional<Label> parse_label(std::string_view text);

/// Seven triangular shapes on the normalized universe [-1, 1]. The outermost
/// labels saturate: NL is 1 for every x at or below its center, PL for every
/// x at or above its center.
class MembershipFamily {
 public:
  /// Evenly spaced centers {-1, -2/3, ..., 1} with half-width 1/3.
  MembershipFamily();
  /// Throws std::invalid_argument unless the centers are strictly increasing,
  /// symmetric about zero and half_width > 0.
  MembershipFamily(const std::array<double, kLabelCount>& centers, double half_width);

  double degree(Label l, double x) const;
  /// Degree of `l` clipped at `level` (min-implication).
  double clipped(Label l, double level, double x) const;

  const std::array<double, kLabelCount>& centers() const { return centers_; }
  double half_width() const { return half_width_; }
  double center(Label l) const { return centers_[index(l)]; }

 private:
  std::array<double, kLabelCount> centers_;
  double half_width_;
};

struct FuzzySet {
  std::array<double, kLabelCount> degrees{};

  double operator[](Label l) const { return degrees[index(l)]; }
  double& operator[](Label l) { return degrees[index(l)]; }
  double total() const;
};

/// x is clamped to [-1, 1] before evaluation.
FuzzySet fuzzify(double x, const MembershipFamily& family = MembershipFamily{});

class RuleBaseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RuleBase {
 public:
  /// The PI-like MacVicar-Whelan table as used for force control.
  static RuleBase standard();

  /// Reads a 7x7 grid of label names: rows are de from PL (first) to NL
  /// (last), columns are e from NL to PL. Blank lines and `#` comments are
  /// ignored.
  static RuleBase parse(std::string_view text);
  static RuleBase load(const std::string& path);
  /// Inverse of parse().
  std::string to_text() const;

  Label lookup(Label e, Label de) const { return cells_[index(e)][index(de)]; }

  bool operator==(const RuleBase&) const = default;

 private:
  // cells_[e][de]
  std::array<std::array<Label, kLabelCount>, kLabelCount> cells_{};
};

inline Label rule_lookup(Label e, Label de, const RuleBase& rules) {
  return rules.lookup(e, de);
}

struct FiredRule {
  Label e;
  Label de;
  Label out;
  double strength;
};

/// Pointwise maximum of output shapes, each clipped at its firing strength.
class AggregatedOutput {
 public:
  explicit AggregatedOutput(MembershipFamily family) : family_(std::move(family)) {}

  /// Merges a clip into the aggregate; only the largest clip per label
  /// matters under max-aggregation.
  void add(Label out, double level);

  double operator()(double x) const;
  /// Clip level per output label (0 when the label never fired).
  const std::array<double, kLabelCount>& levels() const { return levels_; }
  const MembershipFamily& family() const { return family_; }
  bool empty() const;

  /// Points in [-1, 1] where the aggregate may change slope.
  std::vector<double> breakpoints() const;

 private:
  MembershipFamily family_;
  std::array<double, kLabelCount> levels_{};
};

struct Inference {
  AggregatedOutput output;
  std::vector<FiredRule> fired;
};

/// Mamdani inference: AND = min, implication = min, aggregation = max.
Inference infer_detailed(const FuzzySet& e_set, const FuzzySet& de_set, const RuleBase& rules,
                         const MembershipFamily& out_family = MembershipFamily{});

inline AggregatedOutput infer(const FuzzySet& e_set, const FuzzySet& de_set,
                              const RuleBase& rules,
                              const MembershipFamily& out_family = MembershipFamily{}) {
  return infer_detailed(e_set, de_set, rules, out_family).output;
}

inline constexpr std::size_t kCoaGridSize = 2001;

/// Center of area over the uniform grid on [-1, 1]. Grid cells that contain
/// a slope change of the aggregate are split there, so piecewise-linear
/// aggregates integrate exactly. Returns 0 when nothing fired.
double defuzzify_coa(const AggregatedOutput& agg);

/// fuzzify -> infer -> defuzzify on already-normalized inputs.
class Engine {
 public:
  Engine() : rules_(RuleBase::standard()) {}
  explicit Engine(RuleBase rules, MembershipFamily in = {}, MembershipFamily out = {})
      : rules_(std::move(rules)), in_(std::move(in)), out_(std::move(out)) {}

  double evaluate(double e_norm, double de_norm) const;

  const RuleBase& rules() const { return rules_; }
  const MembershipFamily& input_family() const { return in_; }
  const MembershipFamily& output_family() const { return out_; }

 private:
  RuleBase rules_;
  MembershipFamily in_;
  MembershipFamily out_;
};

}  // namespace hfc::fuzzy
