#include "hfc/fuzzy.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace hfc::fuzzy {

namespace {

constexpr std::array<std::string_view, kLabelCount> kNames = {"NL", "NM", "NS", "ZR",
                                                               "PS", "PM", "PL"};

std::string strip_comment(std::string line) {
  if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
  return line;
}

}  // namespace

std::string_view name(Label l) { return kNames[index(l)]; }

std::optional<Label> parse_label(std::string_view text) {
  if (text.size() != 2) return std::nullopt;
  const char a = static_cast<char>(std::toupper(static_cast<unsigned char>(text[0])));
  const char b = static_cast<char>(std::toupper(static_cast<unsigned char>(text[1])));
  for (std::size_t i = 0; i < kLabelCount; ++i) {
    if (kNames[i][0] == a && kNames[i][1] == b) return label_at(i);
  }
  return std::nullopt;
}

// --- membership ------------------------------------------------------------

MembershipFamily::MembershipFamily()
    : MembershipFamily({-1.0, -2.0 / 3.0, -1.0 / 3.0, 0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0},
                       1.0 / 3.0) {}

MembershipFamily::MembershipFamily(const std::array<double, kLabelCount>& centers,
                                   double half_width)
    : centers_(centers), half_width_(half_width) {
  if (!(half_width > 0.0) || !std::isfinite(half_width)) {
    throw std::invalid_argument("membership half_width must be positive");
  }
  for (std::size_t i = 0; i + 1 < kLabelCount; ++i) {
    if (!(centers[i] < centers[i + 1])) {
      throw std::invalid_argument("membership centers must be strictly increasing");
    }
  }
  for (std::size_t i = 0; i < kLabelCount; ++i) {
    if (std::abs(centers[i] + centers[kLabelCount - 1 - i]) > 1e-12) {
      throw std::invalid_argument("membership centers must be symmetric about zero");
    }
  }
}

double MembershipFamily::degree(Label l, double x) const {
  const double c = centers_[index(l)];
  if (l == Label::NL && x <= c) return 1.0;
  if (l == Label::PL && x >= c) return 1.0;
  return std::max(0.0, 1.0 - std::abs(x - c) / half_width_);
}

double MembershipFamily::clipped(Label l, double level, double x) const {
  return std::min(level, degree(l, x));
}

double FuzzySet::total() const {
  double s = 0.0;
  for (double d : degrees) s += d;
  return s;
}

FuzzySet fuzzify(double x, const MembershipFamily& family) {
  const double xc = std::clamp(x, -1.0, 1.0);
  FuzzySet set;
  for (Label l : kAllLabels) set[l] = family.degree(l, xc);
  return set;
}

// --- rule base -------------------------------------------------------------

RuleBase RuleBase::standard() {
  // Printed orientation: one row per de (PL first), columns e from NL to PL.
  static constexpr const char* kTable = R"(
    nl nm ns zr pm pl pl
    nl nl nm zr pm pl pl
    nl nl ns zr ps pl pl
    nl nm ns zr ps pm pl
    nl nl ns zr ps pl pl
    nl nl nm zr pm pl pl
    nl nl nm zr ps pm pl
  )";
  return parse(kTable);
}

RuleBase RuleBase::parse(std::string_view text) {
  RuleBase rb;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t row = 0;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream tokens(strip_comment(line));
    std::vector<std::string> words;
    for (std::string w; tokens >> w;) words.push_back(w);
    if (words.empty()) continue;
    if (row >= kLabelCount) {
      throw RuleBaseError("rule base: more than 7 rows (line " + std::to_string(line_no) + ")");
    }
    if (words.size() != kLabelCount) {
      throw RuleBaseError("rule base: expected 7 labels on line " + std::to_string(line_no) +
                          ", got " + std::to_string(words.size()));
    }
    // Row 0 is de = PL.
    const Label de = label_at(kLabelCount - 1 - row);
    for (std::size_t col = 0; col < kLabelCount; ++col) {
      auto out = parse_label(words[col]);
      if (!out) {
        throw RuleBaseError("rule base: unknown label '" + words[col] + "' on line " +
                            std::to_string(line_no));
      }
      rb.cells_[col][index(de)] = *out;
    }
    ++row;
  }
  if (row != kLabelCount) {
    throw RuleBaseError("rule base: expected 7 rows, got " + std::to_string(row));
  }
  return rb;
}

RuleBase RuleBase::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw RuleBaseError("rule base: cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

std::string RuleBase::to_text() const {
  std::string out = "# rows: de = PL .. NL; columns: e = NL .. PL\n";
  for (std::size_t row = 0; row < kLabelCount; ++row) {
    const Label de = label_at(kLabelCount - 1 - row);
    for (std::size_t col = 0; col < kLabelCount; ++col) {
      std::string_view n = name(cells_[col][index(de)]);
      out += static_cast<char>(std::tolower(static_cast<unsigned char>(n[0])));
      out += static_cast<char>(std::tolower(static_cast<unsigned char>(n[1])));
      out += col + 1 < kLabelCount ? ' ' : '\n';
    }
  }
  return out;
}

// --- inference -------------------------------------------------------------

void AggregatedOutput::add(Label out, double level) {
  auto& slot = levels_[index(out)];
  slot = std::max(slot, std::clamp(level, 0.0, 1.0));
}

double AggregatedOutput::operator()(double x) const {
  double m = 0.0;
  for (Label l : kAllLabels) {
    const double level = levels_[index(l)];
    if (level > 0.0) m = std::max(m, family_.clipped(l, level, x));
  }
  return m;
}

bool AggregatedOutput::empty() const {
  return std::all_of(levels_.begin(), levels_.end(), [](double v) { return v <= 0.0; });
}

std::vector<double> AggregatedOutput::breakpoints() const {
  const double hw = family_.half_width();
  std::vector<double> pts = {-1.0, 1.0};
  std::vector<Label> active;
  for (Label l : kAllLabels) {
    const double level = levels_[index(l)];
    if (level <= 0.0) continue;
    active.push_back(l);
    const double c = family_.center(l);
    const double reach = hw * (1.0 - level);
    pts.insert(pts.end(), {c - hw, c, c + hw, c - reach, c + reach});
  }
  std::erase_if(pts, [](double p) { return p < -1.0 || p > 1.0; });
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  // Every clipped shape is linear between consecutive vertices; add the
  // points where two of them cross, since max() kinks there.
  std::vector<double> crossings;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    const double a = pts[k];
    const double b = pts[k + 1];
    for (std::size_t i = 0; i < active.size(); ++i) {
      for (std::size_t j = i + 1; j < active.size(); ++j) {
        const Label li = active[i];
        const Label lj = active[j];
        const double da = family_.clipped(li, levels_[index(li)], a) -
                          family_.clipped(lj, levels_[index(lj)], a);
        const double db = family_.clipped(li, levels_[index(li)], b) -
                          family_.clipped(lj, levels_[index(lj)], b);
        if ((da < 0.0 && db > 0.0) || (da > 0.0 && db < 0.0)) {
          crossings.push_back(a + (b - a) * da / (da - db));
        }
      }
    }
  }
  pts.insert(pts.end(), crossings.begin(), crossings.end());
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

Inference infer_detailed(const FuzzySet& e_set, const FuzzySet& de_set, const RuleBase& rules,
                         const MembershipFamily& out_family) {
  Inference result{AggregatedOutput(out_family), {}};
  for (Label e : kAllLabels) {
    if (e_set[e] <= 0.0) continue;
    for (Label de : kAllLabels) {
      const double strength = std::min(e_set[e], de_set[de]);
      if (strength <= 0.0) continue;
      const Label out = rules.lookup(e, de);
      result.fired.push_back({e, de, out, strength});
      result.output.add(out, strength);
    }
  }
  return result;
}

double defuzzify_coa(const AggregatedOutput& agg) {
  if (agg.empty()) return 0.0;

  // Integer-based nodes so the grid is exactly symmetric about zero.
  const auto half = static_cast<double>((kCoaGridSize - 1) / 2);
  std::vector<double> nodes;
  nodes.reserve(kCoaGridSize + 64);
  for (std::size_t i = 0; i < kCoaGridSize; ++i) {
    nodes.push_back((static_cast<double>(i) - half) / half);
  }
  const auto kinks = agg.breakpoints();
  nodes.insert(nodes.end(), kinks.begin(), kinks.end());
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());

  // Linear between nodes: trapezoid for the area, exact first moment.
  // Each side is summed outside-in so mirrored sets cancel exactly.
  std::vector<double> seg_area(nodes.size() - 1), seg_moment(nodes.size() - 1);
  double m0 = agg(nodes.front());
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    const double x0 = nodes[i];
    const double x1 = nodes[i + 1];
    const double m1 = agg(x1);
    const double h = x1 - x0;
    seg_area[i] = 0.5 * h * (m0 + m1);
    seg_moment[i] = h / 6.0 * (x0 * (2.0 * m0 + m1) + x1 * (m0 + 2.0 * m1));
    m0 = m1;
  }
  double area_neg = 0.0, moment_neg = 0.0, area_pos = 0.0, moment_pos = 0.0;
  std::size_t split = 0;
  while (split + 1 < nodes.size() && nodes[split + 1] <= 0.0) {
    area_neg += seg_area[split];
    moment_neg += seg_moment[split];
    ++split;
  }
  for (std::size_t i = seg_area.size(); i-- > split;) {
    area_pos += seg_area[i];
    moment_pos += seg_moment[i];
  }
  const double area = area_neg + area_pos;
  const double moment = moment_neg + moment_pos;
  if (area <= 0.0) return 0.0;
  return std::clamp(moment / area, -1.0, 1.0);
}

double Engine::evaluate(double e_norm, double de_norm) const {
  return defuzzify_coa(infer(fuzzify(e_norm, in_), fuzzify(de_norm, in_), rules_, out_));
}

}  // namespace hfc::fuzzy
