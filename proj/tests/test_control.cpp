#include <gtest/gtest.h>

#include <random>

#include "hfc/control.hpp"
#include "hfc/fuzzy.hpp"
#include "oracles.hpp"

using namespace hfc;
using namespace hfc::control;

TEST(ErrorStep, Examples) {
  ControllerState s;
  s.initialized = true;
  s.e_prev = 0.0;
  auto r = error_step(30.0, 30.0, s);
  EXPECT_EQ(r.e, 0.0);
  EXPECT_EQ(r.de, 0.0);

  s.e_prev = 3.0;
  r = error_step(30.0, 25.0, s);
  EXPECT_EQ(r.e, 5.0);
  EXPECT_EQ(r.de, 2.0);
  EXPECT_EQ(s.e_prev, 5.0);

  ControllerState fresh;
  r = error_step(10.0, 0.0, fresh);
  EXPECT_EQ(r.e, 10.0);
  EXPECT_EQ(r.de, 0.0);
  EXPECT_TRUE(fresh.initialized);
}

TEST(PiStep, Examples) {
  EXPECT_EQ(pi_step({1e-4, 5e-5}, 0.0, 0.0, 1.0), 0.0);
  EXPECT_NEAR(pi_step({1e-4, 5e-5}, 2.0, 1.0, 1.0), 2e-4, 1e-18);
  EXPECT_EQ(pi_step({0.0, 1e-2}, 100.0, 0.0, 1e-3), 1e-3);
  EXPECT_EQ(pi_step({0.0, 1e-2}, -100.0, 0.0, 1e-3), -1e-3);
}

TEST(FuzzyPiStep, Examples) {
  const fuzzy::Engine eng;
  EXPECT_NEAR(fuzzy_pi_step({1.0, 1.0, 1e-3}, 0.0, 0.0, eng), 0.0, 1e-12);
  std::array<double, 7> pl{};
  pl[6] = 1.0;
  const double centroid = oracle::coa_riemann(pl, 1'000'000);
  EXPECT_NEAR(fuzzy_pi_step({1.0, 1.0, 1e-3}, 5.0, 2.0, eng), 1e-3 * centroid, 1e-9);
}

TEST(FuzzyPiStep, BoundAntisymmetryAndSign) {
  const fuzzy::Engine eng;
  const FuzzyPIGains g{0.3, 0.2, 2e-3};
  for (int i = -50; i <= 50; ++i) {
    for (int j = -50; j <= 50; ++j) {
      const double e = i * 0.2;
      const double de = j * 0.2;
      const double du = fuzzy_pi_step(g, e, de, eng);
      EXPECT_LE(std::abs(du), g.kx);
      EXPECT_NEAR(fuzzy_pi_step(g, -e, -de, eng), -du, 1e-12);
      if (e > 0 && de >= 0 && g.ki * e >= 1.0 / 3.0) {
        EXPECT_GE(du, 0.0);
      }
    }
  }
}

TEST(Selection, Examples) {
  const PerAxis<double> du{1.0, 2.0};
  EXPECT_EQ(apply_selection(kSelectAll, du), du);
  EXPECT_EQ(apply_selection({false, true}, du), (PerAxis<double>{0.0, 2.0}));
  EXPECT_EQ(apply_selection({false, false}, du), (PerAxis<double>{0.0, 0.0}));
  for (SelectionMatrix s : {SelectionMatrix{true, true}, SelectionMatrix{true, false},
                            SelectionMatrix{false, true}, SelectionMatrix{false, false}}) {
    EXPECT_EQ(apply_selection(s, apply_selection(s, du)), apply_selection(s, du));
  }
}

TEST(Accumulate, Examples) {
  ControllerState s;
  EXPECT_EQ(accumulate(s, 0.0, -1.0, 1.0), 0.0);
  s.u_accum = 1e-3;
  EXPECT_NEAR(accumulate(s, 5e-4, -1.0, 1.0), 1.5e-3, 1e-18);
  s.u_accum = 9.9e-3;
  EXPECT_EQ(accumulate(s, 5e-4, -1e-2, 1e-2), 1e-2);
  EXPECT_EQ(s.u_accum, 1e-2);
}

TEST(IncrementalPi, MatchesClosedFormWithoutClamping) {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> n(0.0, 10.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> e(1000);
    for (auto& v : e) v = n(rng);
    const double kp = 1e-4 * (trial + 1);
    const double ki = 3e-5 * (trial + 1);
    const double u0 = 1e-3 * trial;
    const auto want = oracle::pi_closed_form(e, kp, ki, u0);
    ControllerState s;
    s.u_accum = u0;
    for (std::size_t k = 0; k < e.size(); ++k) {
      const auto err = error_step(e[k], 0.0, s);
      const double u = accumulate(s, pi_step({kp, ki}, err.e, err.de, 1e300), -1e300, 1e300);
      ASSERT_NEAR(u, want[k], 1e-12) << "k=" << k;
    }
  }
}

TEST(AxisController, KindsAndClamp) {
  const fuzzy::Engine eng;
  const AxisController pi({1.0, 1.0});
  const AxisController fz({1.0, 1.0, 1.0}, eng);
  EXPECT_EQ(pi.kind(), ControllerKind::PI);
  EXPECT_EQ(fz.kind(), ControllerKind::FuzzyPI);
  EXPECT_EQ(pi.increment({100.0, 0.0}), Limits{}.du_max);
  EXPECT_EQ(fz.increment({-100.0, -100.0}), -Limits{}.du_max);
}

TEST(HybridStep, DeselectedAxesKeepCorrection) {
  const AxisController c({1e-4, 1e-4});
  PerAxis<ControllerState> st;
  st.x.u_accum = 2e-3;
  st.z.u_accum = -1e-3;
  const auto out = hybrid_step({5.0, 5.0}, {0.0, 0.0}, {&c, &c}, {false, false}, st);
  EXPECT_EQ(out.u.x, 2e-3);
  EXPECT_EQ(out.u.z, -1e-3);
  EXPECT_EQ(out.du.x, 0.0);
  EXPECT_EQ(out.e.z, 5.0);
}

TEST(HybridStep, ZeroErrorLeavesUUnchanged) {
  const AxisController c({1e-4, 1e-4});
  PerAxis<ControllerState> st;
  st.z.u_accum = 3e-3;
  const auto out = hybrid_step({6.0, 30.0}, {6.0, 30.0}, {&c, &c}, kSelectAll, st);
  EXPECT_EQ(out.u.x, 0.0);
  EXPECT_EQ(out.u.z, 3e-3);
}

TEST(HybridStep, ConstantErrorUnrollsToClosedForm) {
  const double kp = 2e-5, ki = 1e-5, e = 4.0, u0 = 1e-3;
  const AxisController c({kp, ki});
  PerAxis<ControllerState> st;
  // e_prev = 0 so the first step sees de = e.
  st.z.initialized = true;
  st.z.u_accum = u0;
  st.x.initialized = true;
  double u = 0.0;
  const int k_steps = 25;
  for (int k = 0; k < k_steps; ++k) u = hybrid_step({0.0, e}, {0.0, 0.0}, {&c, &c}, kSelectAll, st).u.z;
  EXPECT_NEAR(u, u0 + kp * e + k_steps * ki * e, 1e-15);
}
