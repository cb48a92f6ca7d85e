#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "buckdr/design/controller.hpp"
#include "buckdr/error.hpp"

using namespace buckdr;
using design::TypeIIIComponents;
using design::TypeIIIParams;

namespace {

const design::Design& nominal_design() {
  static const design::Design d = design::design_controller(buck::nominal_params(), lti::FrequencyGrid::standard());
  return d;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(TypeIII, ComponentFormulas) {
  TypeIIIComponents c{10e3, 1e3, 2e3, 1e-9, 2e-9, 0.5e-9};
  const TypeIIIParams p = design::type3_from_components(c);
  EXPECT_NEAR(p.wz0, 1e6, 1e-6);
  EXPECT_NEAR(p.Gc0, 1.0 / (10e3 * 2.5e-9), 1e-6);
  EXPECT_NEAR(p.wp0, 1.0 / (2e3 * 2e-9), 1e-6);
  EXPECT_NEAR(p.wp1, 1.5e-9 / (1e3 * 1e-9 * 0.5e-9), 1e-3);
  EXPECT_NEAR(p.wz1, 1.0 / (2e-9 * 12e3), 1e-6);
}

TEST(TypeIII, SmallC3Limit) {
  TypeIIIComponents c{10e3, 1e3, 2e3, 1e-9, 2e-9, 1e-18};
  const TypeIIIParams p = design::type3_from_components(c);
  EXPECT_GT(p.wp1, 1e14);
  EXPECT_NEAR(p.Gc0, 1.0 / (10e3 * 2e-9), 1e-6 * p.Gc0);
}

TEST(TypeIII, RoundTrip) {
  TypeIIIComponents c{10e3, 4.7e3, 1.2e3, 3.3e-9, 1.5e-9, 0.22e-9};
  const TypeIIIParams p = design::type3_from_components(c);
  const TypeIIIComponents back = design::components_from_params(p, c.R1);
  const TypeIIIParams again = design::type3_from_components(back);
  EXPECT_LT(rel(again.Gc0, p.Gc0), 1e-9);
  EXPECT_LT(rel(again.wz0, p.wz0), 1e-9);
  EXPECT_LT(rel(again.wz1, p.wz1), 1e-9);
  EXPECT_LT(rel(again.wp0, p.wp0), 1e-9);
  EXPECT_LT(rel(again.wp1, p.wp1), 1e-9);
  EXPECT_LT(rel(back.R3, c.R3), 1e-9);
  EXPECT_LT(rel(back.C3, c.C3), 1e-9);
}

TEST(TypeIII, TunedControllerIsRealizable) {
  const TypeIIIParams p = nominal_design().controller.as_type3();
  const TypeIIIComponents c = design::components_from_params(p, 10e3);
  for (double v : {c.R1, c.R2, c.R3, c.C1, c.C2, c.C3}) EXPECT_GT(v, 0.0);
  const TypeIIIParams again = design::type3_from_components(c);
  EXPECT_LT(rel(again.Gc0, p.Gc0), 1e-9);
  EXPECT_LT(rel(again.wp1, p.wp1), 1e-9);
}

TEST(TypeIII, NegativeR3IsUnrealizable) {
  // wz1 above wp0 needs a negative C2 and R3.
  TypeIIIParams p{1e4, 2e4, 4e5, 2e5, 1e6};
  try {
    design::components_from_params(p, 10e3);
    FAIL() << "expected Unrealizable";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::Unrealizable);
  }
}

TEST(TypeIII, TraditionalPlacementIsStable) {
  const buck::BuckParams p = buck::nominal_params();
  const auto plant = buck::build_plant(p);
  const TypeIIIParams t = design::traditional_type3(plant, p);
  EXPECT_DOUBLE_EQ(t.wz0, plant.omega_PS);
  EXPECT_DOUBLE_EQ(t.wp0, p.omega_sw() / 2.0);
  EXPECT_DOUBLE_EQ(t.wp1, std::min(plant.omega_ESR, p.omega_sw() / 2.0));
  EXPECT_TRUE(design::loop_stable(t.tf(), p.k_FF * plant.P11, 1.0));
}

TEST(Weights, AsymptotesAndCornerValues) {
  const double wsw = buck::nominal_params().omega_sw();
  const auto w = design::build_weights(wsw);
  EXPECT_NEAR(std::abs(w.W1.at_omega(1e12)), 0.4, 1e-6);
  EXPECT_NEAR(std::abs(w.W2.at_omega(w.omega_t)), 0.24, 1e-12);
  EXPECT_GT(std::abs(w.W1.at_omega(1e-3)), 1e6);
  EXPECT_EQ(w.W1.den().zero_root_multiplicity(), 1);
  EXPECT_DOUBLE_EQ(w.omega_s, 2.0 * wsw);
  EXPECT_DOUBLE_EQ(w.omega_t, wsw / 10.0);
}

TEST(Mask, BoundsFromScheduleOverPwmBound) {
  const buck::BuckParams p = buck::nominal_params();
  const double wsw = p.omega_sw();
  const auto mask = design::t_mask(0.1 * p.V_pk(), p.V_pk(), wsw);
  auto find = [&](int m, int n) {
    for (const auto& e : mask.entries)
      if (e.m == m && e.n == n) return e;
    ADD_FAILURE() << "missing entry " << m << "," << n;
    return design::MaskEntry{};
  };
  EXPECT_NEAR(find(1, 0).bound, 1.5708e-2, 1e-6);
  EXPECT_DOUBLE_EQ(find(1, 0).omega, wsw);
  EXPECT_NEAR(find(2, 0).bound, 1e-3 * std::numbers::pi, 1e-12);
  EXPECT_DOUBLE_EQ(find(2, 0).omega, 2.0 * wsw);
  EXPECT_NEAR(find(1, 1).bound, 1e-2, 1e-12);
  EXPECT_DOUBLE_EQ(find(1, 1).omega, 0.5 * wsw);
  for (const auto& e : mask.entries) {
    EXPECT_GT(e.bound, 0.0);
    EXPECT_GE(e.omega, 0.5 * wsw);
    EXPECT_DOUBLE_EQ(e.omega, (e.m - 0.5 * e.n) * wsw);
  }
}

TEST(Objective, ZeroControllerOrPlantIsInfinite) {
  const auto w = design::build_weights(buck::nominal_params().omega_sw());
  const auto grid = lti::FrequencyGrid::log_space(10.0, 1e9, 200);
  const auto plant = buck::build_plant(buck::nominal_params());
  const double inf = std::numeric_limits<double>::infinity();
  EXPECT_EQ(design::mixed_sensitivity_objective(lti::RationalTF::gain(0.0), plant.P11, 1.0, w, grid), inf);
  EXPECT_EQ(design::mixed_sensitivity_objective(nominal_design().controller.tf(), lti::RationalTF::gain(0.0), 1.0,
                                                w, grid),
            inf);
}

TEST(Objective, SensitivitiesSumToOne) {
  const buck::BuckParams p = buck::nominal_params();
  const auto plant = p.k_FF * buck::build_plant(p).P11;
  const auto K = nominal_design().controller.tf();
  double worst = 0.0;
  for (double w : lti::FrequencyGrid::standard().omegas()) {
    const auto lp = design::loop_at(K, plant, 1.0, w);
    worst = std::max(worst, std::abs(lp.S + lp.T - 1.0));
  }
  EXPECT_LT(worst, 1e-10);
}

TEST(Objective, SensitivityMatchesFeedbackConnection) {
  const buck::BuckParams p = buck::nominal_params();
  const auto plant = p.k_FF * buck::build_plant(p).P11;
  const auto K = nominal_design().controller.tf();
  const auto S = lti::feedback(lti::RationalTF::gain(1.0), K * plant);
  for (double w : lti::FrequencyGrid::log_space(10.0, 1e9, 100).omegas()) {
    const lti::cplx direct = 1.0 / (1.0 + K.at_omega(w) * plant.at_omega(w));
    EXPECT_LT(std::abs(S.at_omega(w) - direct), 1e-8 * std::abs(direct));
  }
}

TEST(Tuning, StructureAndMasks) {
  const buck::BuckParams p = buck::nominal_params();
  const auto& d = nominal_design();
  const auto& k = d.controller;
  const auto plant = buck::build_plant(p);
  EXPECT_DOUBLE_EQ(k.omega_PS, plant.omega_PS);
  EXPECT_DOUBLE_EQ(k.p1, 0.5 * p.omega_sw());
  EXPECT_DOUBLE_EQ(k.p2, p.omega_sw());
  EXPECT_FALSE(k.at_ceiling);

  const auto pz = k.tf().poles_zeros();
  ASSERT_EQ(pz.poles.size(), 3u);
  ASSERT_EQ(pz.zeros.size(), 2u);
  for (const auto& z : pz.zeros) EXPECT_NEAR(z.real(), -plant.omega_PS, 1e-3 * plant.omega_PS);
  EXPECT_EQ(k.tf().den().zero_root_multiplicity(), 1);

  const auto vc_to_vo = p.k_FF * plant.P11;
  for (const auto& mc : design::check_mask(k.tf(), vc_to_vo, 1.0, d.mask)) EXPECT_GT(mc.margin, 0.0);
  EXPECT_LE(std::abs(design::loop_at(k.tf(), vc_to_vo, 1.0, p.omega_sw()).T), 1.5708e-2);
  EXPECT_TRUE(design::loop_stable(k.tf(), vc_to_vo, 1.0));
  EXPECT_GT(k.gamma, 1.0);
  EXPECT_TRUE(std::isfinite(k.gamma));
}

TEST(Tuning, GainIsLargestFeasibleWithinTolerance) {
  const buck::BuckParams p = buck::nominal_params();
  const auto& d = nominal_design();
  const auto vc_to_vo = p.k_FF * buck::build_plant(p).P11;
  design::StructuredController bigger = d.controller;
  bigger.G *= 1.02;
  bool violated = !design::loop_stable(bigger.tf(), vc_to_vo, 1.0);
  for (const auto& mc : design::check_mask(bigger.tf(), vc_to_vo, 1.0, d.mask)) violated |= mc.margin <= 0.0;
  EXPECT_TRUE(violated);
}

TEST(Tuning, HalvingGainKeepsHighFrequencyMasks) {
  const buck::BuckParams p = buck::nominal_params();
  const auto& d = nominal_design();
  const auto vc_to_vo = p.k_FF * buck::build_plant(p).P11;
  design::StructuredController k = d.controller;
  for (int step = 0; step < 10; ++step) {
    k.G *= 0.5;
    for (const auto& mc : design::check_mask(k.tf(), vc_to_vo, 1.0, d.mask)) EXPECT_GT(mc.margin, 0.0);
  }
}

TEST(Tuning, UnboundedMaskStaysStable) {
  const buck::BuckParams p = buck::nominal_params();
  const auto plant = buck::build_plant(p);
  design::TMask open = nominal_design().mask;
  for (auto& e : open.entries) e.bound = std::numeric_limits<double>::infinity();
  const auto grid = lti::FrequencyGrid::log_space(10.0, 1e9, 400);
  const auto k = design::tune_structured(plant, p.k_FF, p.omega_sw(), design::build_weights(p.omega_sw()), open, grid);
  EXPECT_GT(k.G, 10.0 * nominal_design().controller.G);
  EXPECT_TRUE(design::loop_stable(k.tf(), p.k_FF * plant.P11, 1.0));
}

TEST(Tuning, InfeasibleMaskThrows) {
  const buck::BuckParams p = buck::nominal_params();
  design::TMask tight = nominal_design().mask;
  for (auto& e : tight.entries) e.bound = 1e-30;
  try {
    design::tune_structured(buck::build_plant(p), p.k_FF, p.omega_sw(), design::build_weights(p.omega_sw()), tight,
                            lti::FrequencyGrid::log_space(10.0, 1e9, 100));
    FAIL() << "expected Infeasible";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::Infeasible);
  }
}
