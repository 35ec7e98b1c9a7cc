#include <gtest/gtest.h>

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>

#include "kernelgauge/oracles.hpp"
#include "kernelgauge/weights.hpp"

using namespace kernelgauge;

TEST(CProfile, ExpDeltaTails) {
  for (double d : {-0.5, 0.0, 0.3, 0.6, 0.9}) {
    const auto p = CProfile::exp_delta(d);
    for (double t : {0.0, 0.5, 2.0}) EXPECT_NEAR(p.tail(t), oracle::exp_delta_tail(d, t), 1e-14 * p.tail(t));
    EXPECT_NEAR(p.total(), 1.0 / (1.0 - d), 1e-14);
    EXPECT_EQ(p.monotonicity_defect(), 0.0);
  }
  EXPECT_NEAR(CProfile::constant_one().total(), 1.0, 1e-15);
}

TEST(CProfile, PolyTotalAgainstIncompleteGamma) {
  // ∫₀^∞ (1 + t)^m e^{−t} dt = e·Γ(m + 1, 1)
  for (double m : {0.25, 0.5, 1.0}) {
    const auto p = CProfile::poly(m);
    const double ref = std::exp(1.0) * boost::math::tgamma(m + 1.0, 1.0);
    EXPECT_NEAR(p.total(), ref, 1e-10 * ref) << m;
    // tail at t: e^{1}Γ(m+1, 1+t)
    EXPECT_NEAR(p.tail(2.0), std::exp(1.0) * boost::math::tgamma(m + 1.0, 3.0), 1e-10);
  }
}

TEST(CProfile, RejectsInadmissible) {
  try {
    (void)CProfile::exp_delta(1.2);
    FAIL();
  } catch (const InvalidProfile& e) {
    EXPECT_NE(std::string(e.what()).find("c-profile not integrable"), std::string::npos);
  }
  EXPECT_THROW((void)CProfile::exp_delta(1.0), InvalidProfile);
  EXPECT_THROW((void)CProfile::poly(1.5), InvalidProfile);
  EXPECT_THROW((void)CProfile::poly(0.0), InvalidProfile);
}

TEST(WeightModel, DensitiesOnTheDisc) {
  WeightConfig c;
  c.profile = CProfile::exp_delta(0.3);
  c.phi.a_green = 0.4;
  const WeightModel m(c);
  for (cplx z : {cplx(0.3, 0.1), cplx(-0.5, 0.5)}) {
    // ψ = G = log|z|, φ = 0.4 log|z|: ρ = |z|^{−0.4}·|z|^{−0.6}
    EXPECT_NEAR(m.rho(z), std::pow(std::abs(z), -1.0), 1e-12);
  }
  const auto bq = boundary_quadrature(c.domain, 16);
  for (const auto& n : bq.nodes()) {
    EXPECT_NEAR(m.dpsi_dnu(n), 1.0, 1e-13);
    EXPECT_NEAR(m.lambda(n), 1.0, 1e-13);
  }
  EXPECT_NEAR(m.pole_exponent(), -1.0, 1e-15);
}

TEST(WeightModel, PoleValueIsContinuousLimit) {
  WeightConfig c;
  c.domain = DomainSpec::annulus(0.25);
  c.z0 = 0.5;
  c.phi.u = HarmonicFunctionRep::log_mode(-0.5);
  const WeightModel m(c);
  EXPECT_NEAR(m.rho(0.5), m.rho(0.5 + 1e-7), 1e-6);
  WeightConfig s = c;
  s.profile = CProfile::exp_delta(0.4);
  EXPECT_THROW((void)WeightModel(s).rho(0.5), EvaluationAtPole);
}

TEST(WeightModel, PerturbationVanishesOnBoundary) {
  for (const auto& d : {DomainSpec::disc(), DomainSpec::annulus(0.3)}) {
    const Perturbation p(d);
    const auto bq = boundary_quadrature(d, 16);
    for (const auto& n : bq.nodes()) EXPECT_NEAR(p(n.z), 0.0, 1e-14);
    EXPECT_LT(p(cplx(0.0, 0.6)), 0.0);
    // normal derivative by finite difference
    const auto& n = bq.nodes().back();
    const double h = 1e-6;
    EXPECT_NEAR(p.normal_derivative(n.z, n.normal), (p(n.z) - p(n.z - h * n.normal)) / h, 1e-5);
  }
}

TEST(ValidateConfig, FlagsLelongAndProfile) {
  WeightConfig c;
  EXPECT_TRUE(all_passed(validate_config(c)));
  c.k = 1;
  auto checks = validate_config(c);
  EXPECT_FALSE(all_passed(checks));
  bool lelong_failed = false;
  for (const auto& ch : checks)
    if (ch.name == "lelong") lelong_failed = !ch.passed;
  EXPECT_TRUE(lelong_failed);
  c.psi.p0 = 2.0;
  EXPECT_TRUE(all_passed(validate_config(c)));
}
