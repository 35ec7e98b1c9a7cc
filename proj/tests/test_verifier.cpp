#include <gtest/gtest.h>

#include <cmath>

#include "kernelgauge/oracles.hpp"
#include "kernelgauge/verifier.hpp"

using namespace kernelgauge;

TEST(Decide, VerdictTable) {
  struct Row {
    double ratio, err;
    bool expected;
    Verdict want;
  };
  const double tol = 1e-4;
  const Row rows[] = {
      {1.0, 1e-12, true, Verdict::pass},
      {1.0 + 5e-5, 1e-6, true, Verdict::pass},
      {1.0 + 1e-3, 1e-6, true, Verdict::fail},
      {1.0 + 1e-4, 1e-5, true, Verdict::inconclusive},
      {0.99, 1e-6, true, Verdict::fail},
      {0.99, 1e-6, false, Verdict::fail},
      {1.01, 1e-6, false, Verdict::pass},
      {1.0 + 5e-5, 1e-6, false, Verdict::inconclusive},
      {1.0 - 1e-7, 1e-6, false, Verdict::inconclusive},
  };
  for (const auto& r : rows) {
    std::string note;
    EXPECT_EQ(decide(r.ratio, r.err, r.expected, tol, &note), r.want) << r.ratio << " " << r.expected;
    EXPECT_FALSE(note.empty());
  }
}

TEST(Predicate, ConditionFlags) {
  WeightConfig c;
  auto p = equality_predicate(WeightModel(c));
  EXPECT_TRUE(p.expected);
  c.psi.epsilon = 0.1;
  p = equality_predicate(WeightModel(c));
  EXPECT_FALSE(p.flags.psi_shape);
  EXPECT_FALSE(p.expected);
  WeightConfig a;
  a.phi.a_green = 0.5;
  EXPECT_FALSE(equality_predicate(WeightModel(a)).flags.phi_shape);
  WeightConfig ann;
  ann.domain = DomainSpec::annulus(0.25);
  ann.z0 = 0.5;
  p = equality_predicate(WeightModel(ann));
  EXPECT_TRUE(p.flags.phi_shape && p.flags.psi_shape);
  EXPECT_FALSE(p.flags.character);
  EXPECT_NEAR(p.alpha_green, 0.5, 1e-9);
}

TEST(Verify, WeightedDiscFamily) {
  for (double d : {0.0, 0.3, 0.6}) {
    WeightConfig c;
    c.profile = CProfile::exp_delta(d);
    const auto r = verify(WeightModel(c));
    EXPECT_NEAR(r.I_c, 1.0 / (1.0 - d), 1e-14);
    EXPECT_NEAR(kPi * r.B.value, 1.0 - d, 1e-6);
    EXPECT_NEAR(r.ratio, 1.0, 1e-5);
    EXPECT_EQ(r.verdict, Verdict::pass);
  }
}

TEST(Verify, PolyProfileDiscEquality) {
  WeightConfig c;
  c.profile = CProfile::poly(0.5);
  const auto r = verify(WeightModel(c));
  EXPECT_NEAR(r.ratio, 1.0, 1e-4);
  EXPECT_TRUE(r.prediction.expected);
}

TEST(Verify, AnnulusFlatRatioMatchesOracles) {
  WeightConfig c;
  c.domain = DomainSpec::annulus(0.25);
  c.z0 = 0.5;
  const auto r = verify(WeightModel(c));
  // ρ = 1: B is the Laurent-series Bergman kernel
  EXPECT_NEAR(r.B.value, oracle::annulus_bergman(0.5, 0.25), 1e-9 * r.B.value);
  EXPECT_GT(r.ratio - 1.0, 10.0 * r.ratio_error);
  EXPECT_EQ(r.verdict, Verdict::pass);
}

TEST(Verify, HigherOrderRoutesAgree) {
  WeightConfig c;
  c.k = 2;
  c.psi.p0 = 3.0;
  const auto r = verify(WeightModel(c));
  EXPECT_TRUE(r.has_route);
  EXPECT_NEAR(r.K.value, r.K_reduced.value, 1e-8 * r.K.value);
  // ψ = 3G, λ = 1/3, k = 2: K = 2π/∮|z²|²/3 = 3; B = 3/π for ρ = |z|^0·e^0 = 1
  EXPECT_NEAR(r.K.value, 3.0, 1e-8);
  EXPECT_NEAR(kPi * r.B.value, 3.0, 1e-8);
}

TEST(Verify, RejectsInvalidConfig) {
  WeightConfig c;
  c.k = 1;
  EXPECT_THROW(verify(WeightModel(c)), InvalidConfig);
}

TEST(Suita, AnnulusAgainstOracles) {
  const auto s = verify_suita(DomainSpec::annulus(0.25), 0.5);
  const double cb = std::exp(oracle::annulus_robin(0.5, 0.25));
  EXPECT_NEAR(s.c_beta_sq, cb * cb, 1e-10);
  EXPECT_NEAR(s.pi_b, kPi * oracle::annulus_bergman(0.5, 0.25), 1e-8);
  EXPECT_GT(s.lower_margin, 0.0);
  EXPECT_GT(s.upper_margin, 0.0);
  EXPECT_EQ(s.verdict, Verdict::pass);
}

TEST(Hardy, BoundedAndGrowing) {
  const WeightModel disc{WeightConfig{}};
  EXPECT_FALSE(hardy_diagnostic([](cplx z) { return z * z; }, disc).increasing);
  EXPECT_TRUE(hardy_diagnostic([](cplx z) { return 1.0 / (1.0 - z); }, disc).increasing);
}

TEST(Superlevel, UnperturbedConstantIsOne) {
  EXPECT_NEAR(superlevel_constant(WeightModel(WeightConfig{})).C, 1.0, 1e-8);
}

TEST(Superlevel, PerturbedDiscApproachesOnePlusTwoEpsilon) {
  // ψ/G = 1 + ε(r² − 1)/log r, increasing in r towards 1 + 2ε
  WeightConfig c;
  c.psi.epsilon = 0.1;
  const double C = superlevel_constant(WeightModel(c)).C;
  EXPECT_LE(C, 1.2);
  EXPECT_GT(C, 1.19);
}
