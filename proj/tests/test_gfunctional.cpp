#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "kernelgauge/gfunctional.hpp"
#include "kernelgauge/oracles.hpp"

using namespace kernelgauge;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

WeightConfig annulus_matched() {
  WeightConfig c;
  c.domain = DomainSpec::annulus(0.25);
  c.z0 = 0.5;
  c.phi.u = HarmonicFunctionRep::log_mode(-0.5);
  return c;
}

double area(const AreaQuadrature& q) { return q.integrate([](cplx) { return 1.0; }); }

}  // namespace

TEST(Sublevel, ConformalDiscIsPseudoHyperbolicDisc) {
  // {2G < hi} is |z − a|/|1 − āz| < r, a Euclidean disc of radius r(1 − |a|²)/(1 − r²|a|²)
  for (cplx a : {cplx(0.0), cplx(0.3), cplx(-0.2, 0.5)}) {
    WeightConfig c;
    c.z0 = a;
    const WeightModel m(c);
    for (double t : {0.5, 1.5}) {
      const double r = std::exp(-t / 2.0);
      const double R = r * (1.0 - std::norm(a)) / (1.0 - r * r * std::norm(a));
      const auto reg = detail::conformal_region(m, kNegInf, -t, AreaResolution{});
      ASSERT_TRUE(reg.has_value());
      EXPECT_NEAR(area(reg->quad), kPi * R * R, 1e-10) << a << " t=" << t;
      // ∫ |z − a|² over the region against the disc's centre c = a(1 − r²)/(1 − r²|a|²)
      const cplx centre = a * (1.0 - r * r) / (1.0 - r * r * std::norm(a));
      const double second = kPi * R * R * (R * R / 2.0 + std::norm(centre - a));
      EXPECT_NEAR(reg->quad.integrate([a](cplx z) { return std::norm(z - a); }), second, 1e-10);
    }
  }
}

TEST(Sublevel, ConformalAgainstRayBisection) {
  // {G < ℓ} is star-shaped about z0 here; area = ½∮R(θ)²dθ with R found by
  // bisection on the image-series Green function
  auto ray_area = [](double level_lo, double level_hi) {
    auto radius = [](double theta, double level) {
      const cplx dir = std::polar(1.0, theta);
      double a = 1e-3, b = 1e-3;
      while (oracle::annulus_green(0.5 + b * dir, 0.5, 0.25) < level) {
        a = b;
        b *= 1.1;
      }
      for (int k = 0; k < 60; ++k) {
        const double m = 0.5 * (a + b);
        (oracle::annulus_green(0.5 + m * dir, 0.5, 0.25) < level ? a : b) = m;
      }
      return a;
    };
    const int n = 400;
    double s = 0.0;
    for (int j = 0; j < n; ++j) {
      const double th = kTwoPi * (j + 0.5) / n;
      const double ro = radius(th, level_hi);
      const double ri = std::isfinite(level_lo) ? radius(th, level_lo) : 0.0;
      s += 0.5 * (ro * ro - ri * ri) * kTwoPi / n;
    }
    return s;
  };
  const WeightModel m(annulus_matched());
  AreaResolution res;
  for (double t : {0.5, 1.0}) {
    const auto reg = detail::conformal_region(m, kNegInf, -t, res);
    ASSERT_TRUE(reg.has_value());
    EXPECT_NEAR(area(reg->quad), ray_area(kNegInf, -t / 2.0), 1e-9) << t;
    const auto shell = detail::conformal_region(m, -2.0 * t, -t, res);
    ASSERT_TRUE(shell.has_value());
    EXPECT_NEAR(area(shell->quad), ray_area(-t, -t / 2.0), 1e-9) << t;
  }
  // at or above the critical level the coordinate does not apply
  EXPECT_FALSE(detail::conformal_region(m, kNegInf, 0.0, res).has_value());
}

TEST(Sublevel, CriticalValueOfAnnulusGreen) {
  const auto g = green(DomainSpec::annulus(0.25), 0.5);
  const double crit = detail::green_critical_value(g);
  // saddle on the ray through −z0: the minimum of G along that ray
  double best = 1e300;
  for (int i = 1; i < 20000; ++i) {
    const double r = 0.25 + 0.75 * i / 20000.0;
    best = std::min(best, oracle::annulus_green(-r, 0.5, 0.25));
  }
  EXPECT_NEAR(crit, best, 1e-8);
  EXPECT_EQ(detail::green_critical_value(green(DomainSpec::disc(), 0.3)), 0.0);
}

TEST(GFunctional, DiscEqualityCurveIsExponential) {
  for (cplx a : {cplx(0.0), cplx(0.3)}) {
    WeightConfig c;
    c.z0 = a;
    const WeightModel m(c);
    const double g0 = kPi * std::pow(1.0 - std::norm(a), 2);
    for (double t : {0.0, 0.4, 1.0, 1.5}) EXPECT_NEAR(g_of_t(m, t), g0 * std::exp(-t), 1e-8) << a << " t=" << t;
  }
}

TEST(GFunctional, WeightedDiscCurve) {
  // ρ = |z|^{-2δ}, G(t) = π(1 − δ)^{-1}e^{−(1−δ)t}
  WeightConfig c;
  c.profile = CProfile::exp_delta(0.3);
  const WeightModel m(c);
  for (double t : {0.0, 1.0}) EXPECT_NEAR(g_of_t(m, t), kPi / 0.7 * std::exp(-0.7 * t), 1e-6 * kPi) << t;
}

TEST(GFunctional, MatchedAnnulusCurveLinearAndConcave) {
  const WeightModel m(annulus_matched());
  const auto curve = g_curve(m, {0.0, 0.5, 1.0, 1.5});
  EXPECT_LT(curve.linear_residual, 1e-8 * curve.g[0]);
  EXPECT_LE(curve.monotonicity_defect, 0.0);
  EXPECT_LT(curve.concavity_defect, 1e-10);
}

TEST(GFunctional, MismatchedAnnulusCurveIsConcaveAndDecreasing) {
  WeightConfig c = annulus_matched();
  c.phi.u = HarmonicFunctionRep::log_mode(-0.25);
  const auto curve = g_curve(WeightModel(c), {0.0, 0.5, 1.0, 1.5});
  EXPECT_LE(curve.monotonicity_defect, 0.0);
  EXPECT_LT(curve.concavity_defect, 1e-10);
  EXPECT_GT(curve.linear_residual, 1e-7 * curve.g[0]);
}

TEST(GFunctional, CoordinateTaylorOnDisc) {
  // Φ(z) = (z − a)/(1 − āz) = (z − a)·Σ āⁿ(z − a)ⁿ/(1 − |a|²)^{n+1}
  WeightConfig c;
  c.z0 = 0.4;
  const auto t = detail::coordinate_taylor(WeightModel(c), 6);
  EXPECT_LT(std::abs(t[0]), 1e-14);
  for (int j = 1; j <= 6; ++j) {
    const double want = std::pow(0.4, j - 1) / std::pow(0.84, j);
    EXPECT_NEAR(std::abs(t[j] - want), 0.0, 1e-11 * want) << j;
  }
}

TEST(ExtremalFunction, DiscIsBergmanSection) {
  WeightConfig c;
  c.z0 = cplx(0.2, 0.1);
  const auto f = f0_construct(WeightModel(c));
  EXPECT_LT(std::abs(f(c.z0) - 1.0), 1e-12);
  for (cplx z : {cplx(0.5, 0.0), cplx(-0.3, 0.6)}) {
    EXPECT_LT(std::abs(f(z) - oracle::disc_bergman_section(z, c.z0) /
                                 oracle::disc_bergman_section(c.z0, c.z0)),
              1e-10);
  }
  EXPECT_LT(f.monodromy_defect, 1e-12);
}

TEST(ExtremalFunction, AnnulusMonodromyDefect) {
  EXPECT_LT(f0_construct(WeightModel(annulus_matched())).monodromy_defect, 1e-8);
  WeightConfig c = annulus_matched();
  c.phi.u = HarmonicFunctionRep::log_mode(-0.25);
  EXPECT_GT(f0_construct(WeightModel(c)).monodromy_defect, 1e-3);
}

TEST(ShellIdentity, DiscAndAnnulus) {
  const WeightModel disc{WeightConfig{}};
  const auto f = f0_construct(disc);
  const auto s = shell_identity_check(disc, f, [](double t) { return 1.0 + t; }, 2.0, 0.5);
  // ∫_{0.5}^{2} (1 + t)e^{−t} dt = (t + 2)e^{−t} difference
  EXPECT_NEAR(s.rhs, kPi * (2.5 * std::exp(-0.5) - 4.0 * std::exp(-2.0)), 1e-10);
  EXPECT_LT(s.relative_gap, 2e-3);
  EXPECT_THROW(shell_identity_check(disc, f, [](double) { return 1.0; }, 0.5, 1.0), std::invalid_argument);
}

TEST(BoundaryLimit, MonomialShellRatios) {
  // F = z on the disc: the shell is √r < |z| < 1, ∫|z|²dA/(1 − r) = π(1 + r)/2 → π
  const WeightModel disc{WeightConfig{}};
  const auto b = boundary_limit_check(disc, [](cplx z) { return z; });
  for (std::size_t i = 0; i < b.radii.size(); ++i) {
    const double r = b.radii[i];
    EXPECT_NEAR(b.shell_ratio[i], kPi * (1.0 + r) / 2.0, 1e-9);
  }
  EXPECT_NEAR(b.boundary_value, kPi, 1e-10);
}
