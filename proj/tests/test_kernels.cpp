#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "kernelgauge/kernels.hpp"
#include "kernelgauge/oracles.hpp"

using namespace kernelgauge;

namespace {

KernelProblem flat(const DomainSpec& d, cplx z0) {
  KernelProblem p;
  p.domain = d;
  p.z0 = z0;
  p.log_rho = [](cplx) { return 0.0; };
  p.log_lambda = [](const BoundaryNode&) { return 0.0; };
  return p;
}

WeightModel annulus_default(double q = 0.25, cplx z0 = 0.5) {
  WeightConfig c;
  c.domain = DomainSpec::annulus(q);
  c.z0 = z0;
  return WeightModel(c);
}

// d/dx log P(x) for the prime function of the annulus.
cplx prime_log_derivative(cplx x, double q) {
  cplx s = -1.0 / (1.0 - x);
  double qk = 1.0;
  for (int k = 1; k < 80; ++k) {
    qk *= q * q;
    if (qk < 1e-300) break;
    s += -qk / (1.0 - qk * x) + (qk / (x * x)) / (1.0 - qk / x);
  }
  return s;
}

// ∂G/∂ν at ζ from the image product, differentiated in closed form.
double image_poisson(cplx zeta, cplx normal, cplx a, double q) {
  const double outer = oracle::image_raw(1.0, a, q);
  const double inner = oracle::image_raw(q, a, q);
  const cplx dlog = prime_log_derivative(zeta / a, q) / a - std::conj(a) * prime_log_derivative(zeta * std::conj(a), q);
  // ∂_ν log|f| = Re(f′/f · ν)
  const double r = std::abs(zeta);
  const double radial = (normal * std::conj(zeta) / r).real();
  return (dlog * normal).real() - (inner - outer) / std::log(q) * radial / r;
}

// Szegő kernel for λ = (∂G/∂ν)^{-1}: Laurent basis qⁿ-scaled, trapezoid Gram.
double szego_hat_oracle(double q, cplx a, int n_max, int nodes) {
  const int dim = 2 * n_max + 1;
  CMatrix H = CMatrix::Zero(dim, dim);
  CVector e(dim);
  auto scale = [q](int n) { return n < 0 ? std::pow(q, -n) : 1.0; };
  for (int c = 0; c < 2; ++c) {
    const double radius = c == 0 ? 1.0 : q;
    for (int j = 0; j < nodes; ++j) {
      const cplx dir = std::polar(1.0, kTwoPi * j / nodes);
      const cplx z = radius * dir;
      const cplx nu = c == 0 ? dir : -dir;
      const double w = kTwoPi * radius / nodes / image_poisson(z, nu, a, q);
      CVector v(dim);
      for (int i = 0; i < dim; ++i) v(i) = scale(i - n_max) * std::pow(z, i - n_max);
      H += w * v.conjugate() * v.transpose();
    }
  }
  for (int i = 0; i < dim; ++i) e(i) = scale(i - n_max) * std::pow(a, i - n_max);
  const CVector y = H.ldlt().solve(CVector(e.conjugate()));
  return kTwoPi * (e.transpose() * y)(0, 0).real();
}

}  // namespace

TEST(Oracle, ImagePoissonIntegratesToTwoPi) {
  double s = 0.0;
  for (int c = 0; c < 2; ++c) {
    const double radius = c == 0 ? 1.0 : 0.25;
    for (int j = 0; j < 256; ++j) {
      const cplx dir = std::polar(1.0, kTwoPi * j / 256);
      s += kTwoPi * radius / 256 * image_poisson(radius * dir, c == 0 ? dir : -dir, 0.5, 0.25);
    }
  }
  EXPECT_NEAR(s, kTwoPi, 1e-10);
}

TEST(Basis, LaurentValuesAndConstraints) {
  const BasisDescriptor b(DomainSpec::annulus(0.5), 3, 0.7, 0);
  EXPECT_EQ(b.size(), 7);
  const CVector v = b.values(cplx(0.6, 0.2));
  for (int i = 0; i < b.size(); ++i) {
    const int n = b.exponent(i);
    EXPECT_LT(std::abs(v(i) - b.scale(n) * std::pow(cplx(0.6, 0.2), n)), 1e-14);
  }
  const auto c = b.constraints();
  EXPECT_EQ(c.rows.rows(), 1);
  EXPECT_LT(std::abs((c.rows * CVector::Unit(7, b.index_of(2)))(0) - 0.49), 1e-14);
}

TEST(Gram, HermitianPositiveDefinite) {
  const auto m = annulus_default();
  const auto p = make_problem(m);
  const BasisDescriptor b(p.domain, 12, p.z0, 0);
  const auto area = gram(b, area_quadrature(p.domain, p.z0), p.log_rho);
  const auto bdry = gram(b, boundary_quadrature(p.domain, 128), p.log_lambda);
  for (const auto* H : {&area, &bdry}) {
    const CMatrix& e = H->entries();
    EXPECT_LT((e - e.adjoint()).norm(), 1e-14 * e.norm());
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(e);
    EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0);
  }
}

TEST(Gram, DiscMonomialsOrthogonal) {
  const BasisDescriptor b(DomainSpec::disc(), 6, 0.0, 0);
  const auto H = gram(b, area_quadrature(DomainSpec::disc(), 0.0), [](cplx) { return 0.0; });
  for (int i = 0; i <= 6; ++i)
    for (int j = 0; j <= 6; ++j) EXPECT_NEAR(std::abs(H(i, j)), i == j ? kPi / (i + 1) : 0.0, 1e-9);
}

TEST(Kernels, DiscClosedFormsOffCenter) {
  for (cplx z0 : {cplx(0.3), cplx(0.2, -0.4)}) {
    const double d = 1.0 - std::norm(z0);
    EXPECT_NEAR(kernel_diag(flat(DomainSpec::disc(), z0), KernelSide::bergman).value, 1.0 / (kPi * d * d), 1e-9);
    EXPECT_NEAR(kernel_diag(flat(DomainSpec::disc(), z0), KernelSide::szego).value, 1.0 / d, 1e-10);
  }
}

TEST(Kernels, AnnulusFlatAgainstLaurentSeries) {
  const auto d = DomainSpec::annulus(0.25);
  for (cplx z0 : {cplx(0.5), cplx(0.0, 0.4), cplx(-0.7, 0.1)}) {
    const double b = kernel_diag(flat(d, z0), KernelSide::bergman).value;
    const double k = kernel_diag(flat(d, z0), KernelSide::szego).value;
    EXPECT_NEAR(b, oracle::annulus_bergman(z0, 0.25), 1e-9 * b) << z0;
    EXPECT_NEAR(k, oracle::annulus_szego_flat(z0, 0.25), 1e-9 * k) << z0;
  }
}

TEST(Kernels, AnnulusSzegoHatAgainstImageSeries) {
  for (double q : {0.25, 0.4}) {
    const auto m = annulus_default(q, 0.55);
    const double lib = kernel_diag(m, KernelSide::szego).value;
    const double ref = szego_hat_oracle(q, 0.55, 80, 2048);
    EXPECT_NEAR(lib, ref, 1e-9 * ref) << q;
  }
}

TEST(Kernels, BasisGrowthIsMonotone) {
  for (const auto& m : {annulus_default(), WeightModel(WeightConfig{})}) {
    for (auto side : {KernelSide::bergman, KernelSide::szego}) {
      KernelSettings s;
      s.schedule = {2, 4, 8, 16, 32};
      const auto v = kernel_diag(m, side, s);
      for (std::size_t i = 1; i < v.history.size(); ++i)
        EXPECT_GE(v.history[i], v.history[i - 1] * (1.0 - 1e-13)) << to_string(side);
    }
  }
}

TEST(Kernels, ReproducingResiduals) {
  const auto d = DomainSpec::annulus(0.25);
  for (auto side : {KernelSide::bergman, KernelSide::szego}) {
    for (int n : {-3, 0, 2, 5}) EXPECT_LT(reproducing_residual(flat(d, 0.5), side, n), 1e-6) << n;
    EXPECT_LT(reproducing_residual(flat(DomainSpec::disc(), 0.3), side, 4), 1e-6);
  }
}

TEST(KernelSpace, TwoPointDiscBergman) {
  const KernelSpace ks(flat(DomainSpec::disc(), 0.0), KernelSide::bergman);
  const cplx z(0.3, 0.2);
  const cplx w(-0.1, 0.4);
  const cplx want = 1.0 / (kPi * std::pow(1.0 - z * std::conj(w), 2));
  EXPECT_LT(std::abs(ks(z, w) - want), 1e-8);
  EXPECT_LT(std::abs(ks(w, z) - std::conj(ks(z, w))), 1e-12);
}

TEST(Kernels, HigherOrderDiscMonomial) {
  // ρ = 1, k = 1 at 0: sup |f′(0)|² over ‖f‖ <= 1 is 2/π
  KernelProblem p = flat(DomainSpec::disc(), 0.0);
  p.k = 1;
  EXPECT_NEAR(kernel_diag(p, KernelSide::bergman).value, 2.0 / kPi, 1e-10);
  EXPECT_NEAR(kernel_diag(p, KernelSide::szego).value, 1.0, 1e-10);
}
