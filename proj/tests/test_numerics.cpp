#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "kernelgauge/numerics.hpp"

using namespace kernelgauge;

namespace {

CMatrix random_pd(int n, std::mt19937& rng) {
  std::normal_distribution<double> nd;
  CMatrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = cplx(nd(rng), nd(rng));
  return a.adjoint() * a + 0.5 * CMatrix::Identity(n, n);
}

// Lagrange system [M Aᴴ; A 0][x; μ] = [0; b] solved densely.
CVector kkt_solution(const CMatrix& M, const ConstraintSystem& c) {
  const Eigen::Index n = M.rows();
  const Eigen::Index m = c.rows.rows();
  CMatrix k = CMatrix::Zero(n + m, n + m);
  k.topLeftCorner(n, n) = M;
  k.topRightCorner(n, m) = c.rows.adjoint();
  k.bottomLeftCorner(m, n) = c.rows;
  CVector rhs = CVector::Zero(n + m);
  rhs.tail(m) = c.target;
  return k.fullPivLu().solve(rhs).head(n);
}

}  // namespace

class ConstrainedMinBrute : public ::testing::TestWithParam<int> {};

TEST_P(ConstrainedMinBrute, MatchesKktAndRandomFeasiblePoints) {
  const int n = GetParam();
  std::mt19937 rng(1234 + n);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 5; ++trial) {
    const CMatrix M = random_pd(n, rng);
    for (int m = 1; m < n; ++m) {
      ConstraintSystem c{CMatrix(m, n), CVector(m)};
      for (int i = 0; i < m; ++i) {
        c.target(i) = cplx(nd(rng), nd(rng));
        for (int j = 0; j < n; ++j) c.rows(i, j) = cplx(nd(rng), nd(rng));
      }
      const auto r = constrained_min(HermitianMatrix(M), c);
      const CVector x = kkt_solution(M, c);
      const double ref = (x.adjoint() * M * x)(0, 0).real();
      EXPECT_NEAR(r.value, ref, 1e-10 * std::abs(ref));
      EXPECT_LT((r.minimizer - x).norm(), 1e-9 * (1.0 + x.norm()));
      EXPECT_LT((c.rows * r.minimizer - c.target).norm(), 1e-10);

      // null-space perturbations never lower the value
      Eigen::FullPivLU<CMatrix> lu(c.rows);
      const CMatrix ker = lu.kernel();
      for (int s = 0; s < 200; ++s) {
        CVector y(ker.cols());
        for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = cplx(nd(rng), nd(rng));
        const CVector p = r.minimizer + ker * y;
        EXPECT_GE((p.adjoint() * M * p)(0, 0).real(), r.value - 1e-10 * r.value);
      }
    }
    // dimension 2 also with the full constraint count
    if (n == 2) {
      ConstraintSystem c{CMatrix::Identity(2, 2), CVector(2)};
      c.target << cplx(1.0, 0.5), cplx(-0.3, 0.0);
      const auto r = constrained_min(HermitianMatrix(M), c);
      EXPECT_NEAR(r.value, (c.target.adjoint() * M * c.target)(0, 0).real(), 1e-12);
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Dims, ConstrainedMinBrute, ::testing::Values(2, 3));

TEST(ConstrainedMin, SampledFormAgreesWithGramForm) {
  std::mt19937 rng(7);
  std::normal_distribution<double> nd;
  CMatrix A(12, 4);
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < 4; ++j) A(i, j) = cplx(nd(rng), nd(rng));
  ConstraintSystem c{CMatrix::Zero(1, 4), CVector::Ones(1)};
  c.rows(0, 0) = 1.0;
  c.rows(0, 2) = cplx(0.0, 2.0);
  const auto a = constrained_min(HermitianMatrix(CMatrix(A.adjoint() * A)), c);
  const auto b = constrained_min_sampled(A, c);
  EXPECT_NEAR(a.value, b.value, 1e-11 * a.value);
}

TEST(ConstrainedMin, RejectsDependentConstraints) {
  CMatrix m = CMatrix::Identity(3, 3);
  ConstraintSystem c{CMatrix::Zero(2, 3), CVector::Ones(2)};
  c.rows(0, 0) = 1.0;
  c.rows(1, 0) = 2.0;
  EXPECT_THROW(constrained_min(HermitianMatrix(m), c), InconsistentConstraints);
}

TEST(ConstrainedMin, RejectsIndefiniteGram) {
  CMatrix m = CMatrix::Identity(2, 2);
  m(1, 1) = -1.0;
  ConstraintSystem c{CMatrix::Ones(1, 2), CVector::Ones(1)};
  EXPECT_THROW(constrained_min(HermitianMatrix(m), c), SingularGram);
}

TEST(HermitianMatrix, QuadraticFormIsReal) {
  std::mt19937 rng(3);
  const CMatrix M = random_pd(4, rng);
  CVector x(4);
  x << cplx(1, 2), cplx(0, -1), cplx(0.5, 0), cplx(-2, 1);
  const HermitianMatrix H(M);
  EXPECT_NEAR(H.quadratic_form(x), (x.adjoint() * M * x)(0, 0).real(), 1e-12);
  EXPECT_LT((H.entries() - H.entries().adjoint()).norm(), 1e-14);
}

TEST(GaussLegendre, ExactForPolynomials) {
  for (int n : {2, 5, 8, 16}) {
    const GaussRule& g = gauss_legendre(n);
    for (int d = 0; d < 2 * n; ++d) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += g.weights[i] * std::pow(g.nodes[i], d);
      EXPECT_NEAR(s, d % 2 ? 0.0 : 2.0 / (d + 1), 1e-14) << "n=" << n << " degree " << d;
    }
  }
}

TEST(Integration, ExpWeightedMatchesGammaFunction) {
  EXPECT_NEAR(integrate_exp_weighted([](double t) { return t * t * t; }, 0.0, std::numeric_limits<double>::infinity()), 6.0, 1e-10);
  EXPECT_NEAR(integrate_exp_weighted([](double) { return 1.0; }, 1.0, 3.0), std::exp(-1.0) - std::exp(-3.0), 1e-14);
  EXPECT_NEAR(integrate_gl([](double x) { return std::sin(x); }, 0.0, kPi, 4), 2.0, 1e-12);
}

TEST(Richardson, GeometricConvergenceEstimateBoundsError) {
  const auto r = richardson_sweep([](int n) { return 1.0 - std::pow(0.5, n); }, std::vector<int>{8, 16, 32});
  EXPECT_LE(std::abs(r.value - 1.0), r.error_estimate + 1e-16);
  EXPECT_EQ(r.history.size(), 3u);
}

TEST(OrderedSum, CompensatesCancellation) {
  OrderedSum<double> s;
  s.add(1.0);
  for (int i = 0; i < 10000; ++i) s.add(1e-16);
  s.add(-1.0);
  EXPECT_NEAR(s.value(), 1e-12, 1e-20);
}
