#pragma once

// Dense Hermitian linear algebra, quadrature rules on [-1, 1] and
// truncation sweeps shared by every other module.
//
// Summation order: every reduction in this library runs over its index
// range in increasing order with Neumaier compensation (see `OrderedSum`).
// Matrix products go through Eigen with a single thread, which is
// deterministic for fixed shapes. Reports are therefore bitwise
// reproducible for identical inputs on the same build.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "kernelgauge/errors.hpp"

namespace kernelgauge {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Neumaier-compensated accumulator. Adds happen in call order.
template <typename T>
class OrderedSum {
 public:
  void add(T x) {
    const T t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  T value() const { return sum_ + comp_; }

 private:
  T sum_{};
  T comp_{};
};

template <>
class OrderedSum<cplx> {
 public:
  void add(cplx x) {
    re_.add(x.real());
    im_.add(x.imag());
  }
  cplx value() const { return {re_.value(), im_.value()}; }

 private:
  OrderedSum<double> re_;
  OrderedSum<double> im_;
};

inline double ordered_sum(std::span<const double> xs) {
  OrderedSum<double> s;
  for (double x : xs) s.add(x);
  return s.value();
}

/// Square Hermitian matrix. The constructor rejects inputs whose
/// anti-Hermitian part exceeds 1e-10 of the largest entry and then stores
/// the exact Hermitian part.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;
  explicit HermitianMatrix(const CMatrix& entries) {
    if (entries.rows() != entries.cols() || entries.rows() == 0) {
      throw std::invalid_argument("HermitianMatrix: entries must be square and non-empty");
    }
    const double scale = entries.cwiseAbs().maxCoeff();
    const double skew = (entries - entries.adjoint()).cwiseAbs().maxCoeff();
    if (skew > 1e-10 * std::max(scale, 1e-300)) {
      throw std::invalid_argument("HermitianMatrix: entries are not Hermitian");
    }
    m_ = 0.5 * (entries + entries.adjoint());
  }

  Eigen::Index dimension() const { return m_.rows(); }
  const CMatrix& entries() const { return m_; }
  cplx operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

  /// xᴴ M x (real for Hermitian M).
  double quadratic_form(const CVector& x) const { return (x.adjoint() * m_ * x)(0, 0).real(); }

 private:
  CMatrix m_;
};

/// Linear point functionals L x = b on basis coefficients.
struct ConstraintSystem {
  CMatrix rows;
  CVector target;
};

struct ConstrainedMinimum {
  double value = 0.0;
  CVector minimizer;
};

namespace detail {

inline void check_constraints(const ConstraintSystem& c, Eigen::Index dim) {
  if (c.rows.cols() != dim || c.rows.rows() != c.target.size()) {
    throw std::invalid_argument("ConstraintSystem: shape does not match matrix dimension");
  }
  if (c.rows.rows() == 0 || c.rows.rows() > dim) {
    throw InconsistentConstraints("constraint count must be in [1, dimension]");
  }
  // Rank test on the row-normalized L Lᴴ.
  CMatrix normalized = c.rows;
  for (Eigen::Index i = 0; i < normalized.rows(); ++i) {
    const double n = normalized.row(i).norm();
    if (n == 0.0) throw InconsistentConstraints("zero constraint row " + std::to_string(i));
    normalized.row(i) /= n;
  }
  const CMatrix llh = normalized * normalized.adjoint();
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(llh, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < 1e-12 * eig.eigenvalues().maxCoeff()) {
    throw InconsistentConstraints("constraint rows are linearly dependent (L Lᴴ rank-deficient)");
  }
}

}  // namespace detail

/// min xᴴ M x subject to L x = b, via the Schur complement
/// value = bᴴ (L M⁻¹ Lᴴ)⁻¹ b. M is Jacobi-scaled before a Cholesky
/// factorization; one retry adds 1e-12·trace/dim to the diagonal.
inline ConstrainedMinimum constrained_min(const HermitianMatrix& M, const ConstraintSystem& C) {
  const Eigen::Index n = M.dimension();
  detail::check_constraints(C, n);

  Eigen::VectorXd d(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double diag = M(i, i).real();
    if (!(diag > 0.0) || !std::isfinite(diag)) {
      throw SingularGram("non-positive diagonal entry at index " + std::to_string(i));
    }
    d(i) = 1.0 / std::sqrt(diag);
  }
  CMatrix scaled = d.asDiagonal() * M.entries() * d.asDiagonal();
  const CMatrix ls = C.rows * d.asDiagonal();

  Eigen::LLT<CMatrix> llt(scaled);
  if (llt.info() != Eigen::Success) {
    const double jitter = 1e-12 * scaled.trace().real() / static_cast<double>(n);
    scaled.diagonal().array() += jitter;
    llt.compute(scaled);
    if (llt.info() != Eigen::Success) {
      throw SingularGram("Cholesky failed after diagonal jitter");
    }
  }

  const CMatrix z = llt.matrixL().solve(CMatrix(ls.adjoint()));
  const CMatrix schur = z.adjoint() * z;
  Eigen::LDLT<CMatrix> schur_ldlt(schur);
  if (schur_ldlt.info() != Eigen::Success) {
    throw InconsistentConstraints("Schur complement L M⁻¹ Lᴴ is singular");
  }
  CVector y = schur_ldlt.solve(C.target);
  CVector xs = llt.solve(CVector(ls.adjoint() * y));

  // One refinement step on the constraint residual.
  const CVector r = C.target - ls * xs;
  const CVector dy = schur_ldlt.solve(r);
  y += dy;
  xs += llt.solve(CVector(ls.adjoint() * dy));

  ConstrainedMinimum out;
  out.value = (C.target.adjoint() * y)(0, 0).real();
  out.minimizer = d.asDiagonal() * xs;
  return out;
}

/// min ‖A x‖² subject to L x = b, where A holds the basis sampled at
/// quadrature nodes scaled by sqrt(weight·density). Null-space reduction
/// plus a truncated-SVD least-squares solve: singular values below
/// `cutoff` times the largest are dropped. Columns sampled on a small
/// sublevel region are nearly dependent, and without the cutoff the solve
/// builds huge-coefficient combinations that only cancel at the nodes.
inline ConstrainedMinimum constrained_min_sampled(const CMatrix& A, const ConstraintSystem& C, double cutoff = 1e-10) {
  const Eigen::Index n = A.cols();
  detail::check_constraints(C, n);
  const Eigen::Index m = C.rows.rows();

  Eigen::VectorXd d(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double norm = A.col(j).norm();
    d(j) = norm > 0.0 ? 1.0 / norm : 1.0;
  }
  const CMatrix as = A * d.asDiagonal();
  const CMatrix ls = C.rows * d.asDiagonal();

  Eigen::HouseholderQR<CMatrix> qr(ls.adjoint());
  const CMatrix q = qr.householderQ() * CMatrix::Identity(n, n);
  const CMatrix r1 = qr.matrixQR().topLeftCorner(m, m).template triangularView<Eigen::Upper>();
  // L_s = R1ᴴ Q1ᴴ, so x_p = Q1 R1⁻ᴴ b is the minimum-norm particular solution.
  const CVector w = r1.adjoint().template triangularView<Eigen::Lower>().solve(C.target);
  CVector x = q.leftCols(m) * w;
  if (n > m) {
    const CMatrix q2 = q.rightCols(n - m);
    const CMatrix reduced = as * q2;
    Eigen::HouseholderQR<CMatrix> rqr(reduced);
    const Eigen::Index k = std::min(reduced.rows(), reduced.cols());
    const CMatrix rr = rqr.matrixQR().topRows(k).template triangularView<Eigen::Upper>();
    const CVector rhs = (rqr.householderQ().adjoint() * CVector(-(as * x))).head(k);
    Eigen::JacobiSVD<CMatrix> svd(rr, Eigen::ComputeFullU | Eigen::ComputeFullV);
    svd.setThreshold(cutoff);
    x += q2 * CVector(svd.solve(rhs));
  }
  const CVector residual = as * x;
  ConstrainedMinimum out;
  out.value = residual.squaredNorm();
  out.minimizer = d.asDiagonal() * x;
  return out;
}

struct SweepResult {
  double value = 0.0;
  double error_estimate = 0.0;
  std::vector<double> history;
};

/// Evaluates a resolution-dependent quantity over an increasing schedule and
/// reports the last value with |v(N_last) − v(N_prev)| as the error.
/// Throws NonConvergent when the last difference exceeds the one before it
/// by more than a roundoff floor of 1e-10·|v|.
inline SweepResult richardson_sweep(const std::function<double(int)>& evaluate,
                                    std::span<const int> schedule) {
  if (schedule.size() < 2) throw std::invalid_argument("richardson_sweep: schedule needs >= 2 points");
  for (std::size_t i = 1; i < schedule.size(); ++i) {
    if (schedule[i] <= schedule[i - 1]) {
      throw std::invalid_argument("richardson_sweep: schedule must be strictly increasing");
    }
  }
  SweepResult out;
  for (int n : schedule) out.history.push_back(evaluate(n));
  const std::size_t s = out.history.size();
  out.value = out.history[s - 1];
  out.error_estimate = std::abs(out.history[s - 1] - out.history[s - 2]);
  if (s >= 3) {
    const double prev = std::abs(out.history[s - 2] - out.history[s - 3]);
    const double floor = 1e-10 * std::max(1.0, std::abs(out.value));
    if (out.error_estimate > prev && out.error_estimate > floor) {
      throw NonConvergent("successive differences grow: " + std::to_string(prev) + " -> " +
                          std::to_string(out.error_estimate));
    }
  }
  return out;
}

/// Gauss–Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline GaussRule compute_gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be positive");
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  // Legendre P_n and its derivative at x by the three-term recurrence.
  auto legendre = [n](double x, double& dp) {
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    const double pn = n == 1 ? x : p1;
    const double pm = n == 1 ? 1.0 : p0;
    dp = n * (x * pn - pm) / (x * x - 1.0);
    return pn;
  };
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      const double dx = legendre(x, dp) / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    legendre(x, dp);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

/// Cached rule; safe to call concurrently.
inline const GaussRule& gauss_legendre(int n) {
  static std::mutex mutex;
  static std::map<int, GaussRule> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_gauss_legendre(n)).first;
  return it->second;
}

/// Composite Gauss–Legendre integral of f over [a, b].
inline double integrate_gl(const std::function<double(double)>& f, double a, double b, int panels,
                           int points = 16) {
  const GaussRule& g = gauss_legendre(points);
  OrderedSum<double> s;
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    for (int i = 0; i < points; ++i) {
      s.add(0.5 * h * g.weights[i] * f(lo + 0.5 * h * (g.nodes[i] + 1.0)));
    }
  }
  return s.value();
}

/// ∫_a^b f(t) e^{-t} dt with b possibly +∞. The tail is cut once e^{-t}
/// times the running scale drops below 1e-18.
inline double integrate_exp_weighted(const std::function<double(double)>& f, double a, double b) {
  auto integrand = [&](double t) { return f(t) * std::exp(-t); };
  if (std::isfinite(b)) {
    const int panels = std::max(1, static_cast<int>(std::ceil(b - a)));
    return integrate_gl(integrand, a, b, panels);
  }
  OrderedSum<double> s;
  double lo = a;
  for (int i = 0; i < 4000; ++i) {
    const double piece = integrate_gl(integrand, lo, lo + 1.0, 1);
    s.add(piece);
    lo += 1.0;
    if (std::abs(piece) < 1e-18 * std::max(1e-300, std::abs(s.value())) && lo > a + 40.0) break;
  }
  return s.value();
}

}  // namespace kernelgauge
