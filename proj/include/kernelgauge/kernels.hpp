#pragma once

// Weighted Bergman and Szegő kernel diagonals from finite Laurent bases.
//
// Bergman:  B^{(k)}(z₀) = 1 / min{ ∫|f|²ρ : f^{(j)}(z₀)/j! = δ_{jk}, j <= k }
// Szegő:    K^{(k)}(z₀) = 2π / min{ ∮|f|²λ|dz| : same constraints }
// (the 2π puts the Szegő kernel in the (1/2π)∮ reproducing normalization).
//
// Basis: e_n(z) = zⁿ for n >= 0 and (q/z)^{|n|} for n < 0, so every basis
// function is bounded by 1 on the closed domain.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "kernelgauge/domain.hpp"
#include "kernelgauge/errors.hpp"
#include "kernelgauge/numerics.hpp"
#include "kernelgauge/weights.hpp"

namespace kernelgauge {

enum class KernelSide { bergman, szego };

inline std::string to_string(KernelSide s) { return s == KernelSide::bergman ? "bergman" : "szego"; }

inline cplx ipow(cplx z, int n) {
  if (n < 0) return ipow(1.0 / z, -n);
  cplx result = 1.0;
  cplx base = z;
  while (n > 0) {
    if (n & 1) result *= base;
    base *= base;
    n >>= 1;
  }
  return result;
}

/// n(n-1)...(n-j+1)/j! for any integer n.
inline double falling_binomial(int n, int j) {
  double v = 1.0;
  for (int i = 0; i < j; ++i) v *= static_cast<double>(n - i) / static_cast<double>(i + 1);
  return v;
}

class BasisDescriptor {
 public:
  BasisDescriptor(DomainSpec domain, int n_max, cplx z0, int k) : domain_(domain), n_max_(n_max), z0_(z0), k_(k) {
    if (n_max < 0) throw std::invalid_argument("BasisDescriptor: n_max must be nonnegative");
    if (k < 0) throw std::invalid_argument("BasisDescriptor: k must be nonnegative");
  }

  const DomainSpec& domain() const { return domain_; }
  int n_max() const { return n_max_; }
  cplx z0() const { return z0_; }
  int k() const { return k_; }
  int size() const { return domain_.is_disc() ? n_max_ + 1 : 2 * n_max_ + 1; }
  int exponent(int i) const { return domain_.is_disc() ? i : i - n_max_; }
  int index_of(int n) const { return domain_.is_disc() ? n : n + n_max_; }
  double scale(int n) const { return n < 0 ? std::pow(domain_.inner_radius(), -n) : 1.0; }

  BasisDescriptor truncated(int n) const { return BasisDescriptor(domain_, n, z0_, k_); }
  /// First index of truncated(n) inside this basis (the block is contiguous).
  int offset_of(int n) const { return domain_.is_disc() ? 0 : n_max_ - n; }

  /// e_n(z) for every basis index, written into out[0..size).
  template <typename Out>
  void evaluate(cplx z, Out&& out) const {
    cplx p = 1.0;
    const int base = index_of(0);
    out[base] = 1.0;
    for (int n = 1; n <= n_max_; ++n) {
      p *= z;
      out[base + n] = p;
    }
    if (!domain_.is_disc()) {
      const cplx r = domain_.inner_radius() / z;
      cplx m = 1.0;
      for (int n = 1; n <= n_max_; ++n) {
        m *= r;
        out[base - n] = m;
      }
    }
  }

  CVector values(cplx z) const {
    CVector v(size());
    evaluate(z, v);
    return v;
  }

  /// Rows j = 0..k of f ↦ f^{(j)}(z₀)/j!, by exact differentiation of zⁿ.
  CMatrix functional_rows() const {
    CMatrix L = CMatrix::Zero(k_ + 1, size());
    for (int j = 0; j <= k_; ++j) {
      for (int i = 0; i < size(); ++i) {
        const int n = exponent(i);
        if (n >= 0 && n < j) continue;
        L(j, i) = scale(n) * falling_binomial(n, j) * ipow(z0_, n - j);
      }
    }
    return L;
  }

  ConstraintSystem constraints() const {
    CVector b = CVector::Zero(k_ + 1);
    b(k_) = 1.0;
    return {functional_rows(), b};
  }

  /// Σ c_i e_i(z)
  cplx combine(const CVector& coeffs, cplx z) const { return values(z).transpose() * coeffs; }

  /// Laurent coefficient of zⁿ for a coefficient vector in this basis.
  cplx laurent_coefficient(const CVector& coeffs, int n) const {
    if (std::abs(n) > n_max_ || (domain_.is_disc() && n < 0)) return {};
    return coeffs(index_of(n)) * scale(n);
  }

 private:
  DomainSpec domain_;
  int n_max_;
  cplx z0_;
  int k_;
};

/// A kernel problem: domain, constraint point and order, and log-densities.
struct KernelProblem {
  DomainSpec domain = DomainSpec::disc();
  cplx z0{};
  int k = 0;
  std::function<double(cplx)> log_rho;
  std::function<double(const BoundaryNode&)> log_lambda;
};

inline KernelProblem make_problem(const WeightModel& model) {
  KernelProblem p;
  p.domain = model.config().domain;
  p.z0 = model.config().z0;
  p.k = model.config().k;
  p.log_rho = [model](cplx z) { return model.log_rho(z); };
  p.log_lambda = [model](const BoundaryNode& n) { return model.log_lambda(n); };
  return p;
}

struct KernelSettings {
  std::vector<int> schedule{8, 16, 32, 48};
  int boundary_nodes = 256;
  AreaResolution area;
  bool quadrature_estimate = true;

  int n_max() const { return schedule.empty() ? 0 : schedule.back(); }
};

/// Sample matrix A with A(i, j) = sqrt(w_i·density_i)·e_j(z_i); then the
/// Gram matrix is AᴴA.
inline CMatrix sample_matrix(const BasisDescriptor& basis, const std::vector<cplx>& nodes,
                             const std::vector<double>& sqrt_weights) {
  CMatrix A(static_cast<Eigen::Index>(nodes.size()), basis.size());
  CVector row(basis.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    basis.evaluate(nodes[i], row);
    A.row(static_cast<Eigen::Index>(i)) = sqrt_weights[i] * row.transpose();
  }
  return A;
}

namespace detail {

inline HermitianMatrix gram_from_samples(const BasisDescriptor& basis, const std::vector<cplx>& nodes,
                                         const std::vector<double>& sqrt_weights) {
  constexpr std::size_t kBlock = 2048;
  CMatrix H = CMatrix::Zero(basis.size(), basis.size());
  for (std::size_t start = 0; start < nodes.size(); start += kBlock) {
    const std::size_t stop = std::min(nodes.size(), start + kBlock);
    const std::vector<cplx> zs(nodes.begin() + start, nodes.begin() + stop);
    const std::vector<double> ws(sqrt_weights.begin() + start, sqrt_weights.begin() + stop);
    const CMatrix A = sample_matrix(basis, zs, ws);
    H.noalias() += A.adjoint() * A;
  }
  return HermitianMatrix(H);
}

inline std::vector<double> area_sqrt_weights(const AreaQuadrature& quad, const std::function<double(cplx)>& log_rho) {
  std::vector<double> s(quad.size());
  for (std::size_t i = 0; i < quad.size(); ++i) {
    s[i] = std::exp(0.5 * (std::log(quad.weights()[i]) + log_rho(quad.nodes()[i])));
  }
  return s;
}

inline std::vector<double> boundary_sqrt_weights(const BoundaryQuadrature& quad,
                                                 const std::function<double(const BoundaryNode&)>& log_lambda) {
  std::vector<double> s(quad.size());
  for (std::size_t i = 0; i < quad.size(); ++i) {
    const auto& n = quad.nodes()[i];
    s[i] = std::exp(0.5 * (std::log(n.weight) + log_lambda(n)));
  }
  return s;
}

inline std::vector<cplx> boundary_points(const BoundaryQuadrature& quad) {
  std::vector<cplx> z(quad.size());
  for (std::size_t i = 0; i < quad.size(); ++i) z[i] = quad.nodes()[i].z;
  return z;
}

}  // namespace detail

/// ∫ conj(e_i) e_j ρ dA
inline HermitianMatrix gram(const BasisDescriptor& basis, const AreaQuadrature& quad,
                            const std::function<double(cplx)>& log_rho) {
  return detail::gram_from_samples(basis, quad.nodes(), detail::area_sqrt_weights(quad, log_rho));
}

/// ∮ conj(e_i) e_j λ |dz|
inline HermitianMatrix gram(const BasisDescriptor& basis, const BoundaryQuadrature& quad,
                            const std::function<double(const BoundaryNode&)>& log_lambda) {
  return detail::gram_from_samples(basis, detail::boundary_points(quad), detail::boundary_sqrt_weights(quad, log_lambda));
}

struct KernelValue {
  double value = 0.0;
  double truncation_estimate = 0.0;
  double quadrature_estimate = 0.0;
  std::vector<double> history;  // value per schedule entry

  double error_estimate() const { return truncation_estimate + quadrature_estimate; }
  double relative_error() const { return value > 0.0 ? error_estimate() / value : 0.0; }
};

/// Kernel diagonal plus the extremal element at the largest truncation.
/// `minimizer` satisfies the constraints; for k = 0 it is the section
/// M(z) = K(z, z̄₀)/K(z₀, z̄₀).
struct KernelSolution {
  KernelSide side = KernelSide::bergman;
  KernelValue kernel;
  BasisDescriptor basis{DomainSpec::disc(), 0, {}, 0};
  CVector minimizer;
  HermitianMatrix gram_matrix;

  cplx section(cplx z) const { return basis.combine(minimizer, z); }
  /// K(z, z̄₀) (k = 0) or the k-th derivative analogue.
  cplx kernel_at(cplx z) const { return kernel.value * section(z); }
};

namespace detail {

inline double kernel_from_min(KernelSide side, double min) { return side == KernelSide::bergman ? 1.0 / min : kTwoPi / min; }

inline HermitianMatrix assemble(const KernelProblem& p, KernelSide side, const BasisDescriptor& basis,
                                const KernelSettings& s, bool doubled) {
  if (side == KernelSide::bergman) {
    const auto quad = area_quadrature(p.domain, p.z0, doubled ? s.area.doubled() : s.area);
    return gram(basis, quad, p.log_rho);
  }
  const auto quad = boundary_quadrature(p.domain, doubled ? 2 * s.boundary_nodes : s.boundary_nodes);
  return gram(basis, quad, p.log_lambda);
}

inline ConstrainedMinimum solve_block(const HermitianMatrix& H, const BasisDescriptor& full, int n) {
  const BasisDescriptor sub = full.truncated(n);
  const int off = full.offset_of(n);
  const HermitianMatrix block(H.entries().block(off, off, sub.size(), sub.size()));
  return constrained_min(block, sub.constraints());
}

}  // namespace detail

inline KernelSolution solve_kernel(const KernelProblem& p, KernelSide side, const KernelSettings& s = {}) {
  if (s.schedule.size() < 2) throw std::invalid_argument("kernel schedule needs at least two truncations");
  const BasisDescriptor basis(p.domain, s.n_max(), p.z0, p.k);
  if (side == KernelSide::szego && s.boundary_nodes <= 4 * s.n_max()) {
    throw std::invalid_argument("boundary_nodes must exceed 4 * largest truncation");
  }
  const HermitianMatrix H = detail::assemble(p, side, basis, s, false);

  ConstrainedMinimum last;
  auto eval = [&](int n) {
    auto r = detail::solve_block(H, basis, n);
    if (n == s.n_max()) last = r;
    return detail::kernel_from_min(side, r.value);
  };
  const SweepResult sweep = richardson_sweep(eval, s.schedule);

  KernelSolution out{side, {}, basis, last.minimizer, H};
  out.kernel.value = sweep.value;
  out.kernel.truncation_estimate = sweep.error_estimate;
  out.kernel.history = sweep.history;
  if (s.quadrature_estimate) {
    const HermitianMatrix H2 = detail::assemble(p, side, basis, s, true);
    const double v2 = detail::kernel_from_min(side, constrained_min(H2, basis.constraints()).value);
    out.kernel.quadrature_estimate = std::abs(v2 - sweep.value);
  }
  return out;
}

inline KernelValue kernel_diag(const KernelProblem& p, KernelSide side, const KernelSettings& s = {}) {
  return solve_kernel(p, side, s).kernel;
}

inline KernelValue kernel_diag(const WeightModel& m, KernelSide side, const KernelSettings& s = {}) {
  return kernel_diag(make_problem(m), side, s);
}

/// Coefficients (in the scaled basis) of M(z) = K(z, z̄₀)/K(z₀, z̄₀).
inline KernelSolution kernel_section(const KernelProblem& p, KernelSide side, const KernelSettings& s = {}) {
  if (p.k != 0) throw std::invalid_argument("kernel_section requires k = 0");
  KernelSettings quick = s;
  quick.quadrature_estimate = false;
  return solve_kernel(p, side, quick);
}

inline KernelSolution kernel_section(const WeightModel& m, KernelSide side, const KernelSettings& s = {}) {
  return kernel_section(make_problem(m), side, s);
}

/// |⟨zⁿ, K(·, z̄₀)⟩ − z₀ⁿ| with the inner product evaluated on a quadrature
/// twice as fine as the one the kernel was built on.
inline double reproducing_residual(const KernelProblem& p, const KernelSolution& sol, int n, const KernelSettings& s = {}) {
  if (p.k != 0) throw std::invalid_argument("reproducing_residual requires k = 0");
  if (std::abs(n) > sol.basis.n_max() || (p.domain.is_disc() && n < 0)) {
    throw std::invalid_argument("reproducing_residual: exponent outside the basis range");
  }
  OrderedSum<cplx> acc;
  if (sol.side == KernelSide::szego) {
    const auto quad = boundary_quadrature(p.domain, 2 * s.boundary_nodes);
    for (const auto& node : quad.nodes()) {
      acc.add(node.weight * std::exp(p.log_lambda(node)) * ipow(node.z, n) * std::conj(sol.kernel_at(node.z)));
    }
    return std::abs(acc.value() / kTwoPi - ipow(p.z0, n));
  }
  const auto quad = area_quadrature(p.domain, p.z0, s.area.doubled());
  for (std::size_t i = 0; i < quad.size(); ++i) {
    const cplx z = quad.nodes()[i];
    acc.add(quad.weights()[i] * std::exp(p.log_rho(z)) * ipow(z, n) * std::conj(sol.kernel_at(z)));
  }
  return std::abs(acc.value() - ipow(p.z0, n));
}

inline double reproducing_residual(const KernelProblem& p, KernelSide side, int n, const KernelSettings& s = {}) {
  return reproducing_residual(p, kernel_section(p, side, s), n, s);
}

/// Two-point kernel K(z, w̄) = c·e(z)ᵀ H⁻¹ conj(e(w)) on a fixed basis, with
/// c = 1 (Bergman) or 2π (Szegő).
class KernelSpace {
 public:
  KernelSpace(const KernelProblem& p, KernelSide side, const KernelSettings& s = {})
      : basis_(p.domain, s.n_max(), p.z0, 0),
        factor_(side == KernelSide::bergman ? 1.0 : kTwoPi),
        gram_(detail::assemble(p, side, basis_, s, false)) {
    const CMatrix& H = gram_.entries();
    scale_ = H.diagonal().real().cwiseSqrt().cwiseInverse();
    ldlt_.compute(scale_.asDiagonal() * H * scale_.asDiagonal());
    if (ldlt_.info() != Eigen::Success) throw SingularGram("kernel space Gram factorization failed");
  }

  const BasisDescriptor& basis() const { return basis_; }
  const HermitianMatrix& gram() const { return gram_; }

  cplx operator()(cplx z, cplx w) const {
    const CVector ez = scale_.asDiagonal() * basis_.values(z);
    const CVector ew = scale_.asDiagonal() * basis_.values(w);
    const CVector y = ldlt_.solve(CVector(ew.conjugate()));
    return factor_ * (ez.transpose() * y)(0, 0);
  }

 private:
  BasisDescriptor basis_;
  double factor_;
  HermitianMatrix gram_;
  Eigen::VectorXd scale_;
  Eigen::LDLT<CMatrix> ldlt_;
};

}  // namespace kernelgauge
