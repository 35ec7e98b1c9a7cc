#pragma once

// Green functions, logarithmic capacity, Dirichlet solves, conjugate
// periods (characters) on the disc and the annulus.
//
// Harmonic functions are stored as  u(z) = α·log|z| + Re Σ_{|n|<=M} a_n zⁿ.
// Their analytic completion u + iũ has derivative α/z + Σ n a_n z^{n-1},
// which is single valued; ũ itself changes by 2πα around the hole.
//
// Annulus Green function: G(z, w) = log|z - w| + h(z), where h is the
// harmonic function with boundary values -log|ζ - w| on both circles. Those
// boundary values have explicit Fourier series,
//   |ζ| = 1 :  Re Σ_{n>=1} (w̄ⁿ/n) e^{inθ}
//   |ζ| = q :  -log|w| + Re Σ_{n>=1} ((q/w)ⁿ/n) e^{inθ},
// and each Fourier mode is matched by one pair (a_n zⁿ, a_{-n} z⁻ⁿ).

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "kernelgauge/domain.hpp"
#include "kernelgauge/errors.hpp"
#include "kernelgauge/numerics.hpp"

namespace kernelgauge {

using AnalyticEvaluator = std::function<cplx(cplx)>;

class HarmonicFunctionRep {
 public:
  HarmonicFunctionRep() : laurent_(1, cplx{}) {}

  /// `laurent` holds a_{-M} .. a_M (length 2M + 1).
  HarmonicFunctionRep(double log_coefficient, std::vector<cplx> laurent)
      : log_coefficient_(log_coefficient), laurent_(std::move(laurent)) {
    if (laurent_.size() % 2 != 1) throw std::invalid_argument("HarmonicFunctionRep: laurent size must be odd");
  }

  static HarmonicFunctionRep log_mode(double alpha) { return HarmonicFunctionRep(alpha, {cplx{}}); }

  /// Builds from sparse (n, a_n) pairs.
  static HarmonicFunctionRep from_terms(double alpha, const std::vector<std::pair<int, cplx>>& terms) {
    int m = 0;
    for (const auto& [n, a] : terms) m = std::max(m, std::abs(n));
    std::vector<cplx> coeffs(2 * m + 1, cplx{});
    for (const auto& [n, a] : terms) coeffs[n + m] += a;
    return HarmonicFunctionRep(alpha, std::move(coeffs));
  }

  double log_coefficient() const { return log_coefficient_; }
  int truncation() const { return static_cast<int>(laurent_.size() / 2); }
  cplx coefficient(int n) const {
    const int m = truncation();
    return std::abs(n) > m ? cplx{} : laurent_[n + m];
  }
  const std::vector<cplx>& coefficients() const { return laurent_; }
  bool has_negative_powers() const {
    for (int n = 1; n <= truncation(); ++n) {
      if (coefficient(-n) != cplx{}) return true;
    }
    return false;
  }

  /// Σ a_n zⁿ by Horner in z and in 1/z.
  cplx laurent_sum(cplx z) const {
    const int m = truncation();
    cplx pos{};
    for (int n = m; n >= 0; --n) pos = pos * z + laurent_[n + m];
    cplx neg{};
    if (m > 0) {
      const cplx inv = 1.0 / z;
      for (int n = m; n >= 1; --n) neg = (neg + laurent_[m - n]) * inv;
    }
    return pos + neg;
  }

  double operator()(cplx z) const {
    const double log_part = log_coefficient_ == 0.0 ? 0.0 : log_coefficient_ * std::log(std::abs(z));
    return log_part + laurent_sum(z).real();
  }

  /// 2∂u/∂z = α/z + Σ n a_n z^{n-1}.
  cplx analytic_derivative(cplx z) const {
    const int m = truncation();
    cplx pos{};
    for (int n = m; n >= 1; --n) pos = pos * z + static_cast<double>(n) * laurent_[n + m];
    cplx neg{};
    const cplx inv = 1.0 / z;
    for (int n = m; n >= 1; --n) neg = (neg - static_cast<double>(n) * laurent_[m - n]) * inv;
    return pos + neg * inv + log_coefficient_ * inv;
  }

  /// u + iũ along the principal branch of log z: α·Log z + Σ a_n zⁿ.
  cplx primitive(cplx z) const {
    const cplx log_part = log_coefficient_ == 0.0 ? cplx{} : log_coefficient_ * std::log(z);
    return log_part + laurent_sum(z);
  }

  HarmonicFunctionRep scaled(double s) const {
    std::vector<cplx> c = laurent_;
    for (auto& x : c) x *= s;
    return HarmonicFunctionRep(s * log_coefficient_, std::move(c));
  }

  friend HarmonicFunctionRep operator+(const HarmonicFunctionRep& a, const HarmonicFunctionRep& b) {
    const int m = std::max(a.truncation(), b.truncation());
    std::vector<cplx> c(2 * m + 1, cplx{});
    for (int n = -m; n <= m; ++n) c[n + m] = a.coefficient(n) + b.coefficient(n);
    return HarmonicFunctionRep(a.log_coefficient_ + b.log_coefficient_, std::move(c));
  }

 private:
  double log_coefficient_ = 0.0;
  std::vector<cplx> laurent_;
};

/// G_D(·, w) = log|z - w| + correction(z). On the disc the correction is the
/// closed form -log|1 - w̄z|; on the annulus it is a Laurent series.
class GreenFunctionRep {
 public:
  GreenFunctionRep(DomainSpec domain, cplx pole, HarmonicFunctionRep correction)
      : domain_(domain), pole_(pole), correction_(std::move(correction)) {}

  const DomainSpec& domain() const { return domain_; }
  cplx pole() const { return pole_; }
  const HarmonicFunctionRep& correction() const { return correction_; }
  int truncation() const { return correction_.truncation(); }

  double correction_at(cplx z) const {
    if (domain_.is_disc()) return -std::log(std::abs(1.0 - std::conj(pole_) * z));
    return correction_(z);
  }

  double operator()(cplx z) const { return std::log(std::abs(z - pole_)) + correction_at(z); }

  /// finite part of G at its pole; log_capacity = exp(robin_constant()).
  double robin_constant() const { return correction_at(pole_); }

  /// h′(z) = 2∂G/∂z, analytic with a simple pole of residue 1 at w.
  cplx analytic_derivative(cplx z) const { return 1.0 / (z - pole_) + correction_derivative(z); }

  cplx correction_derivative(cplx z) const {
    if (domain_.is_disc()) {
      const cplx wb = std::conj(pole_);
      return wb / (1.0 - wb * z);
    }
    return correction_.analytic_derivative(z);
  }

  /// Primitive of correction_derivative on the principal branch.
  cplx regular_primitive(cplx z) const {
    if (domain_.is_disc()) return -std::log(1.0 - std::conj(pole_) * z);
    return correction_.primitive(z);
  }

  /// Log-mode coefficient α of the correction (zero on the disc).
  double log_coefficient() const { return domain_.is_disc() ? 0.0 : correction_.log_coefficient(); }

  /// ∂G/∂ν at a boundary point with outward unit normal ν.
  double normal_derivative(cplx zeta, cplx normal) const { return (analytic_derivative(zeta) * normal).real(); }
  double normal_derivative(const BoundaryNode& node) const { return normal_derivative(node.z, node.normal); }

  /// Correction as a truncated Laurent series on either domain. On the disc
  /// the series is Re Σ (w̄z)ⁿ/n truncated where |w|ⁿ/n < 1e-18.
  HarmonicFunctionRep correction_series() const {
    if (!domain_.is_disc()) return correction_;
    const double s = std::abs(pole_);
    if (s == 0.0) return HarmonicFunctionRep();
    int m = 1;
    while (std::pow(s, m) / m > 1e-18 && m < 100000) ++m;
    std::vector<std::pair<int, cplx>> terms;
    const cplx wb = std::conj(pole_);
    cplx power = 1.0;
    for (int n = 1; n <= m; ++n) {
      power *= wb;
      terms.emplace_back(n, power / static_cast<double>(n));
    }
    return HarmonicFunctionRep::from_terms(0.0, terms);
  }

 private:
  DomainSpec domain_;
  cplx pole_;
  HarmonicFunctionRep correction_;
};

/// Default series truncation for annulus Green functions; raised
/// automatically when the pole is near a boundary circle.
inline constexpr int kDefaultGreenTruncation = 64;

inline GreenFunctionRep green(const DomainSpec& domain, cplx w, int truncation = kDefaultGreenTruncation) {
  if (!domain.contains(w)) throw InvalidConfig("Green pole must lie strictly inside the domain");
  if (domain.distance_to_boundary(w) < 1e-3) {
    throw PoleTooCloseToBoundary("pole distance " + std::to_string(domain.distance_to_boundary(w)) +
                                 " < 1e-3");
  }
  if (domain.is_disc()) return GreenFunctionRep(domain, w, HarmonicFunctionRep());

  const double q = domain.inner_radius();
  const double s = std::abs(w);
  const double rate = std::max(s, q / s);
  const int needed = static_cast<int>(std::ceil(std::log(1e-18) / std::log(rate)));
  const int m = std::clamp(std::max(truncation, needed), 1, 200000);

  std::vector<cplx> coeffs(2 * m + 1, cplx{});
  const cplx wb = std::conj(w);
  cplx wb_pow = 1.0;   // w̄ⁿ
  cplx qw_pow = 1.0;   // (q/w)ⁿ
  double q_pow = 1.0;  // qⁿ
  for (int n = 1; n <= m; ++n) {
    wb_pow *= wb;
    qw_pow *= q / w;
    q_pow *= q;
    const cplx outer = wb_pow / static_cast<double>(n);
    const cplx inner = qw_pow / static_cast<double>(n);
    const double denom = 1.0 - q_pow * q_pow;
    const cplx c = (outer - inner * q_pow) / denom;
    const cplx e = (inner * q_pow - outer * q_pow * q_pow) / denom;
    coeffs[m + n] = c;
    coeffs[m - n] = std::conj(e);
  }
  const double alpha = -std::log(s) / std::log(q);
  return GreenFunctionRep(domain, w, HarmonicFunctionRep(alpha, std::move(coeffs)));
}

inline double green_boundary_normal_derivative(const GreenFunctionRep& g, const BoundaryNode& node) {
  return g.normal_derivative(node);
}

inline double log_capacity(const DomainSpec& domain, cplx z0) { return std::exp(green(domain, z0).robin_constant()); }

/// Harmonic extension of boundary samples. `boundary_data[c][j]` is the
/// value at angle 2πj/N on component c (the boundary_quadrature layout).
/// On the annulus the log|z| mode is fixed by the two circle means.
/// Throws TruncationInsufficient when the trace misfit at the nodes exceeds
/// 1e-6.
inline HarmonicFunctionRep dirichlet_solve(const DomainSpec& domain,
                                           const std::vector<std::vector<double>>& boundary_data, int truncation) {
  if (static_cast<int>(boundary_data.size()) != domain.component_count()) {
    throw std::invalid_argument("dirichlet_solve: one sample vector per boundary component required");
  }
  const int n_nodes = static_cast<int>(boundary_data[0].size());
  for (const auto& d : boundary_data) {
    if (static_cast<int>(d.size()) != n_nodes) throw std::invalid_argument("dirichlet_solve: ragged samples");
  }
  if (n_nodes < 8) throw std::invalid_argument("dirichlet_solve: need at least 8 samples per component");
  const int m = std::min(truncation, (n_nodes - 1) / 2);

  // E_n: data = E_0 + Re Σ_{n>=1} E_n e^{inθ}.
  auto fourier = [&](const std::vector<double>& data) {
    std::vector<cplx> e(m + 1);
    for (int n = 0; n <= m; ++n) {
      OrderedSum<cplx> s;
      for (int j = 0; j < n_nodes; ++j) s.add(data[j] * std::polar(1.0, -kTwoPi * n * j / n_nodes));
      e[n] = s.value() / static_cast<double>(n_nodes) * (n == 0 ? 1.0 : 2.0);
    }
    return e;
  };

  std::vector<cplx> coeffs(2 * m + 1, cplx{});
  double alpha = 0.0;
  const auto outer = fourier(boundary_data[0]);
  if (domain.is_disc()) {
    coeffs[m] = outer[0].real();
    for (int n = 1; n <= m; ++n) coeffs[m + n] = outer[n];
  } else {
    const double q = domain.inner_radius();
    const auto inner = fourier(boundary_data[1]);
    coeffs[m] = outer[0].real();
    alpha = (inner[0].real() - outer[0].real()) / std::log(q);
    double q_pow = 1.0;
    for (int n = 1; n <= m; ++n) {
      q_pow *= q;
      const double denom = 1.0 - q_pow * q_pow;
      const cplx c = (outer[n] - inner[n] * q_pow) / denom;
      const cplx e = (inner[n] * q_pow - outer[n] * q_pow * q_pow) / denom;
      coeffs[m + n] = c;
      coeffs[m - n] = std::conj(e);
    }
  }
  HarmonicFunctionRep u(alpha, std::move(coeffs));

  double misfit = 0.0;
  for (int c = 0; c < domain.component_count(); ++c) {
    const double radius = domain.component_radius(c);
    for (int j = 0; j < n_nodes; ++j) {
      const cplx z = std::polar(radius, kTwoPi * j / n_nodes);
      misfit = std::max(misfit, std::abs(u(z) - boundary_data[c][j]));
    }
  }
  if (misfit > 1e-6) {
    throw TruncationInsufficient("Dirichlet trace misfit " + std::to_string(misfit) + " exceeds 1e-6");
  }
  return u;
}

/// Convenience overload sampling g on the boundary trapezoid nodes.
inline HarmonicFunctionRep dirichlet_solve(const DomainSpec& domain, const std::function<double(cplx)>& g,
                                           int nodes_per_component, int truncation) {
  std::vector<std::vector<double>> data(domain.component_count());
  for (int c = 0; c < domain.component_count(); ++c) {
    for (int j = 0; j < nodes_per_component; ++j) {
      data[c].push_back(g(std::polar(domain.component_radius(c), kTwoPi * j / nodes_per_component)));
    }
  }
  return dirichlet_solve(domain, data, truncation);
}

/// A character of the annulus fundamental group, e^{2πiα} on the
/// counterclockwise generator. Trivial on the disc.
struct Character {
  double alpha = 0.0;  // in [0, 1)

  static double wrap(double a) {
    double r = a - std::floor(a);
    if (r >= 1.0) r -= 1.0;
    return r;
  }
  /// min over integers n of |α₁ - α₂ - n|, in [0, 1/2].
  static double distance(double a, double b) {
    const double d = wrap(a - b);
    return std::min(d, 1.0 - d);
  }
  double distance(const Character& other) const { return distance(alpha, other.alpha); }
};

/// (1/2π) ∮_{|z|=r} ∂h/∂r ds counterclockwise, where h′ = 2∂h/∂z, computed
/// with the trapezoid rule. This is the conjugate period of h divided by 2π.
inline double flux_exponent(const AnalyticEvaluator& derivative, double radius, int nodes = 1024) {
  OrderedSum<double> s;
  for (int j = 0; j < nodes; ++j) {
    const cplx dir = std::polar(1.0, kTwoPi * (j + 0.5) / nodes);
    s.add((derivative(radius * dir) * dir).real() * radius / nodes);
  }
  return s.value();
}

/// Radius of the circle used for periods: √q for harmonic functions; for a
/// Green function, the log-midpoint of the wider of the two gaps between
/// the boundary circles and the pole modulus.
inline double period_circle_radius(const DomainSpec& domain) { return std::sqrt(domain.inner_radius()); }

inline double period_circle_radius(const DomainSpec& domain, cplx pole) {
  const double q = domain.inner_radius();
  const double s = std::abs(pole);
  const double gap_in = std::log(s / q);
  const double gap_out = std::log(1.0 / s);
  return gap_in > gap_out ? std::sqrt(q * s) : std::sqrt(s);
}

inline Character character_exponent(const DomainSpec& domain, const HarmonicFunctionRep& h) {
  if (domain.is_disc()) return {};
  const double a = flux_exponent([&](cplx z) { return h.analytic_derivative(z); }, period_circle_radius(domain));
  return {Character::wrap(a)};
}

inline Character character_exponent(const DomainSpec& domain, const GreenFunctionRep& g) {
  if (domain.is_disc()) return {};
  const double a =
      flux_exponent([&](cplx z) { return g.analytic_derivative(z); }, period_circle_radius(domain, g.pole()));
  return {Character::wrap(a)};
}

inline AnalyticEvaluator pole_part_derivative(const GreenFunctionRep& g) {
  return [g](cplx z) { return g.analytic_derivative(z); };
}

inline AnalyticEvaluator harmonic_analytic_derivative(const HarmonicFunctionRep& u) {
  return [u](cplx z) { return u.analytic_derivative(z); };
}

/// (1/2πi) ∮_{|z-c|=r} f dz by the trapezoid rule.
inline cplx contour_residue(const AnalyticEvaluator& f, cplx center, double radius, int nodes = 512) {
  OrderedSum<cplx> s;
  for (int j = 0; j < nodes; ++j) {
    const cplx dir = std::polar(1.0, kTwoPi * (j + 0.5) / nodes);
    // dz = i r e^{iθ} dθ
    s.add(f(center + radius * dir) * cplx(0.0, 1.0) * radius * dir * (kTwoPi / nodes));
  }
  return s.value() / cplx(0.0, kTwoPi);
}

}  // namespace kernelgauge
