#pragma once

// Closed forms and independent series for the disc and the annulus
// {q < |z| < 1}. Nothing here calls the solvers; selftest and the test
// suite compare against these.

#include <cmath>
#include <complex>

#include "kernelgauge/numerics.hpp"

namespace kernelgauge::oracle {

/// Prime function P(x) = (1 − x) ∏_{k>=1} (1 − q^{2k} x)(1 − q^{2k}/x).
inline cplx prime(cplx x, double q, int terms = 80) {
  cplx v = 1.0 - x;
  double qk = 1.0;
  for (int k = 1; k < terms; ++k) {
    qk *= q * q;
    if (qk < 1e-300) break;
    v *= (1.0 - qk * x) * (1.0 - qk / x);
  }
  return v;
}

/// log|P(z/a)| − log|a| − log|P(z ā)|, constant on each boundary circle.
inline double image_raw(cplx z, cplx a, double q) {
  return std::log(std::abs(prime(z / a, q))) - std::log(std::abs(a)) - std::log(std::abs(prime(z * std::conj(a), q)));
}

/// Annulus Green function by the image product, with a + b·log|z| removed
/// so that both boundary values vanish.
inline double annulus_green(cplx z, cplx a, double q) {
  const double outer = image_raw(1.0, a, q);
  const double inner = image_raw(q, a, q);
  return image_raw(z, a, q) - outer - (inner - outer) * std::log(std::abs(z)) / std::log(q);
}

/// lim_{z→a} G(z, a) − log|z − a| for the annulus.
inline double annulus_robin(cplx a, double q) {
  double log_c = 0.0;
  double qk = 1.0;
  for (int k = 1; k < 80; ++k) {
    qk *= q * q;
    log_c += std::log1p(-qk);
  }
  const double outer = image_raw(1.0, a, q);
  const double inner = image_raw(q, a, q);
  const double r = std::abs(a);
  return -2.0 * std::log(r) + 2.0 * log_c - std::log(std::abs(prime(r * r, q))) - outer -
         (inner - outer) * std::log(r) / std::log(q);
}

inline double disc_green(cplx z, cplx a) { return std::log(std::abs((z - a) / (1.0 - std::conj(a) * z))); }

/// Poisson kernel (1 − |a|²)/|ζ − a|² = ∂G/∂ν at ζ on the unit circle.
inline double disc_poisson(cplx zeta, cplx a) { return (1.0 - std::norm(a)) / std::norm(zeta - a); }

/// Unweighted Bergman kernel of the annulus on the diagonal,
/// Σ |z|^{2n}/‖zⁿ‖² with ‖zⁿ‖² = π(1 − q^{2n+2})/(n+1), n ≠ −1.
inline double annulus_bergman(cplx z, double q, int terms = 400) {
  const double r2 = std::norm(z);
  OrderedSum<double> s;
  s.add(1.0 / (r2 * 2.0 * kPi * std::log(1.0 / q)));
  const double inner = q * q / r2;
  for (int n = 0; n < terms; ++n) {
    const double d = kPi * (1.0 - std::pow(q, 2 * n + 2));
    s.add(std::pow(r2, n) * (n + 1) / d);
    // exponent −n − 2, rewritten in powers of q²/|z|² < 1
    s.add(std::pow(inner, n + 1) * (n + 1) / (r2 * d));
  }
  return s.value();
}

/// Szegő kernel for λ ≡ 1 on both circles: Σ |z|^{2n}/(1 + q^{2n+1}).
inline double annulus_szego_flat(cplx z, double q, int terms = 400) {
  const double r2 = std::norm(z);
  OrderedSum<double> s;
  const double inner = q * q / r2;
  for (int n = 0; n <= terms; ++n) s.add(std::pow(r2, n) / (1.0 + std::pow(q, 2 * n + 1)));
  for (int j = 1; j <= terms; ++j) s.add(std::pow(inner, j) / (q * (1.0 + std::pow(q, 2 * j - 1))));
  return s.value();
}

/// Disc Bergman and Szegő sections normalized to 1 at z₀.
inline cplx disc_bergman_section(cplx z, cplx z0) {
  const double d = 1.0 - std::norm(z0);
  return d * d / ((1.0 - std::conj(z0) * z) * (1.0 - std::conj(z0) * z));
}

inline cplx disc_szego_section(cplx z, cplx z0) { return (1.0 - std::norm(z0)) / (1.0 - std::conj(z0) * z); }

/// ∫_t^∞ e^{δs} e^{−s} ds.
inline double exp_delta_tail(double delta, double t) { return std::exp(-(1.0 - delta) * t) / (1.0 - delta); }

}  // namespace kernelgauge::oracle
