#pragma once

// Minimal L² integrals on sublevel sets {2ψ < −t}, the curve r = h(t) ↦ G,
// the equality-case extremal function F₀, and shell/boundary identities.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "kernelgauge/domain.hpp"
#include "kernelgauge/errors.hpp"
#include "kernelgauge/kernels.hpp"
#include "kernelgauge/numerics.hpp"
#include "kernelgauge/potential.hpp"
#include "kernelgauge/weights.hpp"

namespace kernelgauge {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct GSettings {
  AreaResolution area;
  int basis_n = 32;
  int boundary_nodes = 512;
};

/// F₀(z) = h′(z)·(z − z₀)^{k+1}·exp((k+1)·H(z) + W(z)), with H the primitive
/// of the regular part of h′ and W the primitive of 2∂u/∂z, both zero at z₀.
/// F₀^{(k)}(z₀)/k! = 1.
class ExtremalFunction {
 public:
  ExtremalFunction(GreenFunctionRep g, HarmonicFunctionRep u, int k)
      : g_(std::move(g)), u_(std::move(u)), k_(k) {
    const cplx z0 = g_.pole();
    h0_ = g_.regular_primitive(z0);
    w0_ = u_.primitive(z0);
  }

  int k() const { return k_; }
  cplx pole() const { return g_.pole(); }

  /// (k+1)·H(z) + W(z) on the principal branch.
  cplx exponent(cplx z) const {
    return static_cast<double>(k_ + 1) * (g_.regular_primitive(z) - h0_) + (u_.primitive(z) - w0_);
  }
  /// derivative of exponent()
  cplx exponent_derivative(cplx z) const {
    return static_cast<double>(k_ + 1) * g_.correction_derivative(z) + u_.analytic_derivative(z);
  }

  cplx operator()(cplx z) const {
    const cplx d = z - g_.pole();
    const cplx pole_factor = 1.0 + d * g_.correction_derivative(z);  // h′(z)(z − z₀)
    return pole_factor * ipow(d, k_) * std::exp(exponent(z));
  }

  double monodromy_defect = 0.0;
  double exponent_sum = 0.0;  // (k+1)α_G + α_u before reduction mod 1
  double branch_gap = 0.0;

 private:
  GreenFunctionRep g_;
  HarmonicFunctionRep u_;
  int k_;
  cplx h0_;
  cplx w0_;
};

namespace detail {

/// ∫ f(z) dz along z = c + r e^{iθ}, θ from a to b, Gauss–Legendre.
inline cplx arc_integral(const std::function<cplx(cplx)>& f, double r, double a, double b) {
  auto re = [&](double th) {
    const cplx z = std::polar(r, th);
    return (f(z) * cplx(0.0, 1.0) * z).real();
  };
  auto im = [&](double th) {
    const cplx z = std::polar(r, th);
    return (f(z) * cplx(0.0, 1.0) * z).imag();
  };
  return {integrate_gl(re, a, b, 16, 16), integrate_gl(im, a, b, 16, 16)};
}

inline bool equality_shape(const WeightConfig& c) {
  return c.psi.epsilon == 0.0 && std::abs(c.phi.a_green + 2.0 * c.psi.p0 - 2.0 * (c.k + 1)) < 1e-12;
}

}  // namespace detail

inline ExtremalFunction f0_construct(const WeightModel& model) {
  const WeightConfig& c = model.config();
  if (!detail::equality_shape(c)) {
    throw NotEqualityShape("F0 needs phi + 2 psi = 2(k+1) G + 2u with an unperturbed psi");
  }
  ExtremalFunction f(model.green_function(), c.phi.u, c.k);
  f.exponent_sum = (c.k + 1) * model.green_function().log_coefficient() + c.phi.u.log_coefficient();
  if (c.domain.is_disc()) return f;

  const double r = period_circle_radius(c.domain, c.z0);
  const auto deriv = [&f](cplx z) { return f.exponent_derivative(z); };
  OrderedSum<cplx> loop;
  constexpr int kLoopNodes = 1024;
  for (int j = 0; j < kLoopNodes; ++j) {
    const cplx z = std::polar(r, kTwoPi * j / kLoopNodes);
    loop.add(deriv(z) * cplx(0.0, 1.0) * z * (kTwoPi / kLoopNodes));
  }
  f.monodromy_defect = std::abs(std::exp(loop.value()) - 1.0);

  // Continue exp(exponent) from θ = 0 to θ = 3π/4 both ways round and
  // against the closed form.
  const double target = 0.75 * kPi;
  const cplx ccw = std::exp(detail::arc_integral(deriv, r, 0.0, target));
  const cplx cw = std::exp(detail::arc_integral(deriv, r, 0.0, target - kTwoPi));
  const cplx closed = std::exp(f.exponent(std::polar(r, target)) - f.exponent(cplx(r, 0.0)));
  const double scale = std::max(1.0, std::abs(ccw));
  if (std::abs(ccw - closed) > 1e-8 * scale) {
    throw BranchInconsistency("closed-form primitive disagrees with path integration");
  }
  f.branch_gap = std::abs(ccw - cw) / scale;
  if (f.monodromy_defect < 1e-8 && f.branch_gap > 1e-8) {
    throw BranchInconsistency("trivial monodromy but the two continuations differ");
  }
  return f;
}

namespace detail {

/// Critical value of G(·, z₀): none on the disc (returns 0); on the
/// annulus the saddle lies on the ray through −z₀.
inline double green_critical_value(const GreenFunctionRep& g) {
  if (g.domain().is_disc()) return 0.0;
  const double q = g.domain().inner_radius();
  const cplx dir = -g.pole() / std::abs(g.pole());
  auto f = [&](double r) { return g(r * dir); };
  constexpr int kSamples = 400;
  int best = 1;
  for (int i = 1; i < kSamples; ++i) {
    if (f(q + (1.0 - q) * i / kSamples) < f(q + (1.0 - q) * best / kSamples)) best = i;
  }
  double a = q + (1.0 - q) * (best - 1) / kSamples;
  double b = q + (1.0 - q) * (best + 1) / kSamples;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 100; ++it) {
    const double c = b - phi * (b - a);
    const double d = a + phi * (b - a);
    (f(c) < f(d) ? b : a) = f(c) < f(d) ? d : c;
  }
  return f(0.5 * (a + b));
}

/// w = Φ(z) = (z − z₀)·exp(H(z)) with |Φ| = e^{G}. Below the critical level
/// Φ maps each sublevel set of G one-to-one onto a disc. The log term of the
/// annulus correction is continued in arg z from `ref_arg`.
class GreenCoordinate {
 public:
  explicit GreenCoordinate(const GreenFunctionRep& g) : g_(g) {}

  struct Value {
    cplx w;
    cplx dw;  // Φ′(z)
    double arg;
  };

  /// Evaluated at z = z₀ + d; passing the offset keeps Φ accurate near z₀.
  Value operator()(cplx d, double ref_arg) const {
    const cplx z = g_.pole() + d;
    double arg = std::arg(z);
    cplx r;
    if (g_.domain().is_disc()) {
      r = g_.regular_primitive(z);
    } else {
      arg += kTwoPi * std::round((ref_arg - arg) / kTwoPi);
      const auto& c = g_.correction();
      r = c.log_coefficient() * cplx(std::log(std::abs(z)), arg) + c.laurent_sum(z);
    }
    const cplx e = std::exp(r);
    return {d * e, e * (1.0 + d * g_.correction_derivative(z)), arg};
  }

 private:
  const GreenFunctionRep& g_;
};

/// {lo <= 2ψ < hi} for ψ = p₀G through the coordinate w = Φ(z): the set is
/// e^{lo/2p₀} <= |w| < e^{hi/2p₀}, integrated in polar coordinates of w and
/// pulled back by Newton continuation along each ray, with weights divided
/// by |Φ′|². Applies below the critical level only.
struct ConformalRegion {
  AreaQuadrature quad;
  std::vector<cplx> w;
  std::vector<double> w_weights;  // weights in the w-plane
  double radius = 0.0;            // e^{hi/2p₀}
  double singular_radius = 0.0;   // nearest singularity of Φ⁻¹
};

inline double inverse_singular_radius(const WeightConfig& c, double crit) {
  if (c.domain.is_disc()) return std::abs(c.z0) > 0.0 ? 1.0 / std::abs(c.z0) : kInfinity;
  return std::exp(crit);
}

inline std::optional<ConformalRegion> conformal_region(const WeightModel& m, double lo, double hi,
                                                       const AreaResolution& res) {
  const WeightConfig& c = m.config();
  if (c.psi.epsilon != 0.0) return std::nullopt;
  const GreenFunctionRep& g = m.green_function();
  const double crit = green_critical_value(g);
  double g_hi = hi / (2.0 * c.psi.p0);
  if (c.domain.is_disc()) {
    g_hi = std::min(g_hi, 0.0);
  } else if (!(g_hi < crit)) {
    return std::nullopt;
  }
  const double rho_hi = std::exp(g_hi);
  const double rho_lo = std::isfinite(lo) ? std::exp(lo / (2.0 * c.psi.p0)) : 0.0;
  ConformalRegion out{AreaQuadrature(c.domain, res.gauss_points), {}, {}, rho_hi,
                      inverse_singular_radius(c, crit)};
  if (!(rho_hi > rho_lo)) return out;

  const GreenCoordinate phi(g);
  const double arg0 = std::arg(c.z0);
  const cplx dphi0 = phi(0.0, arg0).dw;
  const int m_ang = res.angular_cells;
  for (int j = 0; j < m_ang; ++j) {
    const double theta = kTwoPi * (j + 0.5) / m_ang;
    AreaQuadrature ray(DomainSpec::disc(), res.gauss_points);
    RaySegment seg;
    seg.center = 0.0;
    seg.theta = theta;
    seg.angular_weight = kTwoPi / m_ang;
    if (rho_lo == 0.0) {
      double outer = rho_hi;
      for (int ring = 0; ring < res.patch_rings; ++ring) {
        seg.r_begin = outer * res.grading;
        seg.r_end = outer;
        seg.map = RadialMap::logarithmic;
        seg.panels = 1;
        ray.add_segment(seg);
        outer *= res.grading;
      }
      seg.r_begin = 0.0;
      seg.r_end = outer;
      seg.anchor = outer;
      seg.map = RadialMap::power;
      seg.panels = res.core_panels;
      ray.add_segment(seg);
    } else {
      seg.r_begin = rho_lo;
      seg.r_end = rho_hi;
      seg.map = RadialMap::logarithmic;
      seg.panels = res.radial_cells;
      ray.add_segment(seg);
    }
    // (w, weight) in order of |w|; weight < 0 marks a continuation waypoint
    std::vector<std::pair<cplx, double>> path;
    if (rho_lo > 0.0) {
      for (int k = 1; k < 32; ++k) path.emplace_back(std::polar(rho_lo * k / 32.0, theta), -1.0);
    }
    std::vector<std::size_t> order(ray.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return std::abs(ray.nodes()[a]) < std::abs(ray.nodes()[b]); });
    for (std::size_t idx : order) path.emplace_back(ray.nodes()[idx], ray.weights()[idx]);

    cplx d = 0.0;
    cplx w_prev = 0.0;
    cplx dw_prev = dphi0;
    double arg = arg0;
    for (const auto& [w, weight] : path) {
      d += (w - w_prev) / dw_prev;
      GreenCoordinate::Value v{};
      for (int it = 0; it < 60; ++it) {
        if (!c.domain.contains(c.z0 + d)) return std::nullopt;
        v = phi(d, arg);
        const cplx step = (v.w - w) / v.dw;
        d -= step;
        if (std::abs(step) <= 1e-14 * std::abs(d)) break;
      }
      const cplx z = c.z0 + d;
      if (!c.domain.contains(z)) return std::nullopt;
      v = phi(d, arg);
      if (std::abs(v.w - w) > 1e-12 * std::abs(w)) return std::nullopt;
      arg = v.arg;
      if (std::abs(d) > 1e-4 && std::abs(g(z) - std::log(std::abs(w))) > 1e-9) return std::nullopt;
      w_prev = w;
      dw_prev = v.dw;
      if (weight < 0.0) continue;
      out.quad.add_node(z, weight / std::norm(v.dw));
      out.w.push_back(w);
      out.w_weights.push_back(weight);
    }
  }
  return out;
}

/// {lo <= 2ψ < hi}: through the Green coordinate when ψ = p₀G and the set
/// lies below the critical level, else polar about z₀ when the set is
/// star-shaped there, else the restriction of the full quadrature.
inline AreaQuadrature sublevel(const WeightModel& m, const AreaQuadrature& quad, const AreaResolution& res, double lo,
                               double hi) {
  if (auto conf = conformal_region(m, lo, hi, res)) return std::move(conf->quad);
  const auto level = [&m](cplx z) { return 2.0 * m.psi(z); };
  if (auto star = star_region(m.config().domain, m.config().z0, level, lo, hi, res)) return *star;
  return quad.restricted(level, lo, hi);
}

/// Taylor coefficients Φ_0..Φ_order at z₀ by a Cauchy integral.
inline std::vector<cplx> coordinate_taylor(const WeightModel& m, int order) {
  const GreenCoordinate phi(m.green_function());
  const cplx z0 = m.config().z0;
  const double r = 0.5 * m.config().domain.distance_to_boundary(z0);
  constexpr int kN = 64;
  std::vector<cplx> vals(kN);
  for (int j = 0; j < kN; ++j) vals[j] = phi(std::polar(r, kTwoPi * j / kN), std::arg(z0)).w;
  std::vector<cplx> out(order + 1);
  for (int i = 0; i <= order; ++i) {
    OrderedSum<cplx> acc;
    for (int j = 0; j < kN; ++j) acc.add(vals[j] * std::polar(1.0, -kTwoPi * i * j / kN));
    out[i] = acc.value() / (kN * std::pow(r, i));
  }
  return out;
}

/// G(t) on a sublevel set that is a disc in the coordinate w = Φ(z).
/// Candidates f = (g∘Φ)·Φ′ with g = Σ c_n wⁿ, so ∫|f|²ρ dA = ∫|g|²ρ dA_w.
inline std::optional<double> g_conformal(const WeightModel& m, const AreaResolution& res, double t, int basis_n) {
  const WeightConfig& c = m.config();
  if (c.psi.epsilon != 0.0) return std::nullopt;
  const double crit = green_critical_value(m.green_function());
  double g_hi = -t / (2.0 * c.psi.p0);
  if (c.domain.is_disc()) g_hi = std::min(g_hi, 0.0);
  const double ratio = std::exp(g_hi) / inverse_singular_radius(c, crit);
  const int k = c.k;
  int nb = basis_n;
  if (ratio > 0.0 && ratio < 1.0) nb = std::max(nb, static_cast<int>(std::ceil(std::log(1e-15) / (2.0 * std::log(ratio)))));
  nb = std::max(std::min(nb, 160), k + 1);
  AreaResolution r = res;
  r.angular_cells = std::max(res.angular_cells, 2 * nb + 32);
  const auto region = conformal_region(m, -kInfinity, -t, r);
  if (!region) return std::nullopt;
  if (region->w.empty()) throw EmptySublevel("no quadrature nodes with 2 psi < -" + std::to_string(t));

  const std::size_t rows = region->w.size();
  CMatrix A(rows, nb);
  for (std::size_t i = 0; i < rows; ++i) {
    const double sw = std::exp(0.5 * (std::log(region->w_weights[i]) + m.log_rho(region->quad.nodes()[i])));
    cplx p = sw;
    for (int n = 0; n < nb; ++n) {
      A(i, n) = p;
      p *= region->w[i];
      if (std::abs(p) < 1e-150) p = 0.0;  // keep subnormals out of the GEMM
    }
  }

  // [dʲ] Φⁿ Φ′ = (j+1)/(n+1) · [d^{j+1}] Φ^{n+1}, and Φ^{n+1} = d^{n+1} P^{n+1}
  const std::vector<cplx> taylor = coordinate_taylor(m, k + 1);
  std::vector<cplx> P(taylor.begin() + 1, taylor.end());
  std::vector<cplx> power(k + 1, cplx{});
  power[0] = 1.0;
  ConstraintSystem cs{CMatrix::Zero(k + 1, nb), CVector::Zero(k + 1)};
  cs.target(k) = 1.0;
  for (int n = 0; n <= k; ++n) {
    std::vector<cplx> next(k + 1, cplx{});
    for (int a = 0; a <= k; ++a) {
      for (int b = 0; a + b <= k; ++b) next[a + b] += power[a] * P[b];
    }
    power = next;  // P^{n+1}
    for (int j = n; j <= k; ++j) {
      cs.rows(j, n) = static_cast<double>(j + 1) / (n + 1) * power[j - n];
    }
  }
  CMatrix gram = CMatrix::Zero(nb, nb);
  gram.selfadjointView<Eigen::Lower>().rankUpdate(A.adjoint());
  gram = gram.selfadjointView<Eigen::Lower>();
  return constrained_min(HermitianMatrix(gram), cs).value;
}

inline double g_on(const WeightModel& m, const AreaQuadrature& full, const AreaResolution& res, double t,
                   int basis_n) {
  if (t > 0.0) {
    if (auto v = g_conformal(m, res, t, basis_n)) return *v;
  }
  const AreaQuadrature sub = sublevel(m, full, res, -kInfinity, -t);
  if (sub.empty()) throw EmptySublevel("no quadrature nodes with 2 psi < -" + std::to_string(t));
  const BasisDescriptor basis(m.config().domain, basis_n, m.config().z0, m.config().k);
  std::vector<double> sw(sub.size());
  for (std::size_t i = 0; i < sub.size(); ++i) {
    sw[i] = std::exp(0.5 * (std::log(sub.weights()[i]) + m.log_rho(sub.nodes()[i])));
  }
  const CMatrix A = sample_matrix(basis, sub.nodes(), sw);
  return constrained_min_sampled(A, basis.constraints()).value;
}

}  // namespace detail

/// G(t). Below the critical level of G with ψ = p₀G the sublevel set is a
/// disc in the Green coordinate and the minimum is taken over functions on
/// it; otherwise the Laurent basis of the domain is restricted to the set,
/// which gives an upper bound.
inline double g_of_t(const WeightModel& m, double t, const GSettings& s = {}) {
  if (t < 0.0) throw std::invalid_argument("g_of_t: t must be nonnegative");
  const auto quad = area_quadrature(m.config().domain, m.config().z0, s.area);
  return detail::g_on(m, quad, s.area, t, s.basis_n);
}

struct GCurve {
  std::vector<double> t;
  std::vector<double> g;
  std::vector<double> r;  // h(t)
  double linear_residual = 0.0;   // max |G(t) − G(0)h(t)/h(0)|
  double concavity_defect = 0.0;  // max violation of concavity in r
  double monotonicity_defect = 0.0;
};

inline GCurve g_curve(const WeightModel& m, const std::vector<double>& t_grid, const GSettings& s = {}) {
  if (t_grid.empty() || t_grid.front() != 0.0) throw std::invalid_argument("g_curve: grid must start at 0");
  for (std::size_t i = 1; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > t_grid[i - 1])) throw std::invalid_argument("g_curve: grid must increase");
  }
  const auto quad = area_quadrature(m.config().domain, m.config().z0, s.area);
  const CProfile& c = m.config().profile;
  GCurve out;
  for (double t : t_grid) {
    out.t.push_back(t);
    out.g.push_back(detail::g_on(m, quad, s.area, t, s.basis_n));
    out.r.push_back(c.tail(t));
  }
  const double g0 = out.g.front();
  const double h0 = out.r.front();
  for (std::size_t i = 0; i < out.t.size(); ++i) {
    out.linear_residual = std::max(out.linear_residual, std::abs(out.g[i] - g0 * out.r[i] / h0));
    if (i > 0) out.monotonicity_defect = std::max(out.monotonicity_defect, out.g[i] - out.g[i - 1]);
  }
  // r decreases along the grid; concavity in r: middle value above the chord.
  for (std::size_t i = 1; i + 1 < out.t.size(); ++i) {
    const double ra = out.r[i - 1], rb = out.r[i], rc = out.r[i + 1];
    const double chord = out.g[i - 1] + (out.g[i + 1] - out.g[i - 1]) * (rb - ra) / (rc - ra);
    out.concavity_defect = std::max(out.concavity_defect, chord - out.g[i]);
  }
  return out;
}

struct ShellCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double relative_gap = 0.0;
};

/// lhs = ∫_{−t₁ <= 2ψ < −t₂} |F₀|² e^{−φ} a(−2ψ),
/// rhs = (G(0)/I(c))·∫_{t₂}^{t₁} a(t) e^{−t} dt.
inline ShellCheck shell_identity_check(const WeightModel& m, const ExtremalFunction& f0,
                                       const std::function<double(double)>& a, double t1, double t2,
                                       const GSettings& s = {}) {
  if (!(t1 > t2) || t2 < 0.0) throw std::invalid_argument("shell_identity_check: need t1 > t2 >= 0");
  const auto quad = area_quadrature(m.config().domain, m.config().z0, s.area);
  const double g0 = detail::g_on(m, quad, s.area, 0.0, s.basis_n);
  const AreaQuadrature shell = detail::sublevel(m, quad, s.area, std::isfinite(t1) ? -t1 : -kInfinity, -t2);
  OrderedSum<double> acc;
  for (std::size_t i = 0; i < shell.size(); ++i) {
    const cplx z = shell.nodes()[i];
    const double ps = m.psi(z);
    acc.add(shell.weights()[i] * std::norm(f0(z)) * std::exp(-m.phi(z)) * a(-2.0 * ps));
  }
  ShellCheck out;
  out.lhs = acc.value();
  out.rhs = g0 / m.config().profile.total() * integrate_exp_weighted(a, t2, t1);
  out.relative_gap = std::abs(out.lhs - out.rhs) / std::max(std::abs(out.rhs), 1e-300);
  return out;
}

struct BoundaryLimit {
  std::vector<double> radii;
  std::vector<double> shell_ratio;
  double extrapolated = 0.0;
  double boundary_value = 0.0;
  double gap = 0.0;  // relative
};

/// Shell ratios ∫_{2ψ >= log r}|F|²ρ / ∫₀^{−log r} c(t)e^{−t}dt against
/// ½∮|F|² e^{−φ} (∂ψ/∂ν)^{-1} |dz|.
inline BoundaryLimit boundary_limit_check(const WeightModel& m, const std::function<cplx(cplx)>& F,
                                          const GSettings& s = {},
                                          std::vector<double> radii = {0.9, 0.95, 0.975, 0.99}) {
  const auto quad = area_quadrature(m.config().domain, m.config().z0, s.area);
  BoundaryLimit out;
  out.radii = radii;
  for (double r : radii) {
    const AreaQuadrature shell = detail::sublevel(m, quad, s.area, std::log(r), kInfinity);
    const double num = shell.integrate([&](cplx z) { return std::norm(F(z)) * m.rho(z); });
    out.shell_ratio.push_back(num / m.config().profile.partial_integral(0.0, -std::log(r)));
  }
  const auto bq = boundary_quadrature(m.config().domain, s.boundary_nodes);
  out.boundary_value =
      0.5 * bq.integrate([&](const BoundaryNode& n) { return std::norm(F(n.z)) * std::exp(-m.phi(n.z)) / m.dpsi_dnu(n); });
  const std::size_t n = out.shell_ratio.size();
  if (n >= 2) {
    const double e1 = 1.0 - radii[n - 2], e2 = 1.0 - radii[n - 1];
    const double v1 = out.shell_ratio[n - 2], v2 = out.shell_ratio[n - 1];
    out.extrapolated = v2 - e2 * (v1 - v2) / (e1 - e2);
  } else {
    out.extrapolated = out.shell_ratio.back();
  }
  out.gap = std::abs(out.extrapolated - out.boundary_value) / std::max(std::abs(out.boundary_value), 1e-300);
  return out;
}

}  // namespace kernelgauge
