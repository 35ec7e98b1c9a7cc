#pragma once

// The configuration triple (ψ, φ, c) and the densities it induces:
//   ρ = e^{-φ} c(-2ψ)            on the domain,
//   λ = e^{-φ} c(0) / (∂ψ/∂ν)    on the boundary.
// ψ = p₀·G(·, z₀) + ε·s with s a fixed smooth subharmonic function vanishing
// on ∂D, and φ = a_G·G(·, z₀) + 2u with u harmonic.

#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "kernelgauge/domain.hpp"
#include "kernelgauge/errors.hpp"
#include "kernelgauge/numerics.hpp"
#include "kernelgauge/potential.hpp"

namespace kernelgauge {

enum class ProfileKind { constant_one, exp_delta, poly };

inline std::string to_string(ProfileKind k) {
  switch (k) {
    case ProfileKind::constant_one: return "constant_one";
    case ProfileKind::exp_delta: return "exp_delta";
    case ProfileKind::poly: return "poly";
  }
  return "?";
}

struct CIntegrals {
  double c = 0.0;
  double h = 0.0;      // ∫_t^∞ c(s) e^{-s} ds
  double total = 0.0;  // h(0)
};

/// c(t) for one of three families:
///   constant_one  c = 1
///   exp_delta     c = e^{δt},   δ < 1
///   poly          c = (1+t)^m,  0 < m <= 1
class CProfile {
 public:
  static CProfile constant_one() { return CProfile(ProfileKind::constant_one, 0.0); }
  static CProfile exp_delta(double delta) {
    if (!(delta < 1.0) || !std::isfinite(delta)) {
      throw InvalidProfile("c-profile not integrable: exp_delta requires delta < 1, got " + fmt(delta));
    }
    return CProfile(ProfileKind::exp_delta, delta);
  }
  static CProfile poly(double m) {
    if (!(m > 0.0) || !std::isfinite(m)) throw InvalidProfile("poly profile requires m > 0, got " + fmt(m));
    if (m > 1.0) {
      throw InvalidProfile("c(t)e^{-t} not nonincreasing: poly profile requires m <= 1, got " + fmt(m));
    }
    return CProfile(ProfileKind::poly, m);
  }

  ProfileKind kind() const { return kind_; }
  double parameter() const { return param_; }

  double log_c(double t) const {
    switch (kind_) {
      case ProfileKind::constant_one: return 0.0;
      case ProfileKind::exp_delta: return param_ * t;
      case ProfileKind::poly: return param_ * std::log1p(t);
    }
    return 0.0;
  }
  double c(double t) const { return std::exp(log_c(t)); }

  double tail(double t) const {
    switch (kind_) {
      case ProfileKind::constant_one: return std::exp(-t);
      case ProfileKind::exp_delta: return std::exp((param_ - 1.0) * t) / (1.0 - param_);
      case ProfileKind::poly: return integrate_exp_weighted([this](double s) { return c(s); }, t, kInf);
    }
    return 0.0;
  }

  double total() const { return tail(0.0); }

  CIntegrals integrals(double t) const { return {c(t), tail(t), total()}; }

  /// c(t)e^{-t} on a 1000-point log-spaced grid of [1e-3, 1e3] (plus t = 0)
  /// must not increase. Returns the largest relative increase found.
  double monotonicity_defect() const {
    double prev = c(0.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const double t = std::pow(10.0, -3.0 + 6.0 * i / 999.0);
      const double v = std::exp(log_c(t) - t);
      if (v > prev) worst = std::max(worst, (v - prev) / std::max(prev, 1e-300));
      prev = v;
    }
    return worst;
  }

  /// ∫_a^b c(t) e^{-t} dt
  double partial_integral(double a, double b) const {
    if (!(b > a)) return 0.0;
    return tail(a) - (std::isfinite(b) ? tail(b) : 0.0);
  }

 private:
  static constexpr double kInf = std::numeric_limits<double>::infinity();
  CProfile(ProfileKind k, double p) : kind_(k), param_(p) {}
  static std::string fmt(double x) {
    std::ostringstream os;
    os << x;
    return os.str();
  }
  ProfileKind kind_;
  double param_;
};

inline CIntegrals c_integrals(const CProfile& profile, double t) {
  if (t < 0.0) throw std::invalid_argument("c_integrals: t must be nonnegative");
  return profile.integrals(t);
}

struct PsiSpec {
  double p0 = 1.0;
  double epsilon = 0.0;  // coefficient of the perturbation s
};

struct PhiSpec {
  double a_green = 0.0;
  HarmonicFunctionRep u;
};

struct WeightConfig {
  DomainSpec domain = DomainSpec::disc();
  cplx z0{};
  int k = 0;
  PsiSpec psi;
  PhiSpec phi;
  CProfile profile = CProfile::constant_one();
};

/// Smooth subharmonic s <= 0 vanishing on ∂D.
///   disc:    s = |z|² − 1
///   annulus: s = |z|² − 1 − A log|z|,  A = (q² − 1)/log q
class Perturbation {
 public:
  explicit Perturbation(const DomainSpec& d)
      : a_(d.is_disc() ? 0.0 : (d.inner_radius() * d.inner_radius() - 1.0) / std::log(d.inner_radius())) {}
  double operator()(cplx z) const {
    const double r2 = std::norm(z);
    return r2 - 1.0 - (a_ == 0.0 ? 0.0 : 0.5 * a_ * std::log(r2));
  }
  /// ∂s/∂ν for the outward normal ν.
  double normal_derivative(cplx z, cplx normal) const {
    const double r = std::abs(z);
    const double radial = 2.0 * r - a_ / r;
    return radial * (normal * std::conj(z) / r).real();
  }

 private:
  double a_;
};

/// A WeightConfig with its Green function solved once; every density
/// evaluation goes through here.
class WeightModel {
 public:
  explicit WeightModel(WeightConfig cfg)
      : cfg_(std::move(cfg)), green_(green(cfg_.domain, cfg_.z0)), pert_(cfg_.domain) {}

  const WeightConfig& config() const { return cfg_; }
  const GreenFunctionRep& green_function() const { return green_; }
  const Perturbation& perturbation() const { return pert_; }

  double green_at(cplx z) const { return green_(z); }
  double psi(cplx z) const {
    const double g = cfg_.psi.p0 * green_(z);
    return cfg_.psi.epsilon == 0.0 ? g : g + cfg_.psi.epsilon * pert_(z);
  }
  double phi(cplx z) const { return cfg_.phi.a_green * green_(z) + 2.0 * cfg_.phi.u(z); }

  /// log ρ(z), computed in log form so |z − z₀|^{β} factors stay accurate
  /// close to the pole.
  double log_rho(cplx z) const {
    if (z == cfg_.z0) return log_rho_at_pole();
    const double g = green_(z);
    const double ps = cfg_.psi.p0 * g + (cfg_.psi.epsilon == 0.0 ? 0.0 : cfg_.psi.epsilon * pert_(z));
    const double ph = cfg_.phi.a_green * g + 2.0 * cfg_.phi.u(z);
    return -ph + cfg_.profile.log_c(-2.0 * ps);
  }
  double rho(cplx z) const { return std::exp(log_rho(z)); }

  double dpsi_dnu(cplx zeta, cplx normal) const {
    double d = cfg_.psi.p0 * green_.normal_derivative(zeta, normal);
    if (cfg_.psi.epsilon != 0.0) d += cfg_.psi.epsilon * pert_.normal_derivative(zeta, normal);
    return d;
  }
  double dpsi_dnu(const BoundaryNode& n) const { return dpsi_dnu(n.z, n.normal); }

  double log_lambda(const BoundaryNode& n) const {
    return -phi(n.z) + cfg_.profile.log_c(0.0) - std::log(dpsi_dnu(n));
  }
  double lambda(const BoundaryNode& n) const { return std::exp(log_lambda(n)); }

  /// Exponent β of ρ ~ |z − z₀|^β near the pole (ignoring logarithmic
  /// factors from poly profiles).
  double pole_exponent() const {
    double beta = -cfg_.phi.a_green;
    if (cfg_.profile.kind() == ProfileKind::exp_delta) beta -= 2.0 * cfg_.profile.parameter() * cfg_.psi.p0;
    return beta;
  }

 private:
  double log_rho_at_pole() const {
    const double beta = pole_exponent();
    const bool log_growth = cfg_.profile.kind() == ProfileKind::poly;
    if (beta > 0.0) return -std::numeric_limits<double>::infinity();
    if (beta == 0.0 && !log_growth) {
      const double corr = green_.robin_constant();
      double v = -cfg_.phi.a_green * corr - 2.0 * cfg_.phi.u(cfg_.z0);
      if (cfg_.profile.kind() == ProfileKind::exp_delta) v += -2.0 * cfg_.profile.parameter() * cfg_.psi.p0 * corr;
      return v;
    }
    throw EvaluationAtPole("density is unbounded at z0");
  }

  WeightConfig cfg_;
  GreenFunctionRep green_;
  Perturbation pert_;
};

inline double rho_lambda_eval(const WeightModel& m, cplx z) { return m.rho(z); }
inline double rho_lambda_eval(const WeightModel& m, const BoundaryNode& n) { return m.lambda(n); }
inline double rho_lambda_eval(const WeightConfig& cfg, cplx z) { return WeightModel(cfg).rho(z); }
inline double rho_lambda_eval(const WeightConfig& cfg, const BoundaryNode& n) { return WeightModel(cfg).lambda(n); }

struct CheckResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  std::string detail;
};

struct ValidationSettings {
  int boundary_nodes = 256;
  AreaResolution area;
};

/// Runs the four admissibility checks. Failures are returned, not thrown.
inline std::vector<CheckResult> validate_config(const WeightConfig& cfg, const ValidationSettings& vs = {}) {
  std::vector<CheckResult> out;

  {
    const double defect = cfg.profile.monotonicity_defect();
    const double total = cfg.profile.total();
    const bool ok = defect == 0.0 && std::isfinite(total) && total > 0.0 && cfg.profile.c(0.0) == 1.0;
    out.push_back({"c_profile", ok, total,
                   ok ? "c(0)=1, c(t)e^-t nonincreasing, I(c) finite" : "c-profile not admissible"});
  }
  {
    const double lelong = cfg.phi.a_green + 2.0 * cfg.psi.p0;
    const double need = 2.0 * (cfg.k + 1);
    out.push_back({"lelong", lelong >= need - 1e-12, lelong,
                   "a_G + 2 p0 = " + std::to_string(lelong) + " vs 2(k+1) = " + std::to_string(need)});
  }

  std::optional<WeightModel> model;
  try {
    model.emplace(cfg);
  } catch (const Error& e) {
    out.push_back({"psi_boundary", false, 0.0, e.what()});
    out.push_back({"rho_positive", false, 0.0, e.what()});
    return out;
  }

  {
    const auto bq = boundary_quadrature(cfg.domain, vs.boundary_nodes);
    double trace = 0.0;
    double min_flux = std::numeric_limits<double>::infinity();
    for (const auto& n : bq.nodes()) {
      trace = std::max(trace, std::abs(model->psi(n.z)));
      min_flux = std::min(min_flux, model->dpsi_dnu(n));
    }
    const bool ok = trace <= 1e-8 && min_flux > 0.0;
    out.push_back({"psi_boundary", ok, min_flux,
                   "max |psi| on boundary " + std::to_string(trace) + ", min dpsi/dnu " + std::to_string(min_flux)});
  }
  {
    bool ok = true;
    double min_rho = std::numeric_limits<double>::infinity();
    try {
      const auto aq = area_quadrature(cfg.domain, cfg.z0, vs.area);
      for (const cplx z : aq.nodes()) {
        const double r = model->rho(z);
        if (!(r > 0.0) || !std::isfinite(r)) ok = false;
        min_rho = std::min(min_rho, r);
      }
    } catch (const Error& e) {
      ok = false;
    }
    out.push_back({"rho_positive", ok, min_rho, ok ? "rho > 0 at all area nodes" : "rho not positive/finite"});
  }
  return out;
}

inline bool all_passed(const std::vector<CheckResult>& checks) {
  for (const auto& c : checks) {
    if (!c.passed) return false;
  }
  return true;
}

}  // namespace kernelgauge
