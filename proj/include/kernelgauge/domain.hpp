#pragma once

// Model domains (unit disc, concentric annulus q < |z| < 1) and their
// boundary and area quadrature rules.
//
// Boundary: trapezoid rule per circle, spectrally accurate for analytic
// periodic integrands.
//
// Area: a global polar grid about the origin plus a polar patch about z0
// whose rings shrink geometrically towards z0, so weights behaving like
// |z - z0|^{2β}, β > -1, are integrated accurately. The two pieces
// partition the domain exactly: global rays that cross the patch disc are
// cut at the patch circle, and the angular range they sweep is
// parametrized as θ = θ0 + θmax·sin(φ) so chord lengths stay smooth
// through the tangent rays. Every cell uses Gauss–Legendre nodes in its
// radial variable.
//
// The quadrature remembers its rays so it can be restricted to level sets
// {lo <= L(z) < hi}: each ray is cut at the crossings of L, located by
// bisection, and Gauss nodes are redistributed on the pieces. Level sets
// that are star-shaped about z0 get their own polar rule (star_region);
// rays from the origin graze such sets and lose accuracy at the tangents.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kernelgauge/errors.hpp"
#include "kernelgauge/numerics.hpp"

namespace kernelgauge {

enum class DomainKind { disc, annulus };

inline std::string to_string(DomainKind k) { return k == DomainKind::disc ? "disc" : "annulus"; }

/// Unit disc or the annulus {q < |z| < 1}. Component 0 is |z| = 1 with
/// outward normal +z/|z|; component 1 (annulus only) is |z| = q with
/// outward normal -z/|z|.
class DomainSpec {
 public:
  static DomainSpec disc() { return DomainSpec(DomainKind::disc, 0.0); }
  static DomainSpec annulus(double q) {
    if (!(q > 0.0 && q < 1.0)) {
      throw InvalidConfig("annulus inner radius q must lie in (0, 1), got " + std::to_string(q));
    }
    return DomainSpec(DomainKind::annulus, q);
  }

  DomainKind kind() const { return kind_; }
  bool is_disc() const { return kind_ == DomainKind::disc; }
  double inner_radius() const { return q_; }
  int component_count() const { return is_disc() ? 1 : 2; }
  double component_radius(int c) const { return c == 0 ? 1.0 : q_; }
  double normal_sign(int c) const { return c == 0 ? 1.0 : -1.0; }

  bool contains(cplx z) const {
    const double r = std::abs(z);
    return r < 1.0 && (is_disc() || r > q_);
  }
  double distance_to_boundary(cplx z) const {
    const double r = std::abs(z);
    return is_disc() ? 1.0 - r : std::min(1.0 - r, r - q_);
  }
  double area() const { return kPi * (1.0 - q_ * q_); }

 private:
  DomainSpec(DomainKind k, double q) : kind_(k), q_(q) {}
  DomainKind kind_;
  double q_;
};

struct BoundaryNode {
  cplx z;
  cplx normal;  // outward unit normal
  double weight;
  int component;
};

class BoundaryQuadrature {
 public:
  BoundaryQuadrature() = default;
  BoundaryQuadrature(std::vector<BoundaryNode> nodes, int per_component)
      : nodes_(std::move(nodes)), per_component_(per_component) {}

  const std::vector<BoundaryNode>& nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  int nodes_per_component() const { return per_component_; }

  /// Σ weight·f(node) in node order.
  template <typename F>
  auto integrate(F&& f) const {
    using R = std::decay_t<decltype(f(nodes_.front()))>;
    OrderedSum<R> s;
    for (const auto& n : nodes_) s.add(n.weight * f(n));
    return s.value();
  }

 private:
  std::vector<BoundaryNode> nodes_;
  int per_component_ = 0;
};

/// Equispaced trapezoid nodes θ_j = 2πj/N on every boundary circle.
inline BoundaryQuadrature boundary_quadrature(const DomainSpec& domain, int nodes_per_component) {
  if (nodes_per_component < 8) {
    throw std::invalid_argument("boundary_quadrature: need at least 8 nodes per component");
  }
  std::vector<BoundaryNode> nodes;
  nodes.reserve(static_cast<std::size_t>(nodes_per_component * domain.component_count()));
  for (int c = 0; c < domain.component_count(); ++c) {
    const double radius = domain.component_radius(c);
    const double w = kTwoPi * radius / nodes_per_component;
    for (int j = 0; j < nodes_per_component; ++j) {
      const cplx dir = std::polar(1.0, kTwoPi * j / nodes_per_component);
      nodes.push_back({radius * dir, domain.normal_sign(c) * dir, w, c});
    }
  }
  return BoundaryQuadrature(std::move(nodes), nodes_per_component);
}

enum class RadialMap { linear, logarithmic, power };

/// One radial ray piece {center + r·e^{iθ} : r_begin < r < r_end}.
struct RaySegment {
  cplx center;
  double theta = 0.0;
  double angular_weight = 0.0;
  double r_begin = 0.0;
  double r_end = 0.0;
  RadialMap map = RadialMap::linear;
  int panels = 1;
  double anchor = 1.0;  // r = anchor·v^m for the power map

  static constexpr double kPowerExponent = 4.0;

  cplx point(double r) const { return center + std::polar(r, theta); }

  double to_var(double r) const {
    switch (map) {
      case RadialMap::linear: return r;
      case RadialMap::logarithmic: return std::log(r);
      case RadialMap::power: return std::pow(r / anchor, 1.0 / kPowerExponent);
    }
    return r;
  }
  double from_var(double v) const {
    switch (map) {
      case RadialMap::linear: return v;
      case RadialMap::logarithmic: return std::exp(v);
      case RadialMap::power: return anchor * std::pow(v, kPowerExponent);
    }
    return v;
  }
  double jacobian(double v) const {
    switch (map) {
      case RadialMap::linear: return 1.0;
      case RadialMap::logarithmic: return std::exp(v);
      case RadialMap::power: return kPowerExponent * anchor * std::pow(v, kPowerExponent - 1.0);
    }
    return 1.0;
  }
};

struct AreaResolution {
  int radial_cells = 8;
  int angular_cells = 128;
  int gauss_points = 8;
  double patch_radius = -1.0;  // negative: half the distance from z0 to ∂D
  double grading = 0.7;
  int patch_rings = 24;
  int patch_angular = 64;
  int core_panels = 1;

  /// Twice as fine in every direction; the patch keeps its innermost
  /// radius and halves the ring ratio in log scale.
  AreaResolution doubled() const {
    AreaResolution r = *this;
    r.radial_cells *= 2;
    r.angular_cells *= 2;
    r.patch_angular *= 2;
    r.patch_rings *= 2;
    r.core_panels *= 2;
    r.grading = std::sqrt(grading);
    return r;
  }
};

class AreaQuadrature {
 public:
  AreaQuadrature() = default;
  AreaQuadrature(DomainSpec domain, int gauss_points) : domain_(domain), gauss_points_(gauss_points) {}

  const DomainSpec& domain() const { return domain_; }
  const std::vector<cplx>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<RaySegment>& segments() const { return segments_; }
  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }
  int gauss_points() const { return gauss_points_; }

  template <typename F>
  auto integrate(F&& f) const {
    using R = std::decay_t<decltype(f(cplx{}))>;
    OrderedSum<R> s;
    for (std::size_t i = 0; i < nodes_.size(); ++i) s.add(weights_[i] * f(nodes_[i]));
    return s.value();
  }

  void add_segment(const RaySegment& seg) {
    if (!(seg.r_end > seg.r_begin)) return;
    segments_.push_back(seg);
    append_nodes(seg, seg.to_var(seg.r_begin), seg.to_var(seg.r_end), seg.panels);
  }

  /// A free node, not attached to any ray; restricted() ignores it.
  void add_node(cplx z, double w) {
    nodes_.push_back(z);
    weights_.push_back(w);
  }

  /// Quadrature for {z : lo <= level(z) < hi}. NaN level values count as
  /// outside.
  AreaQuadrature restricted(const std::function<double(cplx)>& level, double lo, double hi) const {
    AreaQuadrature out(domain_, gauss_points_);
    auto inside = [&](const RaySegment& s, double v) {
      double r = s.from_var(v);
      if (r <= 0.0) r = 1e-14 * std::max(s.r_end, 1e-300);
      const double l = level(s.point(r));
      return l >= lo && l < hi;
    };
    for (const RaySegment& s : segments_) {
      const double v0 = s.to_var(s.r_begin);
      const double v1 = s.to_var(s.r_end);
      const int samples = 2 * s.panels * gauss_points_ + 1;
      std::vector<double> cuts{v0};
      std::vector<bool> states;
      bool prev_state = inside(s, v0);
      states.push_back(prev_state);
      double prev_v = v0;
      for (int i = 1; i < samples; ++i) {
        const double v = v0 + (v1 - v0) * i / (samples - 1);
        const bool st = inside(s, v);
        if (st != prev_state) {
          double a = prev_v;
          double b = v;
          for (int it = 0; it < 80 && b - a > 1e-16 * std::max(1.0, std::abs(a)); ++it) {
            const double m = 0.5 * (a + b);
            (inside(s, m) == prev_state ? a : b) = m;
          }
          cuts.push_back(0.5 * (a + b));
          states.push_back(st);
          prev_state = st;
        }
        prev_v = v;
      }
      cuts.push_back(v1);
      for (std::size_t piece = 0; piece + 1 < cuts.size(); ++piece) {
        if (!states[piece]) continue;
        const double va = cuts[piece];
        const double vb = cuts[piece + 1];
        if (!(vb > va)) continue;
        RaySegment clipped = s;
        clipped.r_begin = s.from_var(va);
        clipped.r_end = s.from_var(vb);
        clipped.panels = std::max(1, static_cast<int>(std::ceil(s.panels * (vb - va) / (v1 - v0))));
        out.segments_.push_back(clipped);
        out.append_nodes(clipped, va, vb, clipped.panels);
      }
    }
    return out;
  }

 private:
  void append_nodes(const RaySegment& seg, double va, double vb, int panels) {
    const GaussRule& g = gauss_legendre(gauss_points_);
    const double h = (vb - va) / panels;
    for (int p = 0; p < panels; ++p) {
      const double lo = va + p * h;
      for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        const double v = lo + 0.5 * h * (g.nodes[i] + 1.0);
        const double r = seg.from_var(v);
        nodes_.push_back(seg.point(r));
        weights_.push_back(seg.angular_weight * r * seg.jacobian(v) * 0.5 * h * g.weights[i]);
      }
    }
  }

  DomainSpec domain_ = DomainSpec::disc();
  int gauss_points_ = 8;
  std::vector<RaySegment> segments_;
  std::vector<cplx> nodes_;
  std::vector<double> weights_;
};

namespace detail {

// Distances along direction θ from the origin to the circle |z - c| = R:
// s·cosΔ ∓ sqrt(R² - s² sin²Δ), Δ = θ - arg c.
inline std::pair<double, double> patch_crossings(cplx c, double radius, double theta) {
  const double s = std::abs(c);
  const double delta = theta - std::arg(c);
  const double along = s * std::cos(delta);
  const double disc = std::max(0.0, radius * radius - s * s * std::sin(delta) * std::sin(delta));
  return {along - std::sqrt(disc), along + std::sqrt(disc)};
}

}  // namespace detail

/// Global polar grid plus graded patch at z0; see the file comment.
/// Throws PatchTooLarge when the patch would reach ∂D (which includes
/// enclosing the annulus hole).
inline AreaQuadrature area_quadrature(const DomainSpec& domain, cplx z0, const AreaResolution& res = {}) {
  if (!domain.contains(z0)) throw InvalidConfig("z0 must lie strictly inside the domain");
  if (!(res.grading > 0.0 && res.grading < 1.0)) {
    throw std::invalid_argument("area_quadrature: grading must lie in (0, 1)");
  }
  if (res.radial_cells < 1 || res.angular_cells < 4 || res.gauss_points < 1 || res.patch_rings < 0 ||
      res.patch_angular < 4 || res.core_panels < 1) {
    throw std::invalid_argument("area_quadrature: resolution counts out of range");
  }
  const double dist = domain.distance_to_boundary(z0);
  const double patch = res.patch_radius < 0.0 ? 0.5 * dist : res.patch_radius;
  if (patch >= dist) {
    throw PatchTooLarge("patch radius " + std::to_string(patch) + " reaches the boundary (distance " +
                        std::to_string(dist) + ")");
  }

  const int p = res.gauss_points;
  const double r_in = domain.inner_radius();
  const RadialMap global_map = domain.is_disc() ? RadialMap::linear : RadialMap::logarithmic;
  const double s = std::abs(z0);
  const bool centered = s == 0.0;

  AreaQuadrature quad(domain, p);

  auto global_ray = [&](double theta, double aw, double a, double b) {
    RaySegment seg;
    seg.center = 0.0;
    seg.theta = theta;
    seg.angular_weight = aw;
    seg.r_begin = a;
    seg.r_end = b;
    seg.map = global_map;
    seg.panels = res.radial_cells;
    quad.add_segment(seg);
  };

  if (patch > 0.0) {
    const int m = centered ? std::max(res.patch_angular, res.angular_cells) : res.patch_angular;
    for (int j = 0; j < m; ++j) {
      const double theta = kTwoPi * (j + 0.5) / m;
      double outer = patch;
      for (int ring = 0; ring < res.patch_rings; ++ring) {
        RaySegment seg;
        seg.center = z0;
        seg.theta = theta;
        seg.angular_weight = kTwoPi / m;
        seg.r_begin = outer * res.grading;
        seg.r_end = outer;
        seg.map = RadialMap::logarithmic;
        seg.panels = 1;
        quad.add_segment(seg);
        outer *= res.grading;
      }
      RaySegment core;
      core.center = z0;
      core.theta = theta;
      core.angular_weight = kTwoPi / m;
      core.r_begin = 0.0;
      core.r_end = outer;
      core.anchor = outer;
      core.map = RadialMap::power;
      core.panels = res.core_panels;
      quad.add_segment(core);
    }
  }

  if (patch == 0.0 || centered) {
    const int m = res.angular_cells;
    const double start = centered && patch > 0.0 ? patch : r_in;
    for (int j = 0; j < m; ++j) global_ray(kTwoPi * (j + 0.5) / m, kTwoPi / m, start, 1.0);
  } else if (patch >= s) {
    // Disc only: the patch contains the origin, every ray starts on its circle.
    const int m = res.angular_cells;
    for (int j = 0; j < m; ++j) {
      const double theta = kTwoPi * (j + 0.5) / m;
      global_ray(theta, kTwoPi / m, detail::patch_crossings(z0, patch, theta).second, 1.0);
    }
  } else {
    const GaussRule& g = gauss_legendre(p);
    const double theta0 = std::arg(z0);
    const double theta_max = std::asin(patch / s);
    const double outside_len = kTwoPi - 2.0 * theta_max;
    const int out_panels =
        std::max(2, static_cast<int>(std::ceil(1.5 * res.angular_cells * outside_len / kTwoPi / p)));
    const double h_out = outside_len / out_panels;
    for (int k = 0; k < out_panels; ++k) {
      for (int i = 0; i < p; ++i) {
        const double theta = theta0 + theta_max + h_out * (k + 0.5 * (g.nodes[i] + 1.0));
        global_ray(theta, 0.5 * h_out * g.weights[i], r_in, 1.0);
      }
    }
    const int sec_panels = std::max(
        2, static_cast<int>(std::ceil(0.5 * kPi * 1.5 * res.angular_cells * (2.0 * theta_max) / kTwoPi / p)) + 1);
    const double h_sec = kPi / sec_panels;
    for (int k = 0; k < sec_panels; ++k) {
      for (int i = 0; i < p; ++i) {
        const double phi = -0.5 * kPi + h_sec * (k + 0.5 * (g.nodes[i] + 1.0));
        const double theta = theta0 + theta_max * std::sin(phi);
        const double aw = 0.5 * h_sec * g.weights[i] * theta_max * std::cos(phi);
        const auto [r1, r2] = detail::patch_crossings(z0, patch, theta);
        global_ray(theta, aw, r_in, r1);
        global_ray(theta, aw, r2, 1.0);
      }
    }
  }
  return quad;
}

/// Overload with explicit cell counts, patch radius and grading.
inline AreaQuadrature area_quadrature(const DomainSpec& domain, cplx z0, int radial_cells, int angular_cells,
                                      double patch_radius, double grading) {
  AreaResolution res;
  res.radial_cells = radial_cells;
  res.angular_cells = angular_cells;
  res.patch_radius = patch_radius;
  res.grading = grading;
  return area_quadrature(domain, z0, res);
}

namespace detail {

/// Distance from c along e^{iθ} to the first boundary circle, and whether
/// that circle is the outer one.
inline std::pair<double, bool> exit_distance(const DomainSpec& d, cplx c, double theta) {
  const cplx dir = std::polar(1.0, theta);
  const double b = (std::conj(c) * dir).real();
  const double c2 = std::norm(c);
  double t = -b + std::sqrt(std::max(0.0, b * b - (c2 - 1.0)));
  bool outer = true;
  if (!d.is_disc()) {
    const double q = d.inner_radius();
    const double disc = b * b - (c2 - q * q);
    if (disc >= 0.0) {
      const double t_in = -b - std::sqrt(disc);
      if (t_in > 0.0 && t_in < t) {
        t = t_in;
        outer = false;
      }
    }
  }
  return {t, outer};
}

}  // namespace detail

/// Quadrature for {lo <= L(z) < hi} in polar coordinates about `center`,
/// valid when every ray from the center meets the set in one interval that
/// does not reach the annulus hole. Trapezoid in angle, Gauss–Legendre in
/// the radius; when the center belongs to the set the interval is graded
/// towards it like the patch of area_quadrature. Returns nothing when the
/// set is not of this form.
inline std::optional<AreaQuadrature> star_region(const DomainSpec& domain, cplx center,
                                                 const std::function<double(cplx)>& level, double lo, double hi,
                                                 const AreaResolution& res = {}, int samples = 257) {
  AreaQuadrature quad(domain, res.gauss_points);
  const int m = res.angular_cells;
  auto inside = [&](double theta, double r) {
    const double l = level(center + std::polar(r, theta));
    return l >= lo && l < hi;
  };
  for (int j = 0; j < m; ++j) {
    const double theta = kTwoPi * (j + 0.5) / m;
    const auto [exit, outer] = detail::exit_distance(domain, center, theta);
    // sample in sqrt(r) so the neighbourhood of the center is resolved
    auto radius = [&](int i) { return exit * (static_cast<double>(i) / (samples - 1)) * (static_cast<double>(i) / (samples - 1)); };
    std::vector<double> cuts;
    bool state = inside(theta, 1e-12 * exit);
    const bool starts_inside = state;
    double prev = radius(0);
    for (int i = 1; i < samples; ++i) {
      const double r = i == samples - 1 ? exit * (1.0 - 1e-12) : radius(i);
      const bool st = inside(theta, r);
      if (st != state) {
        double a = prev, b = r;
        for (int it = 0; it < 100 && b - a > 1e-15 * exit; ++it) {
          const double mid = 0.5 * (a + b);
          (inside(theta, mid) == state ? a : b) = mid;
        }
        cuts.push_back(0.5 * (a + b));
        state = st;
      }
      prev = r;
    }
    double r_begin = 0.0, r_end = 0.0;
    if (starts_inside) {
      if (cuts.size() > 1) return std::nullopt;
      r_end = cuts.empty() ? exit : cuts[0];
    } else {
      if (cuts.empty()) continue;
      if (cuts.size() > 2) return std::nullopt;
      r_begin = cuts[0];
      r_end = cuts.size() == 2 ? cuts[1] : exit;
    }
    if (r_end == exit && !outer) return std::nullopt;

    RaySegment seg;
    seg.center = center;
    seg.theta = theta;
    seg.angular_weight = kTwoPi / m;
    if (r_begin == 0.0) {
      double outer_r = r_end;
      for (int ring = 0; ring < res.patch_rings; ++ring) {
        seg.r_begin = outer_r * res.grading;
        seg.r_end = outer_r;
        seg.map = RadialMap::logarithmic;
        seg.panels = 1;
        quad.add_segment(seg);
        outer_r *= res.grading;
      }
      seg.r_begin = 0.0;
      seg.r_end = outer_r;
      seg.anchor = outer_r;
      seg.map = RadialMap::power;
      seg.panels = res.core_panels;
      quad.add_segment(seg);
    } else {
      seg.r_begin = r_begin;
      seg.r_end = r_end;
      seg.map = RadialMap::linear;
      seg.panels = res.radial_cells;
      quad.add_segment(seg);
    }
  }
  return quad;
}

}  // namespace kernelgauge
