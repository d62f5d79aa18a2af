// SPDX-FileCopyrightText: 2026 The gpamr authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

#include <span>
#include <vector>

namespace gpamr {

using Vec2 = Eigen::Vector2d;

/// Number of design variables per bar: [p0x, p0y, p1x, p1y, width, alpha].
inline constexpr int kVarsPerBar = 6;

/// A straight bar component: the offset region (stadium) of a medial line
/// segment from p0 to p1 with the given width, plus a size variable alpha
/// in [0,1] that lets the optimizer fade the component out entirely.
struct BarComponent {
  Vec2 p0;
  Vec2 p1;
  double width = 0.0;
  double alpha = 1.0;

  BarComponent() = default;
  BarComponent(const Vec2& a, const Vec2& b, double w, double size_var);
};

/// Parameters of the geometry projection. `radius` is the sampling-window
/// radius and is typically set per mesh cell; the remaining fields are
/// problem-wide.
struct ProjectionParams {
  double radius = 0.0;      // sampling-window radius R
  double simp_power = 3.0;  // penalization exponent s on the size variable
  double ks_k = 10.0;       // KS aggregation coefficient k
  double rho_min = 1e-4;    // ersatz stiffness floor

  ProjectionParams with_radius(double r) const {
    ProjectionParams p = *this;
    p.radius = r;
    return p;
  }
  ProjectionParams with_simp_power(double s) const {
    ProjectionParams p = *this;
    p.simp_power = s;
    return p;
  }
};

/// Exact Euclidean signed distance from x to the bar boundary: negative
/// inside, zero on the stadium boundary, positive outside.
double signed_distance(const Vec2& x, const BarComponent& bar);

/// Derivative of signed_distance with respect to [p0x, p0y, p1x, p1y, w].
/// At points where the closest feature is ambiguous (x on the medial
/// segment) the one-sided limit from the segment-interior region is used,
/// with the left normal of p1-p0 as the descent direction.
Eigen::Matrix<double, 5, 1> signed_distance_gradient(const Vec2& x,
                                                     const BarComponent& bar);

/// Area fraction of a radius-R disk cut by a straight boundary at signed
/// distance d (2D geometry projection). 0 for d>=R, 1 for d<=-R.
double projected_density_2d(double d, double R);
double projected_density_2d_derivative(double d, double R);

/// Volume fraction of a radius-R ball cut by a flat boundary at signed
/// distance d (3D spherical cap). 0 for d>=R, 1 for d<=-R.
double projected_density_3d(double d, double R);
double projected_density_3d_derivative(double d, double R);

/// Effective density: the projected density scaled by the penalized size
/// variable, alpha^s * rho.
double effective_density(double rho, double alpha, double s);

/// Lower-bound Kreisselmeier-Steinhauser approximation of max(values):
/// (1/k) ln((1/n) sum exp(k x_i)). Exact for uniform inputs; always
/// <= max(values) and >= max(values) - ln(n)/k. Throws on empty input.
double ks_max(std::span<const double> values, double k);

/// Upper-bound KS: (1/k) ln(sum exp(k x_i)) >= max(values).
double ks_max_upper(std::span<const double> values, double k);

/// d ks / d x_i for either KS variant (the 1/n factor does not affect the
/// weights). Weights are positive and sum to one.
void ks_weights(std::span<const double> values, double k, std::span<double> w);

/// Smooth composite density at x: KS union of all components' effective
/// densities, clamped to [0,1] against float drift.
double composite_density(const Vec2& x, std::span<const BarComponent> bars,
                         const ProjectionParams& params);

/// Chain-rule gradient of composite_density over the packed design vector,
/// kVarsPerBar entries per bar. `grad` must have size bars.size()*kVarsPerBar.
void composite_density_gradient(const Vec2& x, std::span<const BarComponent> bars,
                                const ProjectionParams& params,
                                std::span<double> grad);

/// Ersatz stiffness multiplier rho_min + rho*(1-rho_min).
double ersatz_scale(double rho, double rho_min);

}  // namespace gpamr
