// SPDX-FileCopyrightText: 2026 The gpamr authors
// SPDX-License-Identifier: Apache-2.0

#include "gpamr/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace gpamr {

BarComponent::BarComponent(const Vec2& a, const Vec2& b, double w, double size_var)
    : p0(a), p1(b), width(w), alpha(size_var) {
  if (!(w > 0.0)) throw std::invalid_argument("BarComponent: width must be positive");
  if (!(size_var >= 0.0 && size_var <= 1.0))
    throw std::invalid_argument("BarComponent: alpha must lie in [0,1]");
  if (a == b) throw std::invalid_argument("BarComponent: degenerate segment (p0 == p1)");
}

namespace {

// Closest-point parameter of x on segment [p0,p1], clamped to [0,1].
inline double segment_parameter(const Vec2& x, const BarComponent& bar) {
  const Vec2 e = bar.p1 - bar.p0;
  const double len2 = std::max(e.squaredNorm(), 1e-300);
  return std::clamp((x - bar.p0).dot(e) / len2, 0.0, 1.0);
}

}  // namespace

double signed_distance(const Vec2& x, const BarComponent& bar) {
  const double t = segment_parameter(x, bar);
  const Vec2 c = bar.p0 + t * (bar.p1 - bar.p0);
  return (x - c).norm() - 0.5 * bar.width;
}

Eigen::Matrix<double, 5, 1> signed_distance_gradient(const Vec2& x,
                                                     const BarComponent& bar) {
  const double t = segment_parameter(x, bar);
  const Vec2 e = bar.p1 - bar.p0;
  const Vec2 r = x - (bar.p0 + t * e);
  const double rn = r.norm();

  Vec2 u;
  if (rn > 1e-14) {
    u = r / rn;
  } else {
    // x on the medial segment: take the one-sided limit from the
    // segment-interior region (left normal of the segment direction).
    const double en = e.norm();
    u = en > 1e-14 ? Vec2(-e.y() / en, e.x() / en) : Vec2(1.0, 0.0);
  }

  Eigen::Matrix<double, 5, 1> g;
  g.segment<2>(0) = -(1.0 - t) * u;  // d/dp0
  g.segment<2>(2) = -t * u;          // d/dp1
  g(4) = -0.5;                       // d/dw
  return g;
}

double projected_density_2d(double d, double R) {
  if (d >= R) return 0.0;
  if (d <= -R) return 1.0;
  const double t = d / R;
  return (std::acos(t) - t * std::sqrt(1.0 - t * t)) / std::numbers::pi;
}

double projected_density_2d_derivative(double d, double R) {
  if (std::abs(d) >= R) return 0.0;
  return -2.0 * std::sqrt(R * R - d * d) / (std::numbers::pi * R * R);
}

double projected_density_3d(double d, double R) {
  if (d >= R) return 0.0;
  if (d <= -R) return 1.0;
  const double t = d / R;
  return 0.5 + 0.25 * t * t * t - 0.75 * t;
}

double projected_density_3d_derivative(double d, double R) {
  if (std::abs(d) >= R) return 0.0;
  const double t = d / R;
  return (0.75 * t * t - 0.75) / R;
}

double effective_density(double rho, double alpha, double s) {
  return std::pow(alpha, s) * rho;
}

namespace {

// Shared max-shifted accumulation; k*x up to ~100 would overflow otherwise.
inline double shifted_exp_sum(std::span<const double> values, double k, double m) {
  double sum = 0.0;
  for (double v : values) sum += std::exp(k * (v - m));
  return sum;
}

}  // namespace

double ks_max(std::span<const double> values, double k) {
  if (values.empty()) throw std::invalid_argument("ks_max: empty input (no components)");
  const double m = *std::max_element(values.begin(), values.end());
  const double sum = shifted_exp_sum(values, k, m);
  return m + std::log(sum / static_cast<double>(values.size())) / k;
}

double ks_max_upper(std::span<const double> values, double k) {
  if (values.empty())
    throw std::invalid_argument("ks_max_upper: empty input (no components)");
  const double m = *std::max_element(values.begin(), values.end());
  return m + std::log(shifted_exp_sum(values, k, m)) / k;
}

void ks_weights(std::span<const double> values, double k, std::span<double> w) {
  const double m = *std::max_element(values.begin(), values.end());
  double sum = 0.0;
  for (size_t i = 0; i < values.size(); ++i) {
    w[i] = std::exp(k * (values[i] - m));
    sum += w[i];
  }
  for (size_t i = 0; i < values.size(); ++i) w[i] /= sum;
}

double composite_density(const Vec2& x, std::span<const BarComponent> bars,
                         const ProjectionParams& params) {
  std::vector<double> rho_hat(bars.size());
  for (size_t i = 0; i < bars.size(); ++i) {
    const double d = signed_distance(x, bars[i]);
    rho_hat[i] = effective_density(projected_density_2d(d, params.radius),
                                   bars[i].alpha, params.simp_power);
  }
  return std::clamp(ks_max(rho_hat, params.ks_k), 0.0, 1.0);
}

void composite_density_gradient(const Vec2& x, std::span<const BarComponent> bars,
                                const ProjectionParams& params,
                                std::span<double> grad) {
  const size_t n = bars.size();
  const double s = params.simp_power;
  std::vector<double> d(n), rho(n), rho_hat(n), w(n);
  for (size_t i = 0; i < n; ++i) {
    d[i] = signed_distance(x, bars[i]);
    rho[i] = projected_density_2d(d[i], params.radius);
    rho_hat[i] = effective_density(rho[i], bars[i].alpha, s);
  }
  ks_weights(rho_hat, params.ks_k, w);

  for (size_t i = 0; i < n; ++i) {
    double* g = grad.data() + i * kVarsPerBar;
    const double alpha_s = std::pow(bars[i].alpha, s);
    const double drho_dd = projected_density_2d_derivative(d[i], params.radius);
    const double geom = w[i] * alpha_s * drho_dd;
    if (geom != 0.0) {
      const auto dd = signed_distance_gradient(x, bars[i]);
      for (int j = 0; j < 5; ++j) g[j] = geom * dd(j);
    } else {
      for (int j = 0; j < 5; ++j) g[j] = 0.0;
    }
    g[5] = rho[i] > 0.0 ? w[i] * s * std::pow(bars[i].alpha, s - 1.0) * rho[i] : 0.0;
  }
}

double ersatz_scale(double rho, double rho_min) {
  return rho_min + rho * (1.0 - rho_min);
}

}  // namespace gpamr
