// SPDX-FileCopyrightText: 2026 The gpamr authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <Eigen/Geometry>

#include <cmath>
#include <numbers>
#include <random>

#include "gpamr/design.hpp"
#include "gpamr/geometry.hpp"

using namespace gpamr;

namespace {

// Monte Carlo area fraction of a radius-R disk on the material side of a
// straight boundary at signed distance d (independent oracle for the 2D
// projection formula).
double mc_disk_fraction(double d, double R, int64_t samples, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-R, R);
  int64_t inside_disk = 0, inside_material = 0;
  while (inside_disk < samples) {
    const double x = u(rng), y = u(rng);
    if (x * x + y * y > R * R) continue;
    ++inside_disk;
    if (x >= d) ++inside_material;
  }
  return double(inside_material) / double(inside_disk);
}

// Same oracle in 3D: volume fraction of a ball cut by a plane.
double mc_ball_fraction(double d, double R, int64_t samples, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-R, R);
  int64_t inside_ball = 0, inside_material = 0;
  while (inside_ball < samples) {
    const double x = u(rng), y = u(rng), z = u(rng);
    if (x * x + y * y + z * z > R * R) continue;
    ++inside_ball;
    if (x >= d) ++inside_material;
  }
  return double(inside_material) / double(inside_ball);
}

// Brute-force distance to the bar boundary: densely sample the stadium
// outline (two offset lines plus the outward-facing endpoint semicircles)
// and take the minimum point distance.
double brute_force_boundary_distance(const Vec2& x, const BarComponent& bar, int n) {
  const Vec2 e = bar.p1 - bar.p0;
  const Vec2 t = e.normalized();
  const Vec2 nrm(-t.y(), t.x());
  const double r = 0.5 * bar.width;

  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= n; ++i) {
    const double s = double(i) / n;
    const Vec2 c = bar.p0 + s * e;
    best = std::min(best, (x - (c + r * nrm)).norm());
    best = std::min(best, (x - (c - r * nrm)).norm());
  }
  for (int i = 0; i <= n; ++i) {
    const double a = 2.0 * std::numbers::pi * double(i) / n;
    const Vec2 ring = r * std::cos(a) * t + r * std::sin(a) * nrm;
    // The interior-facing half of each endpoint circle is inside the
    // stadium, not on its boundary.
    if (ring.dot(t) <= 0.0) best = std::min(best, (x - (bar.p0 + ring)).norm());
    if (ring.dot(t) >= 0.0) best = std::min(best, (x - (bar.p1 + ring)).norm());
  }
  return best;
}

std::vector<BarComponent> random_bars(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> pos(0.0, 10.0);
  std::uniform_real_distribution<double> wid(0.4, 2.0);
  std::uniform_real_distribution<double> alp(0.05, 1.0);
  std::vector<BarComponent> bars;
  while (static_cast<int>(bars.size()) < n) {
    const Vec2 a(pos(rng), pos(rng)), b(pos(rng), pos(rng));
    if ((a - b).norm() < 1.0) continue;
    bars.emplace_back(a, b, wid(rng), alp(rng));
  }
  return bars;
}

}  // namespace

TEST_SUITE_BEGIN("geometry");

TEST_CASE("bar construction rejects invalid components") {
  CHECK_THROWS(BarComponent({0, 0}, {0, 0}, 1.0, 0.5));
  CHECK_THROWS(BarComponent({0, 0}, {1, 0}, 0.0, 0.5));
  CHECK_THROWS(BarComponent({0, 0}, {1, 0}, 1.0, 1.5));
  CHECK_THROWS(BarComponent({0, 0}, {1, 0}, 1.0, -0.1));
}

TEST_CASE("signed distance basics") {
  const BarComponent bar({0, 0}, {4, 0}, 2.0, 1.0);
  CHECK(signed_distance({2, 0}, bar) == doctest::Approx(-1.0));  // medial axis
  CHECK(signed_distance({2, 1}, bar) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(signed_distance({2, 3}, bar) == doctest::Approx(2.0));
  CHECK(signed_distance({6, 0}, bar) == doctest::Approx(1.0));    // beyond the endpoint
  CHECK(signed_distance({-1, -1}, bar) == doctest::Approx(std::sqrt(2.0) - 1.0));
}

TEST_CASE("signed distance matches a brute-force boundary oracle") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> pos(-2.0, 8.0);
  const BarComponent bar({1, 2}, {5, 4}, 1.6, 1.0);
  for (int i = 0; i < 50; ++i) {
    const Vec2 x(pos(rng), pos(rng));
    const double d = signed_distance(x, bar);
    const double brute = brute_force_boundary_distance(x, bar, 20000);
    CHECK(std::abs(d) == doctest::Approx(brute).epsilon(1e-6));
  }
}

TEST_CASE("2d projected density closed form") {
  CHECK(projected_density_2d(0.0, 1.0) == doctest::Approx(0.5));
  CHECK(projected_density_2d(1.0, 1.0) == 0.0);
  CHECK(projected_density_2d(-1.0, 1.0) == 1.0);
  CHECK(projected_density_2d(2.0, 1.0) == 0.0);
  CHECK(projected_density_2d(-2.0, 1.0) == 1.0);
  // Monte Carlo circle-segment oracle at d = R/2.
  const double mc = mc_disk_fraction(0.5, 1.0, 10'000'000, 12345);
  CHECK(projected_density_2d(0.5, 1.0) == doctest::Approx(mc).epsilon(1e-3));
  CHECK(projected_density_2d(0.5, 1.0) == doctest::Approx(0.19550).epsilon(1e-4));
}

TEST_CASE("3d projected density closed form") {
  CHECK(projected_density_3d(0.0, 1.0) == doctest::Approx(0.5));
  CHECK(projected_density_3d(-1.0, 1.0) == 1.0);
  CHECK(projected_density_3d(1.0, 1.0) == 0.0);
  CHECK(projected_density_3d(0.5, 1.0) == doctest::Approx(0.15625));
  const double mc = mc_ball_fraction(0.5, 1.0, 4'000'000, 999);
  CHECK(projected_density_3d(0.5, 1.0) == doctest::Approx(mc).epsilon(2e-3));
}

TEST_CASE("projected densities are continuous at the window edges") {
  for (double R : {0.3, 1.0, 7.5}) {
    const double eps = 1e-9 * R;
    CHECK(std::abs(projected_density_2d(R - eps, R) - projected_density_2d(R, R)) < 1e-12);
    CHECK(std::abs(projected_density_2d(-R + eps, R) - projected_density_2d(-R, R)) < 1e-12);
    CHECK(std::abs(projected_density_3d(R - eps, R) - projected_density_3d(R, R)) < 1e-12);
    CHECK(std::abs(projected_density_3d(-R + eps, R) - projected_density_3d(-R, R)) < 1e-12);
  }
}

TEST_CASE("projected densities are monotone nonincreasing in d") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> dd(-2.0, 2.0);
  for (int i = 0; i < 10'000; ++i) {
    double d1 = dd(rng), d2 = dd(rng);
    if (d1 > d2) std::swap(d1, d2);
    CHECK(projected_density_2d(d1, 1.0) >= projected_density_2d(d2, 1.0));
    CHECK(projected_density_3d(d1, 1.0) >= projected_density_3d(d2, 1.0));
  }
}

TEST_CASE("projection derivatives match finite differences") {
  CHECK(projected_density_2d_derivative(0.0, 1.0) ==
        doctest::Approx(-2.0 / std::numbers::pi));
  for (double d : {-0.9, -0.4, 0.0, 0.3, 0.85}) {
    const double h = 1e-6;
    const double fd2 = (projected_density_2d(d + h, 1.0) - projected_density_2d(d - h, 1.0)) / (2 * h);
    const double fd3 = (projected_density_3d(d + h, 1.0) - projected_density_3d(d - h, 1.0)) / (2 * h);
    CHECK(projected_density_2d_derivative(d, 1.0) == doctest::Approx(fd2).epsilon(1e-6));
    CHECK(projected_density_3d_derivative(d, 1.0) == doctest::Approx(fd3).epsilon(1e-6));
  }
}

TEST_CASE("effective density") {
  CHECK(effective_density(1.0, 0.0, 3.0) == 0.0);
  CHECK(effective_density(0.5, 1.0, 3.0) == 0.5);
  CHECK(effective_density(1.0, 0.7, 3.0) == doctest::Approx(0.343));
}

TEST_CASE("ks_max basics and bounds") {
  CHECK_THROWS(ks_max({}, 10.0));
  const double vals1[] = {0.42};
  CHECK(ks_max(vals1, 10.0) == doctest::Approx(0.42).epsilon(1e-14));
  const double uniform[] = {0.7, 0.7, 0.7, 0.7};
  CHECK(ks_max(uniform, 10.0) == doctest::Approx(0.7).epsilon(1e-13));
  // direct high-precision evaluation of (1/10) ln((e^10+1)/2)
  const double pair[] = {1.0, 0.0};
  CHECK(ks_max(pair, 10.0) == doctest::Approx(0.1 * std::log((std::exp(10.0) + 1.0) / 2.0))
                                  .epsilon(1e-14));
  CHECK(ks_max(pair, 10.0) == doctest::Approx(0.93069).epsilon(1e-4));

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> len(1, 12);
  std::uniform_real_distribution<double> kk(1.0, 100.0);
  for (int trial = 0; trial < 10'000; ++trial) {
    std::vector<double> v(static_cast<size_t>(len(rng)));
    for (auto& x : v) x = u(rng);
    const double k = kk(rng);
    const double ks = ks_max(v, k);
    const double mx = *std::max_element(v.begin(), v.end());
    CHECK(ks <= mx + 1e-12);
    CHECK(ks >= mx - std::log(double(v.size())) / k - 1e-12);
    const double ku = ks_max_upper(v, k);
    CHECK(ku >= mx - 1e-12);
    CHECK(ku <= mx + std::log(double(v.size())) / k + 1e-12);
  }
}

TEST_CASE("ks_max is numerically stable for large k") {
  const double vals[] = {1.0, 0.3, 0.0};
  const double v = ks_max(vals, 100.0);
  CHECK(std::isfinite(v));
  CHECK(v == doctest::Approx(1.0 - std::log(3.0) / 100.0).epsilon(1e-2));
}

TEST_CASE("composite density scenarios") {
  ProjectionParams p;
  p.radius = 0.5;
  p.simp_power = 3.0;
  p.ks_k = 10.0;

  const BarComponent bar({0, 0}, {10, 0}, 4.0, 1.0);
  const std::vector<BarComponent> single{bar};
  CHECK(composite_density({5, 0}, single, p) == doctest::Approx(1.0));

  const std::vector<BarComponent> twin{bar, bar};
  CHECK(composite_density({5, 0}, twin, p) == doctest::Approx(1.0).epsilon(1e-13));

  // x deep inside A only; B far away: reduces to ks_max([1,0], 10).
  const BarComponent far({0, 100}, {10, 100}, 4.0, 1.0);
  const std::vector<BarComponent> ab{bar, far};
  CHECK(composite_density({5, 0}, ab, p) == doctest::Approx(0.93069).epsilon(1e-4));
}

TEST_CASE("composite density is rigid-motion equivariant") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ProjectionParams p;
  p.radius = 0.8;
  for (int trial = 0; trial < 40; ++trial) {
    const auto bars = random_bars(rng, 3);
    const Vec2 x(5.0 + u(rng), 5.0 + u(rng));
    const double angle = 3.0 * u(rng);
    const Vec2 shift(10.0 * u(rng), 10.0 * u(rng));
    Eigen::Rotation2D<double> rot(angle);
    std::vector<BarComponent> moved;
    for (const auto& b : bars)
      moved.emplace_back(rot * b.p0 + shift, rot * b.p1 + shift, b.width, b.alpha);
    const double before = composite_density(x, bars, p);
    const double after = composite_density(rot * x + shift, moved, p);
    CHECK(before == doctest::Approx(after).epsilon(1e-12));
  }
}

TEST_CASE("composite density gradient matches central finite differences") {
  std::mt19937_64 rng(137);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  ProjectionParams p;
  p.radius = 1.1;
  p.simp_power = 3.0;
  p.ks_k = 10.0;

  int checked = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const auto bars = random_bars(rng, 3);
    const Vec2 x(u(rng), u(rng));
    Eigen::VectorXd z = pack_design(bars);
    std::vector<double> grad(static_cast<size_t>(z.size()));
    composite_density_gradient(x, bars, p, grad);

    for (Eigen::Index j = 0; j < z.size(); ++j) {
      const double h = 1e-6 * std::max(1.0, std::abs(z(j)));
      Eigen::VectorXd zp = z, zm = z;
      zp(j) += h;
      zm(j) -= h;
      const double fp = composite_density(x, unpack_design(zp), p);
      const double fm = composite_density(x, unpack_design(zm), p);
      const double fd = (fp - fm) / (2 * h);
      const double denom = std::max({std::abs(fd), std::abs(grad[size_t(j)]), 1e-4});
      CHECK(std::abs(fd - grad[size_t(j)]) / denom <= 1e-6);
      ++checked;
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("gradient is zero when every bar is out of range") {
  ProjectionParams p;
  p.radius = 0.5;
  const std::vector<BarComponent> bars{BarComponent({0, 0}, {1, 0}, 0.5, 0.8),
                                       BarComponent({3, 3}, {4, 3}, 0.5, 0.3)};
  std::vector<double> grad(bars.size() * kVarsPerBar, 1.0);
  composite_density_gradient({10, 10}, bars, p, grad);
  for (double g : grad) CHECK(g == 0.0);
}

TEST_CASE("ersatz scale") {
  CHECK(ersatz_scale(0.0, 1e-4) == doctest::Approx(1e-4));
  CHECK(ersatz_scale(1.0, 1e-4) == doctest::Approx(1.0));
  CHECK(ersatz_scale(0.5, 1e-4) == doctest::Approx(0.50005));
}

TEST_CASE("design scaling round trip") {
  auto bounds = DesignBounds::for_bars(3, {0, 0}, {20, 5}, 0.2, 2.0);
  DesignScaling scaling(bounds);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::VectorXd z_hat(scaling.size());
  for (Eigen::Index i = 0; i < z_hat.size(); ++i) z_hat(i) = u(rng);
  const Eigen::VectorXd z = scaling.unscale(z_hat);
  CHECK((scaling.scale(z) - z_hat).lpNorm<Eigen::Infinity>() < 1e-14);
  CHECK((scaling.unscale(scaling.scale(z)) - z).lpNorm<Eigen::Infinity>() < 1e-12);

  CHECK(scaling.scale(bounds.lower).lpNorm<Eigen::Infinity>() == doctest::Approx(0.0));
  CHECK((scaling.scale(bounds.upper).array() - 1.0).matrix().lpNorm<Eigen::Infinity>() ==
        doctest::Approx(0.0));

  DesignBounds bad = bounds;
  bad.upper(0) = bad.lower(0);
  CHECK_THROWS(DesignScaling(bad));
}

TEST_SUITE_END();
