// SPDX-FileCopyrightText: 2026 The gpamr authors
// SPDX-License-Identifier: Apache-2.0

#include "gpamr/responses.hpp"

#include <algorithm>
#include <cmath>

#include "gpamr/parallel.hpp"

namespace gpamr {

std::pair<double, Eigen::VectorXd> volume_fraction(const QuadMesh& mesh,
                                                   std::span<const BarComponent> bars,
                                                   const ProjectionParams& params,
                                                   int threads) {
  const auto n_vars = static_cast<Eigen::Index>(bars.size()) * kVarsPerBar;
  const ProjectionParams pv = params.with_simp_power(1.0);
  const double area_total = mesh.active_area();
  const int n = mesh.n_active();

  const int n_chunks = std::max(1, std::min(threads, std::max(n, 1)));
  std::vector<double> value_parts(static_cast<size_t>(n_chunks), 0.0);
  std::vector<Eigen::VectorXd> grad_parts(static_cast<size_t>(n_chunks),
                                          Eigen::VectorXd::Zero(n_vars));
  parallel_chunks(n, n_chunks, [&](int chunk, int begin, int end) {
    std::vector<double> g(static_cast<size_t>(n_vars));
    for (int a = begin; a < end; ++a) {
      const int id = mesh.active()[static_cast<size_t>(a)];
      const double h = mesh.cell_size(id);
      const double area = h * h;
      const auto p = pv.with_radius(circumradius(h));
      const Vec2 c = mesh.centroid(id);
      value_parts[static_cast<size_t>(chunk)] += area * composite_density(c, bars, p);
      composite_density_gradient(c, bars, p, g);
      for (Eigen::Index j = 0; j < n_vars; ++j)
        grad_parts[static_cast<size_t>(chunk)](j) += area * g[static_cast<size_t>(j)];
    }
  });

  double value = 0.0;
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(n_vars);
  for (int t = 0; t < n_chunks; ++t) {
    value += value_parts[static_cast<size_t>(t)];
    grad += grad_parts[static_cast<size_t>(t)];
  }
  return {value / area_total, grad / area_total};
}

Eigen::VectorXd compliance_gradient(const FemSystem& fem, const FemSolution& sol,
                                    std::span<const BarComponent> bars,
                                    const ProjectionParams& params, int threads) {
  const QuadMesh& mesh = fem.mesh();
  const auto n_vars = static_cast<Eigen::Index>(bars.size()) * kVarsPerBar;
  const int n = mesh.n_active();
  const double dscale = 1.0 - params.rho_min;

  const int n_chunks = std::max(1, std::min(threads, std::max(n, 1)));
  std::vector<Eigen::VectorXd> grad_parts(static_cast<size_t>(n_chunks),
                                          Eigen::VectorXd::Zero(n_vars));
  parallel_chunks(n, n_chunks, [&](int chunk, int begin, int end) {
    std::vector<double> g(static_cast<size_t>(n_vars));
    for (int a = begin; a < end; ++a) {
      const int id = mesh.active()[static_cast<size_t>(a)];
      const auto ue = fem.element_displacement(a, sol.u);
      const double energy = ue.dot(fem.unit_stiffness() * ue);
      if (energy == 0.0) continue;
      const auto p = params.with_radius(circumradius(mesh.cell_size(id)));
      composite_density_gradient(mesh.centroid(id), bars, p, g);
      const double coeff = -dscale * energy;
      for (Eigen::Index j = 0; j < n_vars; ++j)
        grad_parts[static_cast<size_t>(chunk)](j) += coeff * g[static_cast<size_t>(j)];
    }
  });

  Eigen::VectorXd grad = Eigen::VectorXd::Zero(n_vars);
  for (const auto& part : grad_parts) grad += part;
  return grad;
}

StressResponse stress_response(const FemSystem& fem, const FemSolution& sol,
                               const DensityField& field,
                               std::span<const BarComponent> bars,
                               const ProjectionParams& params,
                               const StressParams& stress, int threads) {
  const QuadMesh& mesh = fem.mesh();
  const int n = mesh.n_active();
  const auto n_vars = static_cast<Eigen::Index>(bars.size()) * kVarsPerBar;
  const double q = stress.relax_exponent;
  const Eigen::Matrix3d D = fem.material().elasticity();

  StressResponse out;
  out.relaxed.assign(static_cast<size_t>(n), 0.0);
  std::vector<double> ratio(static_cast<size_t>(n), 0.0);
  for (int a = 0; a < n; ++a) {
    const double rho = field.rho[static_cast<size_t>(a)];
    out.relaxed[static_cast<size_t>(a)] =
        std::pow(rho, q) * sol.von_mises[static_cast<size_t>(a)];
    ratio[static_cast<size_t>(a)] = out.relaxed[static_cast<size_t>(a)] / stress.limit;
  }
  out.max_relaxed = *std::max_element(out.relaxed.begin(), out.relaxed.end());
  out.constraint = ks_max_upper(ratio, stress.ks_k) - 1.0;

  std::vector<double> w(static_cast<size_t>(n));
  ks_weights(ratio, stress.ks_k, w);

  // Explicit density term plus assembly of the adjoint right-hand side
  // dg/du (both vanish where rho or vm is exactly zero, matching the
  // zero density gradient there).
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(n_vars);
  Eigen::VectorXd dg_du = Eigen::VectorXd::Zero(sol.u.size());
  std::vector<double> g(static_cast<size_t>(n_vars));
  // von Mises quadratic form vm^2 = sigma^T M sigma; the off-plane stress
  // of the plane-strain case folds into the coefficient c.
  const double nu = fem.material().poisson_ratio;
  const double c = fem.material().plane_stress ? 0.0 : nu * nu - nu;
  Eigen::Matrix3d M;
  M << 1.0 + c, c - 0.5, 0.0, c - 0.5, 1.0 + c, 0.0, 0.0, 0.0, 3.0;
  for (int a = 0; a < n; ++a) {
    const double rho = field.rho[static_cast<size_t>(a)];
    const double vm = sol.von_mises[static_cast<size_t>(a)];
    if (rho <= 0.0) continue;
    const int id = mesh.active()[static_cast<size_t>(a)];
    const auto p = params.with_radius(circumradius(mesh.cell_size(id)));
    const double expl = w[static_cast<size_t>(a)] * q * std::pow(rho, q - 1.0) * vm /
                        stress.limit;
    if (expl != 0.0) {
      composite_density_gradient(mesh.centroid(id), bars, p, g);
      for (Eigen::Index j = 0; j < n_vars; ++j)
        grad(j) += expl * g[static_cast<size_t>(j)];
    }
    if (vm > 1e-300) {
      const auto B = centroid_strain_matrix(mesh.cell_size(id));
      const auto ue = fem.element_displacement(a, sol.u);
      const Eigen::Vector3d sigma = D * (B * ue);
      const Eigen::Matrix<double, 8, 1> dvm_du = (D * B).transpose() * (M * sigma) / vm;
      const double coeff =
          w[static_cast<size_t>(a)] * std::pow(rho, q) / stress.limit;
      const auto& conn = mesh.cell_nodes(a);
      for (int i = 0; i < 4; ++i) {
        dg_du(2 * conn[size_t(i)]) += coeff * dvm_du(2 * i);
        dg_du(2 * conn[size_t(i)] + 1) += coeff * dvm_du(2 * i + 1);
      }
    }
  }

  // Adjoint term: K lambda = -dg/du, then dg/dz += lambda^T dK/dz u.
  const Eigen::VectorXd lambda = fem.solve_adjoint(-dg_du);
  const double dscale = 1.0 - params.rho_min;
  const int n_chunks = std::max(1, std::min(threads, std::max(n, 1)));
  std::vector<Eigen::VectorXd> grad_parts(static_cast<size_t>(n_chunks),
                                          Eigen::VectorXd::Zero(n_vars));
  parallel_chunks(n, n_chunks, [&](int chunk, int begin, int end) {
    std::vector<double> gg(static_cast<size_t>(n_vars));
    for (int a = begin; a < end; ++a) {
      const int id = mesh.active()[static_cast<size_t>(a)];
      const auto ue = fem.element_displacement(a, sol.u);
      const auto le = fem.element_displacement(a, lambda);
      const double pairing = le.dot(fem.unit_stiffness() * ue);
      if (pairing == 0.0) continue;
      const auto p = params.with_radius(circumradius(mesh.cell_size(id)));
      composite_density_gradient(mesh.centroid(id), bars, p, gg);
      const double coeff = dscale * pairing;
      for (Eigen::Index j = 0; j < n_vars; ++j)
        grad_parts[static_cast<size_t>(chunk)](j) += coeff * gg[static_cast<size_t>(j)];
    }
  });
  for (const auto& part : grad_parts) grad += part;

  out.gradient = std::move(grad);
  return out;
}

FdReport fd_check(const std::function<double(const Eigen::VectorXd&)>& value,
                  const Eigen::VectorXd& analytic_gradient, const Eigen::VectorXd& z0,
                  std::span<const double> steps) {
  const Eigen::Index n = z0.size();
  FdReport report;
  report.analytic = analytic_gradient;
  report.step_error.resize(static_cast<Eigen::Index>(steps.size()), n);
  report.best_error = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());

  const double scale = std::max(analytic_gradient.lpNorm<Eigen::Infinity>(), 1e-300);
  for (size_t si = 0; si < steps.size(); ++si) {
    const double h = steps[si];
    for (Eigen::Index j = 0; j < n; ++j) {
      Eigen::VectorXd zp = z0, zm = z0;
      zp(j) += h;
      zm(j) -= h;
      const double fd = (value(zp) - value(zm)) / (2.0 * h);
      const double denom =
          std::max({std::abs(analytic_gradient(j)), std::abs(fd), 1e-3 * scale});
      const double err = std::abs(fd - analytic_gradient(j)) / denom;
      report.step_error(static_cast<Eigen::Index>(si), j) = err;
      report.best_error(j) = std::min(report.best_error(j), err);
    }
  }
  report.max_error = report.best_error.lpNorm<Eigen::Infinity>();
  return report;
}

}  // namespace gpamr
