// SPDX-FileCopyrightText: 2026 The gpamr authors
// SPDX-License-Identifier: Apache-2.0

#include "gpamr/amr.hpp"

#include <algorithm>
#include <cmath>

#include "gpamr/parallel.hpp"

namespace gpamr {

DensityField project_density_field(const QuadMesh& mesh,
                                   std::span<const BarComponent> bars,
                                   const ProjectionParams& params, int threads) {
  const int n = mesh.n_active();
  const auto nb = static_cast<Eigen::Index>(bars.size());
  DensityField f;
  f.rho.assign(static_cast<size_t>(n), 0.0);
  f.rho_volume.assign(static_cast<size_t>(n), 0.0);
  f.alpha_dominant.assign(static_cast<size_t>(n), 0.0);
  f.effective.resize(n, nb);

  parallel_chunks(n, threads, [&](int, int begin, int end) {
    std::vector<double> rho_hat(bars.size()), rho_hat_vol(bars.size());
    for (int a = begin; a < end; ++a) {
      const int id = mesh.active()[static_cast<size_t>(a)];
      const Vec2 c = mesh.centroid(id);
      const double R = circumradius(mesh.cell_size(id));
      int strongest = 0;
      for (size_t i = 0; i < bars.size(); ++i) {
        const double d = signed_distance(c, bars[i]);
        const double rho = projected_density_2d(d, R);
        rho_hat[i] = effective_density(rho, bars[i].alpha, params.simp_power);
        rho_hat_vol[i] = effective_density(rho, bars[i].alpha, 1.0);
        if (rho_hat[i] > rho_hat[static_cast<size_t>(strongest)]) strongest = static_cast<int>(i);
      }
      f.rho[static_cast<size_t>(a)] = std::clamp(ks_max(rho_hat, params.ks_k), 0.0, 1.0);
      f.rho_volume[static_cast<size_t>(a)] =
          std::clamp(ks_max(rho_hat_vol, params.ks_k), 0.0, 1.0);
      f.alpha_dominant[static_cast<size_t>(a)] =
          rho_hat[static_cast<size_t>(strongest)] > 0.0
              ? std::pow(bars[static_cast<size_t>(strongest)].alpha, params.simp_power)
              : 0.0;
      for (Eigen::Index i = 0; i < nb; ++i)
        f.effective(a, i) = rho_hat[static_cast<size_t>(i)];
    }
  });
  return f;
}

std::vector<int> mark_cells(const QuadMesh& mesh, std::span<const BarComponent> bars,
                            const ProjectionParams& params, const AmrParams& amr,
                            int threads) {
  const int n = mesh.n_active();
  std::vector<char> marked(static_cast<size_t>(n), 0);
  parallel_chunks(n, threads, [&](int, int begin, int end) {
    for (int a = begin; a < end; ++a) {
      const int id = mesh.active()[static_cast<size_t>(a)];
      const double h = mesh.cell_size(id);
      if (amr.always_refine) {
        const Vec2 lo = mesh.cell_origin(id);
        if (amr.always_refine(lo, lo + Vec2(h, h))) {
          marked[static_cast<size_t>(a)] = 1;
          continue;
        }
      }
      const double R = amr.band_factor * circumradius(h);
      const double rho = composite_density(mesh.centroid(id), bars, params.with_radius(R));
      if (rho > 0.0 && rho <= amr.rho_th) marked[static_cast<size_t>(a)] = 1;
    }
  });
  std::vector<int> ids;
  for (int a = 0; a < n; ++a)
    if (marked[static_cast<size_t>(a)]) ids.push_back(mesh.active()[static_cast<size_t>(a)]);
  return ids;
}

AdaptResult adapt(const QuadMesh& base, std::span<const BarComponent> bars,
                  const ProjectionParams& params, const AmrParams& amr, int threads) {
  QuadMesh mesh = base.coarsest();
  for (int round = 0; round < amr.target_levels; ++round) {
    const auto marks = mark_cells(mesh, bars, params, amr, threads);
    if (marks.empty()) continue;
    mesh = mesh.refined(marks);
  }
  DensityField field = project_density_field(mesh, bars, params, threads);
  return {std::move(mesh), std::move(field)};
}

}  // namespace gpamr
