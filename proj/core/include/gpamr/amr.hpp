// SPDX-FileCopyrightText: 2026 The gpamr authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

#include <functional>
#include <span>
#include <vector>

#include "gpamr/geometry.hpp"
#include "gpamr/mesh.hpp"

namespace gpamr {

/// Refinement-driver parameters. `always_refine` marks cells regardless of
/// the density indicator (used to keep load-application regions at the
/// finest size); it receives the cell bounding box.
struct AmrParams {
  double rho_th = 0.9;       // solid threshold of the band indicator
  int target_levels = 0;     // N_rl
  double band_factor = 2.0;  // marking-radius multiplier
  std::function<bool(const Vec2& lo, const Vec2& hi)> always_refine;
};

/// Per-active-cell densities of one design on one mesh.
struct DensityField {
  std::vector<double> rho;           // composite density, penalized size (analysis)
  std::vector<double> rho_volume;    // composite density with s = 1 (volume responses)
  std::vector<double> alpha_dominant;  // penalized alpha of the strongest component
  Eigen::MatrixXd effective;         // n_active x n_bars effective densities
};

/// Project the design onto the mesh with the per-cell analysis radius
/// (circumradius of each cell).
DensityField project_density_field(const QuadMesh& mesh,
                                   std::span<const BarComponent> bars,
                                   const ProjectionParams& params, int threads = 1);

/// Cells satisfying the refinement band 0 < rho <= rho_th, evaluated at the
/// centroid with the enlarged marking radius band_factor * circumradius,
/// plus any always_refine cells. Returns active cell ids.
std::vector<int> mark_cells(const QuadMesh& mesh, std::span<const BarComponent> bars,
                            const ProjectionParams& params, const AmrParams& amr,
                            int threads = 1);

struct AdaptResult {
  QuadMesh mesh;
  DensityField field;
};

/// Full refinement pass of one design iteration: reset to the coarsest
/// grid, run target_levels mark/refine rounds, then project the analysis
/// density field on the finished mesh.
AdaptResult adapt(const QuadMesh& base, std::span<const BarComponent> bars,
                  const ProjectionParams& params, const AmrParams& amr,
                  int threads = 1);

}  // namespace gpamr
