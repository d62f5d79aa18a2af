// SPDX-FileCopyrightText: 2026 The gpamr authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

#include <functional>
#include <span>
#include <vector>

#include "gpamr/amr.hpp"
#include "gpamr/fem.hpp"

namespace gpamr {

/// Response values with gradients over the design vector. Whether the
/// gradients live in physical or scaled variable space is up to the
/// producer; the optimization driver works in scaled space.
struct ResponseSet {
  double objective = 0.0;
  Eigen::VectorXd objective_gradient;
  std::vector<double> constraints;  // feasible when <= 0
  std::vector<Eigen::VectorXd> constraint_gradients;
};

/// Domain volume fraction (1/|Omega|) sum(area_e * rho_e) and its gradient
/// over the unscaled design vector. Uses the unpenalized size variable
/// (s = 1) so a faded component stops counting toward volume.
std::pair<double, Eigen::VectorXd> volume_fraction(const QuadMesh& mesh,
                                                   std::span<const BarComponent> bars,
                                                   const ProjectionParams& params,
                                                   int threads = 1);

/// Compliance gradient over the unscaled design vector on the current
/// (frozen) mesh: -sum_e u_e^T dK_e/dz u_e with design-independent loads.
Eigen::VectorXd compliance_gradient(const FemSystem& fem, const FemSolution& sol,
                                    std::span<const BarComponent> bars,
                                    const ProjectionParams& params, int threads = 1);

struct StressParams {
  double limit = 1.0;            // sigma*
  double ks_k = 30.0;            // upper-bound KS aggregation coefficient
  double relax_exponent = 0.5;   // sigma_rel = rho^q * vm
};

struct StressResponse {
  double constraint = 0.0;       // KS_upper(sigma_rel/sigma*) - 1
  double max_relaxed = 0.0;      // max_e sigma_rel,e
  Eigen::VectorXd gradient;      // unscaled design space
  std::vector<double> relaxed;   // per-cell relaxed stress
};

/// Aggregated relaxed-stress constraint with its adjoint gradient. One
/// extra linear solve reusing the primal factorization.
StressResponse stress_response(const FemSystem& fem, const FemSolution& sol,
                               const DensityField& field,
                               std::span<const BarComponent> bars,
                               const ProjectionParams& params,
                               const StressParams& stress, int threads = 1);

struct FdReport {
  Eigen::VectorXd analytic;
  Eigen::VectorXd best_error;   // per-variable best-step relative error
  Eigen::MatrixXd step_error;   // n_steps x n_vars
  double max_error = 0.0;
};

/// Central-difference verification of an analytic gradient at z0, over a
/// schedule of step sizes; per variable the best-step agreement is
/// reported. Relative errors are measured against
/// max(|analytic|, |fd|, 1e-3 * ||analytic||_inf) so that near-zero
/// components are compared on the gradient's own scale.
FdReport fd_check(const std::function<double(const Eigen::VectorXd&)>& value,
                  const Eigen::VectorXd& analytic_gradient, const Eigen::VectorXd& z0,
                  std::span<const double> steps);

}  // namespace gpamr
