// SPDX-FileCopyrightText: 2026 The gpamr authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

#include <vector>

namespace gpamr {

/// Method of Moving Asymptotes tuning constants. The asymptote adaptation
/// constants follow the standard published values; `constraint_penalty` is
/// the linear coefficient on the constraint-violation slack variables.
struct MmaOptions {
  double asymptote_init = 0.5;
  double asymptote_increase = 1.2;
  double asymptote_decrease = 0.7;
  double bound_offset = 0.1;      // keeps iterates away from the asymptotes
  double raa0 = 1e-5;             // baseline curvature of the approximations
  double constraint_penalty = 10.0;
  double epsimin = 1e-7;          // subproblem interior-point target
};

/// Per-variable box for one iteration: the move-limit window intersected
/// with the global scaled bounds.
struct MoveLimitBox {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

/// Box [max(lo, z-m), min(hi, z+m)] per variable, 0 < m <= 1.
MoveLimitBox apply_move_limit(const Eigen::VectorXd& z_prev, double move,
                              const Eigen::VectorXd& lo, const Eigen::VectorXd& hi);

/// MMA driver over scaled variables in [0,1]^N. Each step builds the
/// convex separable approximation at the current iterate and solves it
/// with a primal-dual interior-point method.
class MmaOptimizer {
 public:
  MmaOptimizer(Eigen::Index n_vars, int n_constraints, MmaOptions options = {});

  /// One design update. `objective_gradient` has n_vars entries;
  /// `constraints`/`constraint_gradients` have one row per constraint
  /// (feasible when <= 0). Returns the next iterate inside `box`. Throws
  /// if the subproblem solver fails to reach its residual target.
  Eigen::VectorXd step(const Eigen::VectorXd& z, double objective,
                       const Eigen::VectorXd& objective_gradient,
                       const Eigen::VectorXd& constraints,
                       const Eigen::MatrixXd& constraint_gradients,
                       const MoveLimitBox& box);

  int iteration() const { return iter_; }
  const Eigen::VectorXd& lower_asymptote() const { return low_; }
  const Eigen::VectorXd& upper_asymptote() const { return upp_; }

 private:
  Eigen::Index n_;
  int m_;
  MmaOptions opt_;
  int iter_ = 0;
  Eigen::VectorXd low_, upp_, xold1_, xold2_;
};

/// Two-window stopping rule: true iff the newest iterate differs from both
/// of the two previous iterates by less than `tol` in the max norm.
/// Returns false with fewer than three iterates.
bool design_converged(const std::vector<Eigen::VectorXd>& history, double tol);

}  // namespace gpamr
