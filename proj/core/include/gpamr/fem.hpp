// SPDX-FileCopyrightText: 2026 The gpamr authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gpamr/mesh.hpp"

namespace gpamr {

/// Isotropic linear elastic material. 2D analyses use unit thickness.
struct MaterialModel {
  double youngs_modulus = 1e5;
  double poisson_ratio = 0.3;
  bool plane_stress = true;

  /// 3x3 elasticity matrix relating [eps_xx, eps_yy, gamma_xy] to
  /// [sig_xx, sig_yy, tau_xy].
  Eigen::Matrix3d elasticity() const;
};

/// Nodes inside `box` (grown by a small tolerance) get the prescribed
/// displacement components. Degenerate boxes select single nodes or edges.
struct DirichletRegion {
  Vec2 lo{0, 0};
  Vec2 hi{0, 0};
  bool fix_x = false;
  bool fix_y = false;
  Vec2 value{0, 0};
};

struct PointLoad {
  Vec2 at{0, 0};
  Vec2 force{0, 0};
};

/// Constant traction (force per unit length) on boundary edges fully
/// contained in `box`.
struct EdgeTraction {
  Vec2 lo{0, 0};
  Vec2 hi{0, 0};
  Vec2 traction{0, 0};
};

struct BoundaryConditions {
  std::vector<DirichletRegion> dirichlet;
  std::vector<PointLoad> point_loads;
  std::vector<EdgeTraction> tractions;
  /// Optional per-node prescribed field; overrides nothing, adds fixed
  /// values where it returns one (used by patch tests).
  std::function<std::optional<Vec2>(const Vec2&)> prescribed_field;
};

struct SolveDiagnostics {
  std::string method;      // "ldlt" or "cg"
  int n_dofs = 0;          // reduced system size
  int iterations = 0;      // 0 for the direct path
  double residual = 0.0;   // relative residual of the reduced system
};

struct FemSolution {
  Eigen::VectorXd u;        // full-space nodal displacements (2 per node)
  double compliance = 0.0;  // external work f.u
  std::vector<double> von_mises;  // base-material centroid stress per cell
  SolveDiagnostics diagnostics;
};

/// Stiffness matrix of a square bilinear quad of unit thickness integrated
/// with 2x2 Gauss quadrature, times `scale`. In 2D the matrix of a square
/// element is independent of its size.
Eigen::Matrix<double, 8, 8> element_stiffness(double scale, const MaterialModel& material);

/// Strain-displacement matrix at the element centroid of a square cell of
/// size h (rows: eps_xx, eps_yy, gamma_xy; columns follow the CCW corner
/// numbering with interleaved x/y dofs).
Eigen::Matrix<double, 3, 8> centroid_strain_matrix(double h);

/// Plane-stress (or plane-strain) von Mises magnitude of a stress vector
/// [sig_xx, sig_yy, tau_xy].
double von_mises_stress(const Eigen::Vector3d& sigma, const MaterialModel& material);

/// Assembled, constraint-eliminated linear elasticity system on a balanced
/// quadtree mesh. Hanging-node constraints and Dirichlet values are folded
/// into the reduced operator; the factorization is kept for reuse by
/// adjoint solves.
class FemSystem {
 public:
  enum class Solver { direct, cg };

  FemSystem(const QuadMesh& mesh, const std::vector<double>& cell_scale,
            const MaterialModel& material, const BoundaryConditions& bcs,
            Solver solver = Solver::direct, int threads = 1);
  ~FemSystem();
  FemSystem(const FemSystem&) = delete;
  FemSystem& operator=(const FemSystem&) = delete;

  /// Primal solve. Throws on a singular or numerically indefinite system.
  FemSolution solve() const;

  /// Solve K lambda = rhs for a full-space rhs with homogeneous versions of
  /// all kinematic constraints (adjoint problems). Returns the full-space
  /// expansion.
  Eigen::VectorXd solve_adjoint(const Eigen::VectorXd& rhs_full) const;

  /// Element displacement vector (8 dofs, CCW corners) of active cell a.
  Eigen::Matrix<double, 8, 1> element_displacement(int active_index,
                                                   const Eigen::VectorXd& u_full) const;

  const Eigen::Matrix<double, 8, 8>& unit_stiffness() const { return k_unit_; }
  const Eigen::SparseMatrix<double>& reduced_matrix() const;
  const Eigen::VectorXd& external_load() const { return f_ext_; }
  const QuadMesh& mesh() const { return mesh_; }
  const MaterialModel& material() const { return material_; }
  int n_reduced() const;

 private:
  struct Impl;
  Eigen::VectorXd expand(const Eigen::VectorXd& u_red, bool with_prescribed) const;
  Eigen::VectorXd reduce(const Eigen::VectorXd& v_full) const;

  const QuadMesh& mesh_;
  MaterialModel material_;
  Eigen::Matrix<double, 8, 8> k_unit_;
  Eigen::VectorXd f_ext_;  // full-space external load
  std::unique_ptr<Impl> impl_;
};

/// Base-material centroid von Mises stress for every active cell.
std::vector<double> recover_von_mises(const QuadMesh& mesh, const Eigen::VectorXd& u_full,
                                      const MaterialModel& material, int threads = 1);

}  // namespace gpamr
