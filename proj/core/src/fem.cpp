// SPDX-FileCopyrightText: 2026 The gpamr authors
// SPDX-License-Identifier: Apache-2.0

#include "gpamr/fem.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "gpamr/parallel.hpp"

namespace gpamr {

Eigen::Matrix3d MaterialModel::elasticity() const {
  const double E = youngs_modulus, nu = poisson_ratio;
  Eigen::Matrix3d D = Eigen::Matrix3d::Zero();
  if (plane_stress) {
    const double c = E / (1.0 - nu * nu);
    D(0, 0) = D(1, 1) = c;
    D(0, 1) = D(1, 0) = c * nu;
    D(2, 2) = c * (1.0 - nu) / 2.0;
  } else {
    const double c = E / ((1.0 + nu) * (1.0 - 2.0 * nu));
    D(0, 0) = D(1, 1) = c * (1.0 - nu);
    D(0, 1) = D(1, 0) = c * nu;
    D(2, 2) = c * (1.0 - 2.0 * nu) / 2.0;
  }
  return D;
}

namespace {

// Shape-function derivatives w.r.t. (xi, eta) at a reference point, CCW
// corner numbering SW, SE, NE, NW on [-1,1]^2.
inline void shape_gradients(double xi, double eta, double dxi[4], double deta[4]) {
  dxi[0] = -0.25 * (1 - eta); deta[0] = -0.25 * (1 - xi);
  dxi[1] = 0.25 * (1 - eta);  deta[1] = -0.25 * (1 + xi);
  dxi[2] = 0.25 * (1 + eta);  deta[2] = 0.25 * (1 + xi);
  dxi[3] = -0.25 * (1 + eta); deta[3] = 0.25 * (1 - xi);
}

inline Eigen::Matrix<double, 3, 8> strain_matrix(double xi, double eta, double h) {
  double dxi[4], deta[4];
  shape_gradients(xi, eta, dxi, deta);
  const double j = 2.0 / h;  // d(xi)/dx for a square cell of size h
  Eigen::Matrix<double, 3, 8> B = Eigen::Matrix<double, 3, 8>::Zero();
  for (int i = 0; i < 4; ++i) {
    const double dx = dxi[i] * j, dy = deta[i] * j;
    B(0, 2 * i) = dx;
    B(1, 2 * i + 1) = dy;
    B(2, 2 * i) = dy;
    B(2, 2 * i + 1) = dx;
  }
  return B;
}

}  // namespace

Eigen::Matrix<double, 8, 8> element_stiffness(double scale, const MaterialModel& material) {
  const Eigen::Matrix3d D = material.elasticity();
  Eigen::Matrix<double, 8, 8> K = Eigen::Matrix<double, 8, 8>::Zero();
  const double g = 1.0 / std::sqrt(3.0);
  const double pts[2] = {-g, g};
  const double det_j = 0.25;  // (h/2)^2 with h = 1
  for (double xi : pts) {
    for (double eta : pts) {
      const auto B = strain_matrix(xi, eta, 1.0);
      K += B.transpose() * D * B * det_j;
    }
  }
  return scale * K;
}

Eigen::Matrix<double, 3, 8> centroid_strain_matrix(double h) {
  return strain_matrix(0.0, 0.0, h);
}

double von_mises_stress(const Eigen::Vector3d& sigma, const MaterialModel& material) {
  const double sx = sigma(0), sy = sigma(1), txy = sigma(2);
  const double sz = material.plane_stress
                        ? 0.0
                        : material.poisson_ratio * (sx + sy);
  const double a = sx - sy, b = sy - sz, c = sz - sx;
  return std::sqrt(0.5 * (a * a + b * b + c * c) + 3.0 * txy * txy);
}

// ---------------------------------------------------------------------------

namespace {

enum class DofStatus : int8_t { free_dof, prescribed, hanging };

struct Expansion {
  // (reduced dof, weight) terms plus a constant from prescribed values.
  std::vector<std::pair<int, double>> terms;
  double offset = 0.0;
};

}  // namespace

struct FemSystem::Impl {
  int n_dofs = 0;
  int n_red = 0;
  std::vector<Expansion> expansion;       // per full dof
  Eigen::SparseMatrix<double> K;          // reduced
  Eigen::VectorXd f_dirichlet;            // reduced rhs from prescribed values
  Solver solver = Solver::direct;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;

  Eigen::VectorXd solve_reduced(const Eigen::VectorXd& b, SolveDiagnostics& diag) const {
    Eigen::VectorXd u;
    if (solver == Solver::direct) {
      u = ldlt.solve(b);
      diag.method = "ldlt";
      diag.iterations = 0;
    } else {
      Eigen::ConjugateGradient<Eigen::SparseMatrix<double>,
                               Eigen::Lower | Eigen::Upper,
                               Eigen::DiagonalPreconditioner<double>>
          cg;
      cg.setTolerance(1e-12);
      cg.setMaxIterations(20 * K.rows());
      cg.compute(K);
      u = cg.solve(b);
      diag.method = "cg";
      diag.iterations = static_cast<int>(cg.iterations());
    }
    diag.n_dofs = static_cast<int>(K.rows());
    const double bn = b.norm();
    diag.residual = bn > 0 ? (K * u - b).norm() / bn : (K * u).norm();
    if (!u.allFinite() || diag.residual > 1e-7)
      throw std::runtime_error(
          "FemSystem: linear solve failed (residual " + std::to_string(diag.residual) +
          ", " + std::to_string(diag.n_dofs) +
          " dofs); the load path may be disconnected");
    return u;
  }
};

FemSystem::FemSystem(const QuadMesh& mesh, const std::vector<double>& cell_scale,
                     const MaterialModel& material, const BoundaryConditions& bcs,
                     Solver solver, int threads)
    : mesh_(mesh), material_(material), impl_(std::make_unique<Impl>()) {
  if (static_cast<int>(cell_scale.size()) != mesh.n_active())
    throw std::invalid_argument("FemSystem: one stiffness scale per active cell required");
  k_unit_ = element_stiffness(1.0, material);
  impl_->solver = solver;

  const int n_nodes = mesh.n_nodes();
  const int n_dofs = 2 * n_nodes;
  impl_->n_dofs = n_dofs;

  // Kinematic status per dof.
  const auto constraints = build_constraints(mesh);
  std::vector<DofStatus> status(static_cast<size_t>(n_dofs), DofStatus::free_dof);
  std::vector<double> value(static_cast<size_t>(n_dofs), 0.0);
  std::vector<std::array<int, 2>> masters(static_cast<size_t>(n_nodes), {-1, -1});
  for (const auto& c : constraints) {
    status[size_t(2 * c.node)] = status[size_t(2 * c.node + 1)] = DofStatus::hanging;
    masters[size_t(c.node)] = {c.master0, c.master1};
  }

  const double tol = 1e-9 * std::max(mesh.len_x(), mesh.len_y());
  for (int node = 0; node < n_nodes; ++node) {
    const Vec2& p = mesh.node(node);
    if (bcs.prescribed_field) {
      if (auto u = bcs.prescribed_field(p)) {
        status[size_t(2 * node)] = status[size_t(2 * node + 1)] = DofStatus::prescribed;
        value[size_t(2 * node)] = u->x();
        value[size_t(2 * node + 1)] = u->y();
      }
    }
    for (const auto& region : bcs.dirichlet) {
      if (p.x() < region.lo.x() - tol || p.x() > region.hi.x() + tol ||
          p.y() < region.lo.y() - tol || p.y() > region.hi.y() + tol)
        continue;
      // Prescribed values take precedence over hanging status.
      if (region.fix_x) {
        status[size_t(2 * node)] = DofStatus::prescribed;
        value[size_t(2 * node)] = region.value.x();
      }
      if (region.fix_y) {
        status[size_t(2 * node + 1)] = DofStatus::prescribed;
        value[size_t(2 * node + 1)] = region.value.y();
      }
    }
  }

  // Reduced numbering over free dofs.
  std::vector<int> red(static_cast<size_t>(n_dofs), -1);
  int n_red = 0;
  for (int d = 0; d < n_dofs; ++d)
    if (status[size_t(d)] == DofStatus::free_dof) red[size_t(d)] = n_red++;
  impl_->n_red = n_red;
  if (n_red == 0) throw std::invalid_argument("FemSystem: no free dofs");

  // Resolve constraint chains (a master corner may itself hang on a yet
  // coarser edge) down to free and prescribed dofs.
  impl_->expansion.assign(static_cast<size_t>(n_dofs), {});
  std::vector<int8_t> state(static_cast<size_t>(n_dofs), 0);  // 0 new, 1 in progress, 2 done
  const std::function<const Expansion&(int)> resolve = [&](int dof) -> const Expansion& {
    auto& e = impl_->expansion[size_t(dof)];
    if (state[size_t(dof)] == 2) return e;
    if (state[size_t(dof)] == 1)
      throw std::runtime_error("FemSystem: cyclic hanging-node constraints");
    state[size_t(dof)] = 1;
    switch (status[size_t(dof)]) {
      case DofStatus::free_dof:
        e.terms.emplace_back(red[size_t(dof)], 1.0);
        break;
      case DofStatus::prescribed:
        e.offset = value[size_t(dof)];
        break;
      case DofStatus::hanging: {
        const int comp = dof & 1;
        const auto& m = masters[size_t(dof / 2)];
        for (int k = 0; k < 2; ++k) {
          const Expansion& me = resolve(2 * m[size_t(k)] + comp);
          for (const auto& [idx, w] : me.terms) {
            bool merged = false;
            for (auto& [ei, ew] : e.terms)
              if (ei == idx) { ew += 0.5 * w; merged = true; break; }
            if (!merged) e.terms.emplace_back(idx, 0.5 * w);
          }
          e.offset += 0.5 * me.offset;
        }
        break;
      }
    }
    state[size_t(dof)] = 2;
    return e;
  };
  for (int d = 0; d < n_dofs; ++d) resolve(d);

  // External loads (full space).
  f_ext_ = Eigen::VectorXd::Zero(n_dofs);
  for (const auto& pl : bcs.point_loads) {
    int found = -1;
    for (int node = 0; node < n_nodes; ++node) {
      if ((mesh.node(node) - pl.at).norm() <= tol) { found = node; break; }
    }
    if (found < 0)
      throw std::invalid_argument("FemSystem: no node at point load (" +
                                  std::to_string(pl.at.x()) + ", " +
                                  std::to_string(pl.at.y()) + ")");
    f_ext_(2 * found) += pl.force.x();
    f_ext_(2 * found + 1) += pl.force.y();
  }
  if (!bcs.tractions.empty()) {
    // Edge node slots per direction, matching the CCW corner numbering.
    constexpr int edge_nodes[4][2] = {{3, 0}, {1, 2}, {0, 1}, {2, 3}};
    for (int a = 0; a < mesh.n_active(); ++a) {
      const int id = mesh.active()[static_cast<size_t>(a)];
      const double h = mesh.cell_size(id);
      const auto& conn = mesh.cell_nodes(a);
      for (int dir = 0; dir < 4; ++dir) {
        if (!mesh.leaf_edge_neighbors(id, Direction(dir)).empty()) continue;
        const Vec2 pa = mesh.node(conn[size_t(edge_nodes[dir][0])]);
        const Vec2 pb = mesh.node(conn[size_t(edge_nodes[dir][1])]);
        for (const auto& tr : bcs.tractions) {
          const bool inside =
              pa.x() >= tr.lo.x() - tol && pa.x() <= tr.hi.x() + tol &&
              pa.y() >= tr.lo.y() - tol && pa.y() <= tr.hi.y() + tol &&
              pb.x() >= tr.lo.x() - tol && pb.x() <= tr.hi.x() + tol &&
              pb.y() >= tr.lo.y() - tol && pb.y() <= tr.hi.y() + tol;
          if (!inside) continue;
          for (int k = 0; k < 2; ++k) {
            const int node = conn[size_t(edge_nodes[dir][k])];
            f_ext_(2 * node) += 0.5 * h * tr.traction.x();
            f_ext_(2 * node + 1) += 0.5 * h * tr.traction.y();
          }
        }
      }
    }
  }

  // Assembly with per-chunk buffers merged in chunk order (deterministic
  // for a fixed thread count).
  const int n_active = mesh.n_active();
  const int n_chunks = std::max(1, std::min(threads, n_active));
  std::vector<std::vector<Eigen::Triplet<double>>> triplets(static_cast<size_t>(n_chunks));
  std::vector<Eigen::VectorXd> rhs_parts(static_cast<size_t>(n_chunks),
                                         Eigen::VectorXd::Zero(n_red));
  parallel_chunks(n_active, n_chunks, [&](int chunk, int begin, int end) {
    auto& trip = triplets[static_cast<size_t>(chunk)];
    auto& rhs = rhs_parts[static_cast<size_t>(chunk)];
    trip.reserve(static_cast<size_t>(end - begin) * 70);
    for (int a = begin; a < end; ++a) {
      const auto& conn = mesh.cell_nodes(a);
      const double scale = cell_scale[static_cast<size_t>(a)];
      const Expansion* ex[8];
      for (int i = 0; i < 4; ++i) {
        ex[2 * i] = &impl_->expansion[size_t(2 * conn[size_t(i)])];
        ex[2 * i + 1] = &impl_->expansion[size_t(2 * conn[size_t(i)] + 1)];
      }
      for (int r = 0; r < 8; ++r) {
        for (int cidx = 0; cidx < 8; ++cidx) {
          const double kv = scale * k_unit_(r, cidx);
          if (kv == 0.0) continue;
          for (const auto& [ri, rw] : ex[r]->terms) {
            for (const auto& [ci, cw] : ex[cidx]->terms)
              trip.emplace_back(ri, ci, rw * cw * kv);
            if (ex[cidx]->offset != 0.0) rhs(ri) -= rw * kv * ex[cidx]->offset;
          }
        }
      }
    }
  });
  size_t total = 0;
  for (const auto& t : triplets) total += t.size();
  std::vector<Eigen::Triplet<double>> all;
  all.reserve(total);
  for (const auto& t : triplets) all.insert(all.end(), t.begin(), t.end());
  impl_->K.resize(n_red, n_red);
  impl_->K.setFromTriplets(all.begin(), all.end());
  impl_->f_dirichlet = Eigen::VectorXd::Zero(n_red);
  for (const auto& r : rhs_parts) impl_->f_dirichlet += r;

  if (solver == Solver::direct) {
    impl_->ldlt.compute(impl_->K);
    if (impl_->ldlt.info() != Eigen::Success)
      throw std::runtime_error(
          "FemSystem: LDLT factorization failed (singular or indefinite system of " +
          std::to_string(n_red) + " dofs)");
  }
}

FemSystem::~FemSystem() = default;

const Eigen::SparseMatrix<double>& FemSystem::reduced_matrix() const { return impl_->K; }
int FemSystem::n_reduced() const { return impl_->n_red; }

Eigen::VectorXd FemSystem::reduce(const Eigen::VectorXd& v_full) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(impl_->n_red);
  for (int d = 0; d < impl_->n_dofs; ++d) {
    const double v = v_full(d);
    if (v == 0.0) continue;
    for (const auto& [idx, w] : impl_->expansion[size_t(d)].terms) out(idx) += w * v;
  }
  return out;
}

Eigen::VectorXd FemSystem::expand(const Eigen::VectorXd& u_red, bool with_prescribed) const {
  Eigen::VectorXd out(impl_->n_dofs);
  for (int d = 0; d < impl_->n_dofs; ++d) {
    const auto& e = impl_->expansion[size_t(d)];
    double v = with_prescribed ? e.offset : 0.0;
    for (const auto& [idx, w] : e.terms) v += w * u_red(idx);
    out(d) = v;
  }
  return out;
}

FemSolution FemSystem::solve() const {
  FemSolution sol;
  const Eigen::VectorXd b = impl_->f_dirichlet + reduce(f_ext_);
  const Eigen::VectorXd u_red = impl_->solve_reduced(b, sol.diagnostics);
  sol.u = expand(u_red, true);
  sol.compliance = f_ext_.dot(sol.u);
  sol.von_mises = recover_von_mises(mesh_, sol.u, material_);
  return sol;
}

Eigen::VectorXd FemSystem::solve_adjoint(const Eigen::VectorXd& rhs_full) const {
  SolveDiagnostics diag;
  const Eigen::VectorXd lambda_red = impl_->solve_reduced(reduce(rhs_full), diag);
  return expand(lambda_red, false);
}

Eigen::Matrix<double, 8, 1> FemSystem::element_displacement(
    int active_index, const Eigen::VectorXd& u_full) const {
  Eigen::Matrix<double, 8, 1> ue;
  const auto& conn = mesh_.cell_nodes(active_index);
  for (int i = 0; i < 4; ++i) {
    ue(2 * i) = u_full(2 * conn[size_t(i)]);
    ue(2 * i + 1) = u_full(2 * conn[size_t(i)] + 1);
  }
  return ue;
}

std::vector<double> recover_von_mises(const QuadMesh& mesh, const Eigen::VectorXd& u_full,
                                      const MaterialModel& material, int threads) {
  const Eigen::Matrix3d D = material.elasticity();
  std::vector<double> vm(static_cast<size_t>(mesh.n_active()), 0.0);
  parallel_chunks(mesh.n_active(), threads, [&](int, int begin, int end) {
    for (int a = begin; a < end; ++a) {
      const int id = mesh.active()[static_cast<size_t>(a)];
      const auto B = centroid_strain_matrix(mesh.cell_size(id));
      Eigen::Matrix<double, 8, 1> ue;
      const auto& conn = mesh.cell_nodes(a);
      for (int i = 0; i < 4; ++i) {
        ue(2 * i) = u_full(2 * conn[size_t(i)]);
        ue(2 * i + 1) = u_full(2 * conn[size_t(i)] + 1);
      }
      vm[static_cast<size_t>(a)] = von_mises_stress(D * (B * ue), material);
    }
  });
  return vm;
}

}  // namespace gpamr
