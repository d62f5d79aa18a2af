// SPDX-FileCopyrightText: 2026 The gpamr authors
// SPDX-License-Identifier: Apache-2.0

#include "gpamr/driver.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "gpamr/amr.hpp"
#include "gpamr/design.hpp"
#include "gpamr/mma.hpp"
#include "gpamr/vtk.hpp"

namespace gpamr {

namespace {

double seconds_since(std::chrono::steady_clock::time_point& mark) {
  const auto now = std::chrono::steady_clock::now();
  const double dt = std::chrono::duration<double>(now - mark).count();
  mark = now;
  return dt;
}

std::string snapshot_name(const char* prefix, int iter, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%04d%s", prefix, iter, ext);
  return buf;
}

// The optimizer can park both endpoints of a faded bar on the same bound;
// keep the segment non-degenerate for the distance evaluation.
std::vector<BarComponent> make_bars(const Eigen::VectorXd& z, double envelope_diag) {
  Eigen::VectorXd zz = z;
  for (Eigen::Index i = 0; i < zz.size(); i += kVarsPerBar) {
    if (zz(i) == zz(i + 2) && zz(i + 1) == zz(i + 3))
      zz(i + 2) += 1e-9 * envelope_diag;
  }
  return unpack_design(zz);
}

void write_history_header(std::ofstream& out) {
  out << "iter,objective,constraint,max_delta_z,n_cells,"
         "t_refine,t_project,t_assemble,t_solve,t_responses,t_sens,t_total\n";
}

void write_history_row(std::ofstream& out, const IterationRecord& r) {
  out.precision(10);
  out << r.iteration << ',' << r.objective << ',' << r.constraint << ','
      << r.max_delta_z << ',' << r.n_cells << ',' << r.timings.refine << ','
      << r.timings.project << ',' << r.timings.assemble << ',' << r.timings.solve << ','
      << r.timings.responses << ',' << r.timings.sensitivities << ','
      << r.timings.total() << '\n';
  out.flush();
}

void write_timing_report(const IterationRecord& r, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write timing report: " + path.string());
  out.precision(4);
  out << "Task                            Last iteration (s)\n";
  out << "Mesh refinement                 " << r.timings.refine << '\n';
  out << "Geometry projection             " << r.timings.project << '\n';
  out << "Finite element assembly         " << r.timings.assemble << '\n';
  out << "Finite element linear solution  " << r.timings.solve << '\n';
  out << "Responses calculation           " << r.timings.responses << '\n';
  out << "Sensitivities calculation       " << r.timings.sensitivities << '\n';
  out << "Total time                      " << r.timings.total() << '\n';
}

}  // namespace

void export_iteration(const QuadMesh& mesh, const DensityField& field,
                      const std::vector<double>& von_mises,
                      const std::vector<double>& relaxed,
                      std::span<const BarComponent> bars, int iteration,
                      const std::filesystem::path& dir) {
  std::vector<CellField> fields;
  fields.emplace_back("composite_density", &field.rho);
  fields.emplace_back("alpha_penalized", &field.alpha_dominant);
  if (!von_mises.empty()) fields.emplace_back("von_mises", &von_mises);
  if (!relaxed.empty()) fields.emplace_back("relaxed_stress", &relaxed);
  write_vtk(mesh, fields, dir / snapshot_name("mesh", iteration, ".vtk"));
  save_design(bars, dir / snapshot_name("design", iteration, ".json"));
}

RunResult run(const ProblemConfig& config, const RunOptions& options) {
  config.validate();
  const int threads = std::max(1, options.threads);
  const int max_iters =
      options.max_iterations > 0 ? options.max_iterations : config.optimizer.max_iterations;

  RunResult result;
  result.output_dir = options.out_dir.empty() ? config.output.directory : options.out_dir;
  std::filesystem::create_directories(result.output_dir);
  save_config(config, result.output_dir / "config.json");
  std::ofstream history_csv(result.output_dir / "history.csv");
  if (!history_csv)
    throw std::runtime_error("cannot write history.csv in " + result.output_dir.string());
  write_history_header(history_csv);

  const auto& env = config.envelope;
  const double diag = std::hypot(env.len_x, env.len_y);
  const auto keep = [&config](const Vec2& p) { return config.inside_domain(p); };
  const QuadMesh coarse = QuadMesh::uniform(env.len_x, env.len_y, config.amr.coarse_size, keep);

  AmrParams amr;
  amr.rho_th = config.amr.rho_th;
  amr.target_levels = config.amr.levels;
  amr.band_factor = config.amr.band_factor;
  if (!config.frozen_fine.empty()) {
    const auto rects = config.frozen_fine;
    amr.always_refine = [rects](const Vec2& lo, const Vec2& hi) {
      for (const auto& r : rects) {
        if (hi.x() > r[0] && lo.x() < r[2] && hi.y() > r[1] && lo.y() < r[3]) return true;
      }
      return false;
    };
  }

  // Full-resolution comparison meshes: globally refine the coarsest grid
  // N_rl times before the optimization, then keep the mesh fixed.
  QuadMesh full_mesh = coarse;
  if (options.full_resolution) {
    for (int l = 0; l < config.amr.levels; ++l) full_mesh = full_mesh.refined(full_mesh.active());
  }

  BoundaryConditions bcs;
  bcs.dirichlet = config.supports;
  bcs.point_loads = config.point_loads;
  bcs.tractions = config.tractions;
  const auto solver =
      config.solver == "cg" ? FemSystem::Solver::cg : FemSystem::Solver::direct;

  DesignScaling scaling(DesignBounds::for_bars(
      static_cast<int>(config.bars.size()), {0.0, 0.0}, {env.len_x, env.len_y},
      config.width.min, config.width.max));
  Eigen::VectorXd z = pack_design(config.bars);
  // Seed designs are clamped into the declared bounds before scaling.
  z = z.cwiseMax(scaling.bounds().lower).cwiseMin(scaling.bounds().upper);
  Eigen::VectorXd z_hat = scaling.scale(z);

  MmaOptions mma_opts;
  mma_opts.constraint_penalty = config.optimizer.constraint_penalty;
  MmaOptimizer mma(z_hat.size(), 1, mma_opts);
  const Eigen::VectorXd bound_lo = Eigen::VectorXd::Zero(z_hat.size());
  const Eigen::VectorXd bound_hi = Eigen::VectorXd::Ones(z_hat.size());
  std::vector<Eigen::VectorXd> iterate_history{z_hat};

  const bool is_stress = config.kind == ProblemKind::stress;
  for (int iter = 0; iter < max_iters; ++iter) {
    IterationRecord rec;
    rec.iteration = iter;
    auto mark = std::chrono::steady_clock::now();
    const auto bars = make_bars(scaling.unscale(z_hat), diag);

    try {
      QuadMesh mesh = coarse;
      if (options.full_resolution) {
        mesh = full_mesh;
      } else {
        for (int level = 0; level < amr.target_levels; ++level) {
          const auto marks = mark_cells(mesh, bars, config.projection, amr, threads);
          if (marks.empty()) continue;
          mesh = mesh.refined(marks);
        }
      }
      rec.timings.refine = seconds_since(mark);
      const DensityField field =
          project_density_field(mesh, bars, config.projection, threads);
      rec.timings.project = seconds_since(mark);
      rec.n_cells = mesh.n_active();

      std::vector<double> scale(static_cast<size_t>(mesh.n_active()));
      for (int a = 0; a < mesh.n_active(); ++a)
        scale[static_cast<size_t>(a)] =
            ersatz_scale(field.rho[static_cast<size_t>(a)], config.projection.rho_min);
      mark = std::chrono::steady_clock::now();
      FemSystem fem(mesh, scale, config.material, bcs, solver, threads);
      rec.timings.assemble = seconds_since(mark);
      const FemSolution sol = fem.solve();
      rec.timings.solve = seconds_since(mark);

      // Responses.
      const auto [vf, dvf] = volume_fraction(mesh, bars, config.projection, threads);
      result.volume_fraction = vf;
      StressResponse stress;
      if (is_stress) {
        stress = stress_response(fem, sol, field, bars, config.projection, config.stress,
                                 threads);
        rec.objective = vf;
        rec.constraint = stress.constraint;
        result.max_relaxed_stress = stress.max_relaxed;
      } else {
        rec.objective = sol.compliance;
        rec.constraint = vf / config.volume_limit - 1.0;
      }
      rec.timings.responses = seconds_since(mark);

      // Sensitivities in scaled variable space.
      Eigen::VectorXd dobj, dcon;
      if (is_stress) {
        dobj = dvf.cwiseProduct(scaling.range());
        dcon = stress.gradient.cwiseProduct(scaling.range());
      } else {
        dobj = compliance_gradient(fem, sol, bars, config.projection, threads)
                   .cwiseProduct(scaling.range());
        dcon = (dvf / config.volume_limit).cwiseProduct(scaling.range());
      }
      rec.timings.sensitivities = seconds_since(mark);

      rec.max_delta_z =
          iterate_history.size() > 1
              ? (iterate_history.back() - iterate_history[iterate_history.size() - 2])
                    .lpNorm<Eigen::Infinity>()
              : 0.0;
      result.history.push_back(rec);
      write_history_row(history_csv, rec);
      if (!options.quiet) {
        std::printf("iter %4d  obj %.6g  cons %+.4g  dz %.4g  cells %d\n", iter,
                    rec.objective, rec.constraint, rec.max_delta_z, rec.n_cells);
        std::fflush(stdout);
      }
      const bool snapshot = iter % config.output.vtk_every == 0;
      if (snapshot)
        export_iteration(mesh, field, sol.von_mises, stress.relaxed, bars, iter,
                         result.output_dir);

      result.design = bars;
      result.objective = rec.objective;
      result.constraint = rec.constraint;
      result.final_cells = rec.n_cells;
      result.iterations = iter + 1;

      if (design_converged(iterate_history, config.optimizer.convergence_tol)) {
        result.converged = true;
        if (!snapshot)
          export_iteration(mesh, field, sol.von_mises, stress.relaxed, bars, iter,
                           result.output_dir);
        write_timing_report(rec, result.output_dir / "timing_report.txt");
        break;
      }
      if (iter == max_iters - 1) {
        if (!snapshot)
          export_iteration(mesh, field, sol.von_mises, stress.relaxed, bars, iter,
                           result.output_dir);
        write_timing_report(rec, result.output_dir / "timing_report.txt");
        break;
      }

      // Design update.
      Eigen::VectorXd cons(1);
      cons(0) = rec.constraint;
      Eigen::MatrixXd dcons(1, dcon.size());
      dcons.row(0) = dcon.transpose();
      const MoveLimitBox box =
          apply_move_limit(z_hat, config.optimizer.move_limit, bound_lo, bound_hi);
      z_hat = mma.step(z_hat, rec.objective, dobj, cons, dcons, box);
      iterate_history.push_back(z_hat);
    } catch (const std::exception& e) {
      throw std::runtime_error("iteration " + std::to_string(iter) + ": " + e.what());
    }
  }

  save_design(result.design, result.output_dir / "design_final.json");
  return result;
}

}  // namespace gpamr
