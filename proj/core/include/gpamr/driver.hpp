// SPDX-FileCopyrightText: 2026 The gpamr authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "gpamr/problem.hpp"

namespace gpamr {

struct RunOptions {
  bool full_resolution = false;  // globally refined mesh, no per-iteration AMR
  int threads = 1;
  std::string out_dir;           // overrides config.output.directory when set
  int max_iterations = -1;       // overrides config when positive
  bool quiet = false;
};

struct IterationTimings {
  double refine = 0.0;
  double project = 0.0;
  double assemble = 0.0;
  double solve = 0.0;
  double responses = 0.0;
  double sensitivities = 0.0;
  double total() const { return refine + project + assemble + solve + responses + sensitivities; }
};

struct IterationRecord {
  int iteration = 0;
  double objective = 0.0;
  double constraint = 0.0;   // normalized, feasible when <= 0
  double max_delta_z = 0.0;  // max scaled-variable change from the previous iterate
  int n_cells = 0;
  IterationTimings timings;
};

struct RunResult {
  std::vector<BarComponent> design;
  bool converged = false;
  int iterations = 0;
  double objective = 0.0;
  double constraint = 0.0;
  double volume_fraction = 0.0;
  double max_relaxed_stress = 0.0;  // stress problems
  int final_cells = 0;
  std::vector<IterationRecord> history;
  std::filesystem::path output_dir;
};

/// The optimization loop: per iteration adapt (or reuse the globally
/// refined mesh), solve, evaluate responses and sensitivities, log and
/// export, check the stopping rule, then take an MMA step under the move
/// limit. Writes history.csv, periodic VTK/design snapshots, the final
/// design, and a timing report to the output directory.
RunResult run(const ProblemConfig& config, const RunOptions& options = {});

/// Write one iteration snapshot: mesh_XXXX.vtk with density, von Mises,
/// relaxed stress and penalized-alpha fields, plus design_XXXX.json.
void export_iteration(const QuadMesh& mesh, const DensityField& field,
                      const std::vector<double>& von_mises,
                      const std::vector<double>& relaxed,
                      std::span<const BarComponent> bars, int iteration,
                      const std::filesystem::path& dir);

}  // namespace gpamr
