// SPDX-FileCopyrightText: 2026 The gpamr authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "gpamr/fem.hpp"
#include "gpamr/geometry.hpp"
#include "gpamr/responses.hpp"

namespace gpamr {

enum class ProblemKind { compliance, stress };

/// Design envelope: a rectangle, optionally with a rectangular cut removed
/// from its top-right corner (L-shaped domains). The cut must be grid
/// aligned with the coarse mesh.
struct EnvelopeSpec {
  double len_x = 1.0;
  double len_y = 1.0;
  bool lshape = false;
  double cut_x = 0.0;  // removed extent measured from the right edge
  double cut_y = 0.0;  // removed extent measured from the top edge
};

struct AmrConfig {
  double coarse_size = 1.0;  // h_c
  int levels = 0;            // N_rl
  double rho_th = 0.9;
  double band_factor = 2.0;
};

struct OptimizerConfig {
  double move_limit = 0.05;
  double constraint_penalty = 10.0;  // MMA coefficient M
  int max_iterations = 300;
  double convergence_tol = 5e-3;
};

struct WidthBounds {
  double min = 0.1;
  double max = 1.0;
};

struct OutputConfig {
  std::string directory = "out";
  int vtk_every = 10;
};

/// Full description of one optimization problem; presets and JSON files
/// both produce this.
struct ProblemConfig {
  ProblemKind kind = ProblemKind::compliance;
  std::string name = "problem";
  EnvelopeSpec envelope;
  MaterialModel material{1e5, 0.3, true};
  ProjectionParams projection;  // radius field unused (set per cell)
  AmrConfig amr;
  OptimizerConfig optimizer;
  double volume_limit = 0.0;    // compliance problems: v*
  StressParams stress;          // stress problems: sigma*, aggregation
  std::vector<BarComponent> bars;
  WidthBounds width;
  std::vector<DirichletRegion> supports;
  std::vector<PointLoad> point_loads;
  std::vector<EdgeTraction> tractions;
  std::vector<std::array<double, 4>> frozen_fine;  // [x0,y0,x1,y1] kept at finest size
  std::string solver = "direct";                   // "direct" or "cg"
  OutputConfig output;

  /// Throws std::invalid_argument describing the first violated rule.
  void validate() const;

  /// Centroid-inside-domain predicate for QuadMesh::uniform.
  bool inside_domain(const Vec2& p) const;
};

/// Built-in benchmark presets.
ProblemConfig mbb_preset();
ProblemConfig lbracket_preset();

/// JSON (de)serialization. `load_config` accepts a preset name ("mbb",
/// "lbracket") or a path to a JSON file.
std::string to_json_string(const ProblemConfig& config);
ProblemConfig config_from_json_string(const std::string& text);
ProblemConfig load_config(const std::string& name_or_path);
void save_config(const ProblemConfig& config, const std::filesystem::path& path);

/// Design parameter files: the bars array in the same schema the config
/// parser accepts, so a design file can seed a new run directly.
void save_design(std::span<const BarComponent> bars, const std::filesystem::path& path);
std::vector<BarComponent> load_design(const std::filesystem::path& path);

/// Hash of the canonical serialized config with the output section
/// cleared; identical for runs that share the problem setup.
uint64_t config_fingerprint(const ProblemConfig& config);

}  // namespace gpamr
