// SPDX-FileCopyrightText: 2026 The gpamr authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <unordered_map>
#include <vector>

#include "gpamr/geometry.hpp"

namespace gpamr {

/// One quadtree cell. Cells are square; a cell at level l in a mesh with
/// coarse size h_c has size h_c / 2^l and grid coordinates (ix, iy) within
/// the level-l grid. Leaves are the active (analysis) cells.
struct QuadCell {
  int32_t level = 0;
  int64_t ix = 0;
  int64_t iy = 0;
  int32_t parent = -1;
  int32_t first_child = -1;  // children SW,SE,NW,NE; -1 for leaves

  bool is_leaf() const { return first_child < 0; }
};

/// Radius of the circle circumscribing a square cell of size h.
double circumradius(double h);

/// Edge directions, also the index convention of leaf_edge_neighbors.
enum Direction : int { kWest = 0, kEast = 1, kSouth = 2, kNorth = 3 };

/// Hierarchical quadtree mesh over a rectangular envelope with optional
/// deactivated root cells (L-shaped domains). Meshes are immutable after
/// construction; refinement returns a new mesh.
class QuadMesh {
 public:
  /// Uniform coarsest grid over [0,Lx]x[0,Ly] with root cell size h_coarse
  /// (which must divide both extents). Root cells whose centroid fails
  /// `keep` are excluded from the domain entirely.
  static QuadMesh uniform(double len_x, double len_y, double h_coarse,
                          const std::function<bool(const Vec2&)>& keep = {});

  /// New mesh with each marked active cell split in four, plus whatever
  /// additional splits the 2:1 edge-balance closure requires. Marked ids
  /// must refer to active cells.
  QuadMesh refined(const std::vector<int>& marked) const;

  /// Fresh mesh holding only this mesh's root cells.
  QuadMesh coarsest() const;

  // --- tree access ---
  int n_cells() const { return static_cast<int>(cells_.size()); }
  const QuadCell& cell(int id) const { return cells_[static_cast<size_t>(id)]; }
  const std::vector<int>& active() const { return active_; }
  int n_active() const { return static_cast<int>(active_.size()); }
  int max_level() const { return max_level_; }

  double h_coarse() const { return h_coarse_; }
  double len_x() const { return len_x_; }
  double len_y() const { return len_y_; }

  double cell_size(int id) const { return h_coarse_ / double(int64_t{1} << cells_[size_t(id)].level); }
  Vec2 cell_origin(int id) const;
  Vec2 centroid(int id) const;
  /// Corner coordinates in SW, SE, NE, NW (counter-clockwise) order.
  std::array<Vec2, 4> corners(int id) const;

  /// Sum of active cell areas (equals the domain area).
  double active_area() const;

  /// Active cells adjacent to `id` across the given edge (0, 1, or 2 of
  /// them on a balanced mesh; more if the mesh is unbalanced).
  std::vector<int> leaf_edge_neighbors(int id, Direction dir) const;

  /// True iff every pair of edge-adjacent active cells differs by at most
  /// one level. Corner adjacency is deliberately not constrained.
  bool is_balanced() const;

  // --- node table (built over active cells) ---
  int n_nodes() const { return static_cast<int>(nodes_.size()); }
  const Vec2& node(int i) const { return nodes_[static_cast<size_t>(i)]; }
  /// Corner node ids of active()[active_index], CCW from SW.
  const std::array<int, 4>& cell_nodes(int active_index) const {
    return conn_[static_cast<size_t>(active_index)];
  }

  /// Node id at integer lattice coordinates (unit h_coarse/2^max_level),
  /// or -1. The lattice is also how nodes are deduplicated, so shared
  /// corners are bit-identical.
  int node_at(int64_t kx, int64_t ky) const;

 private:
  void finalize();
  int find_enclosing(int32_t level, int64_t ix, int64_t iy) const;
  void collect_side_leaves(int id, Direction side, std::vector<int>& out) const;

  double len_x_ = 0, len_y_ = 0, h_coarse_ = 1;
  int64_t nx0_ = 0, ny0_ = 0;  // root grid extents
  int n_roots_ = 0;
  int max_level_ = 0;
  std::vector<QuadCell> cells_;
  std::vector<int> active_;
  std::unordered_map<uint64_t, int> cell_index_;   // (level,ix,iy) -> cell id
  std::vector<Vec2> nodes_;
  std::vector<std::array<int, 4>> conn_;
  std::unordered_map<uint64_t, int> node_index_;   // lattice key -> node id

  friend std::vector<struct HangingNodeConstraint> build_constraints(const QuadMesh&);
};

/// A hanging mid-edge node tied to the endpoints of the coarse edge it
/// sits on, with weights (1/2, 1/2).
struct HangingNodeConstraint {
  int node = -1;
  int master0 = -1;
  int master1 = -1;
};

/// One constraint per hanging node. Throws if the mesh is not 2:1 balanced.
std::vector<HangingNodeConstraint> build_constraints(const QuadMesh& mesh);

}  // namespace gpamr
