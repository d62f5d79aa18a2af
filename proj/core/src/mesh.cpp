// SPDX-FileCopyrightText: 2026 The gpamr authors
// SPDX-License-Identifier: Apache-2.0

#include "gpamr/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace gpamr {

double circumradius(double h) { return std::numbers::sqrt2 * 0.5 * h; }

namespace {

inline uint64_t cell_key(int32_t level, int64_t ix, int64_t iy) {
  // ix, iy < 2^28 for any realistic mesh; level < 64.
  return (uint64_t(level) << 56) | (uint64_t(ix) << 28) | uint64_t(iy);
}

inline uint64_t node_key(int64_t kx, int64_t ky) {
  return (uint64_t(kx) << 32) | uint64_t(ky);
}

constexpr int kChildDx[4] = {0, 1, 0, 1};  // SW, SE, NW, NE
constexpr int kChildDy[4] = {0, 0, 1, 1};

constexpr int kDirDx[4] = {-1, 1, 0, 0};  // W, E, S, N
constexpr int kDirDy[4] = {0, 0, -1, 1};

// Child slots touching a given side of their parent.
constexpr int kSideChildren[4][2] = {{0, 2}, {1, 3}, {0, 1}, {2, 3}};

inline Direction opposite(Direction d) {
  switch (d) {
    case kWest: return kEast;
    case kEast: return kWest;
    case kSouth: return kNorth;
    default: return kSouth;
  }
}

}  // namespace

QuadMesh QuadMesh::uniform(double len_x, double len_y, double h_coarse,
                           const std::function<bool(const Vec2&)>& keep) {
  if (!(h_coarse > 0)) throw std::invalid_argument("QuadMesh: h_coarse must be positive");
  const double fx = len_x / h_coarse;
  const double fy = len_y / h_coarse;
  const auto nx = static_cast<int64_t>(std::llround(fx));
  const auto ny = static_cast<int64_t>(std::llround(fy));
  if (nx < 1 || ny < 1 || std::abs(fx - double(nx)) > 1e-9 * fx ||
      std::abs(fy - double(ny)) > 1e-9 * fy)
    throw std::invalid_argument("QuadMesh: h_coarse must divide the envelope extents");

  QuadMesh m;
  m.len_x_ = len_x;
  m.len_y_ = len_y;
  m.h_coarse_ = h_coarse;
  m.nx0_ = nx;
  m.ny0_ = ny;
  for (int64_t iy = 0; iy < ny; ++iy) {
    for (int64_t ix = 0; ix < nx; ++ix) {
      const Vec2 c((double(ix) + 0.5) * h_coarse, (double(iy) + 0.5) * h_coarse);
      if (keep && !keep(c)) continue;
      QuadCell cell;
      cell.level = 0;
      cell.ix = ix;
      cell.iy = iy;
      m.cells_.push_back(cell);
    }
  }
  if (m.cells_.empty()) throw std::invalid_argument("QuadMesh: empty domain");
  m.n_roots_ = static_cast<int>(m.cells_.size());
  m.finalize();
  return m;
}

QuadMesh QuadMesh::coarsest() const {
  QuadMesh m;
  m.len_x_ = len_x_;
  m.len_y_ = len_y_;
  m.h_coarse_ = h_coarse_;
  m.nx0_ = nx0_;
  m.ny0_ = ny0_;
  m.n_roots_ = n_roots_;
  m.cells_.assign(cells_.begin(), cells_.begin() + n_roots_);
  for (auto& c : m.cells_) c.first_child = -1;
  m.finalize();
  return m;
}

QuadMesh QuadMesh::refined(const std::vector<int>& marked) const {
  std::vector<char> mark(cells_.size(), 0);
  for (int id : marked) {
    if (id < 0 || id >= n_cells() || !cells_[size_t(id)].is_leaf())
      throw std::invalid_argument("QuadMesh::refined: marked id is not an active cell");
    mark[size_t(id)] = 1;
  }

  // 2:1 closure: a coarser edge-neighbor of a marked cell must split too.
  // The fixed point is unique, so traversal order does not matter.
  bool changed = true;
  while (changed) {
    changed = false;
    for (int id = 0; id < n_cells(); ++id) {
      if (!mark[size_t(id)]) continue;
      for (int d = 0; d < 4; ++d) {
        for (int nb : leaf_edge_neighbors(id, Direction(d))) {
          if (cells_[size_t(nb)].level < cells_[size_t(id)].level && !mark[size_t(nb)]) {
            mark[size_t(nb)] = 1;
            changed = true;
          }
        }
      }
    }
  }

  QuadMesh m = *this;
  const int old_n = n_cells();
  for (int id = 0; id < old_n; ++id) {
    if (!mark[size_t(id)]) continue;
    auto& parent = m.cells_[size_t(id)];
    parent.first_child = static_cast<int32_t>(m.cells_.size());
    for (int c = 0; c < 4; ++c) {
      QuadCell child;
      child.level = parent.level + 1;
      child.ix = 2 * parent.ix + kChildDx[c];
      child.iy = 2 * parent.iy + kChildDy[c];
      child.parent = id;
      m.cells_.push_back(child);
    }
  }
  m.finalize();
  return m;
}

void QuadMesh::finalize() {
  active_.clear();
  cell_index_.clear();
  cell_index_.reserve(cells_.size() * 2);
  max_level_ = 0;
  for (int id = 0; id < n_cells(); ++id) {
    const auto& c = cells_[size_t(id)];
    cell_index_.emplace(cell_key(c.level, c.ix, c.iy), id);
    if (c.is_leaf()) {
      active_.push_back(id);
      max_level_ = std::max(max_level_, int(c.level));
    }
  }

  nodes_.clear();
  node_index_.clear();
  conn_.assign(active_.size(), {});
  const double h_min = h_coarse_ / double(int64_t{1} << max_level_);
  for (size_t a = 0; a < active_.size(); ++a) {
    const auto& c = cells_[size_t(active_[a])];
    const int64_t step = int64_t{1} << (max_level_ - c.level);
    const int64_t x0 = c.ix * step, y0 = c.iy * step;
    const int64_t kx[4] = {x0, x0 + step, x0 + step, x0};
    const int64_t ky[4] = {y0, y0, y0 + step, y0 + step};
    for (int k = 0; k < 4; ++k) {
      auto [it, inserted] =
          node_index_.emplace(node_key(kx[k], ky[k]), static_cast<int>(nodes_.size()));
      if (inserted) nodes_.emplace_back(double(kx[k]) * h_min, double(ky[k]) * h_min);
      conn_[a][k] = it->second;
    }
  }
}

Vec2 QuadMesh::cell_origin(int id) const {
  const auto& c = cells_[size_t(id)];
  const double h = cell_size(id);
  return {double(c.ix) * h, double(c.iy) * h};
}

Vec2 QuadMesh::centroid(int id) const {
  const double h = cell_size(id);
  return cell_origin(id) + Vec2(0.5 * h, 0.5 * h);
}

std::array<Vec2, 4> QuadMesh::corners(int id) const {
  const Vec2 o = cell_origin(id);
  const double h = cell_size(id);
  return {o, o + Vec2(h, 0), o + Vec2(h, h), o + Vec2(0, h)};
}

double QuadMesh::active_area() const {
  double area = 0.0;
  for (int id : active_) {
    const double h = cell_size(id);
    area += h * h;
  }
  return area;
}

int QuadMesh::find_enclosing(int32_t level, int64_t ix, int64_t iy) const {
  while (level >= 0) {
    auto it = cell_index_.find(cell_key(level, ix, iy));
    if (it != cell_index_.end()) return it->second;
    --level;
    ix >>= 1;
    iy >>= 1;
  }
  return -1;
}

void QuadMesh::collect_side_leaves(int id, Direction side, std::vector<int>& out) const {
  const auto& c = cells_[size_t(id)];
  if (c.is_leaf()) {
    out.push_back(id);
    return;
  }
  for (int slot : kSideChildren[side]) collect_side_leaves(c.first_child + slot, side, out);
}

std::vector<int> QuadMesh::leaf_edge_neighbors(int id, Direction dir) const {
  const auto& c = cells_[size_t(id)];
  const int64_t nx = c.ix + kDirDx[dir];
  const int64_t ny = c.iy + kDirDy[dir];
  const int64_t ex = nx0_ << c.level, ey = ny0_ << c.level;
  if (nx < 0 || ny < 0 || nx >= ex || ny >= ey) return {};
  const int found = find_enclosing(c.level, nx, ny);
  if (found < 0) return {};  // outside an L-shaped domain
  std::vector<int> out;
  if (cells_[size_t(found)].is_leaf()) {
    out.push_back(found);
  } else if (cells_[size_t(found)].level == c.level) {
    collect_side_leaves(found, opposite(dir), out);
  } else {
    out.push_back(found);  // non-leaf ancestor: should not happen on valid trees
  }
  return out;
}

bool QuadMesh::is_balanced() const {
  for (int id : active_) {
    for (int d = 0; d < 4; ++d) {
      for (int nb : leaf_edge_neighbors(id, Direction(d))) {
        if (std::abs(cells_[size_t(nb)].level - cells_[size_t(id)].level) > 1)
          return false;
      }
    }
  }
  return true;
}

int QuadMesh::node_at(int64_t kx, int64_t ky) const {
  auto it = node_index_.find(node_key(kx, ky));
  return it == node_index_.end() ? -1 : it->second;
}

std::vector<HangingNodeConstraint> build_constraints(const QuadMesh& mesh) {
  if (!mesh.is_balanced())
    throw std::runtime_error("build_constraints: mesh violates the 2:1 balance rule");

  std::vector<HangingNodeConstraint> constraints;
  for (size_t a = 0; a < mesh.active().size(); ++a) {
    const int id = mesh.active()[a];
    const auto& c = mesh.cell(id);
    if (c.level == mesh.max_level()) continue;  // no finer neighbor possible
    const int64_t step = int64_t{1} << (mesh.max_level() - c.level);
    const int64_t x0 = c.ix * step, y0 = c.iy * step;
    const auto& nodes = mesh.cell_nodes(static_cast<int>(a));
    // Edges as (corner, corner) in CCW order: S, E, N, W.
    const int edge_ends[4][2] = {{0, 1}, {1, 2}, {2, 3}, {3, 0}};
    const int64_t mids[4][2] = {{x0 + step / 2, y0},
                                {x0 + step, y0 + step / 2},
                                {x0 + step / 2, y0 + step},
                                {x0, y0 + step / 2}};
    for (int e = 0; e < 4; ++e) {
      const int mid = mesh.node_at(mids[e][0], mids[e][1]);
      if (mid < 0) continue;  // conforming edge
      constraints.push_back({mid, nodes[edge_ends[e][0]], nodes[edge_ends[e][1]]});
    }
  }
  return constraints;
}

}  // namespace gpamr
