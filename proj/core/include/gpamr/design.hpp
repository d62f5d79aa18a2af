// SPDX-FileCopyrightText: 2026 The gpamr authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

#include <span>
#include <vector>

#include "gpamr/geometry.hpp"

namespace gpamr {

/// Pack bars into a flat design vector, kVarsPerBar entries per bar in the
/// order [p0x, p0y, p1x, p1y, width, alpha].
Eigen::VectorXd pack_design(std::span<const BarComponent> bars);

/// Inverse of pack_design. Component invariants are re-checked.
std::vector<BarComponent> unpack_design(const Eigen::VectorXd& z);

/// Per-variable box bounds on the unscaled design vector.
struct DesignBounds {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  /// Bounds for n_bars bars: endpoints confined to [lo, hi], width in
  /// [width_min, width_max], alpha in [0,1].
  static DesignBounds for_bars(int n_bars, const Vec2& lo, const Vec2& hi,
                               double width_min, double width_max);
};

/// Affine bijection between the physical design vector and the scaled
/// vector in [0,1]^N used by the optimizer.
class DesignScaling {
 public:
  explicit DesignScaling(DesignBounds bounds);

  Eigen::VectorXd scale(const Eigen::VectorXd& z) const;
  Eigen::VectorXd unscale(const Eigen::VectorXd& z_hat) const;

  /// Chain-rule factor dz/dz_hat per variable (= upper - lower).
  const Eigen::VectorXd& range() const { return range_; }
  const DesignBounds& bounds() const { return bounds_; }
  Eigen::Index size() const { return range_.size(); }

 private:
  DesignBounds bounds_;
  Eigen::VectorXd range_;
};

}  // namespace gpamr
