// SPDX-FileCopyrightText: 2026 The gpamr authors
// SPDX-License-Identifier: Apache-2.0

#include "gpamr/design.hpp"

#include <stdexcept>

namespace gpamr {

Eigen::VectorXd pack_design(std::span<const BarComponent> bars) {
  Eigen::VectorXd z(static_cast<Eigen::Index>(bars.size()) * kVarsPerBar);
  for (size_t i = 0; i < bars.size(); ++i) {
    const auto& b = bars[i];
    z.segment<kVarsPerBar>(static_cast<Eigen::Index>(i) * kVarsPerBar)
        << b.p0.x(), b.p0.y(), b.p1.x(), b.p1.y(), b.width, b.alpha;
  }
  return z;
}

std::vector<BarComponent> unpack_design(const Eigen::VectorXd& z) {
  if (z.size() % kVarsPerBar != 0)
    throw std::invalid_argument("unpack_design: vector size is not a multiple of 6");
  std::vector<BarComponent> bars;
  bars.reserve(static_cast<size_t>(z.size()) / kVarsPerBar);
  for (Eigen::Index i = 0; i < z.size(); i += kVarsPerBar) {
    bars.emplace_back(Vec2(z(i), z(i + 1)), Vec2(z(i + 2), z(i + 3)), z(i + 4),
                      z(i + 5));
  }
  return bars;
}

DesignBounds DesignBounds::for_bars(int n_bars, const Vec2& lo, const Vec2& hi,
                                    double width_min, double width_max) {
  DesignBounds b;
  b.lower.resize(static_cast<Eigen::Index>(n_bars) * kVarsPerBar);
  b.upper.resize(b.lower.size());
  for (int i = 0; i < n_bars; ++i) {
    const Eigen::Index k = static_cast<Eigen::Index>(i) * kVarsPerBar;
    b.lower.segment<kVarsPerBar>(k) << lo.x(), lo.y(), lo.x(), lo.y(), width_min, 0.0;
    b.upper.segment<kVarsPerBar>(k) << hi.x(), hi.y(), hi.x(), hi.y(), width_max, 1.0;
  }
  return b;
}

DesignScaling::DesignScaling(DesignBounds bounds) : bounds_(std::move(bounds)) {
  if (bounds_.lower.size() != bounds_.upper.size())
    throw std::invalid_argument("DesignScaling: bound size mismatch");
  range_ = bounds_.upper - bounds_.lower;
  if ((range_.array() <= 0.0).any())
    throw std::invalid_argument("DesignScaling: inverted or empty bounds");
}

Eigen::VectorXd DesignScaling::scale(const Eigen::VectorXd& z) const {
  return ((z - bounds_.lower).array() / range_.array()).matrix();
}

Eigen::VectorXd DesignScaling::unscale(const Eigen::VectorXd& z_hat) const {
  return bounds_.lower + (z_hat.array() * range_.array()).matrix();
}

}  // namespace gpamr
