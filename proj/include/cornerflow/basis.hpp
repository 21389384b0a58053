#pragma once

#include <array>

#include "cornerflow/geometry.hpp"

namespace cornerflow {

/// Quadratic Lagrange basis on the reference triangle. Local nodes: vertices
/// 0, 1, 2 followed by the midpoints of edges (0,1), (1,2), (2,0).
struct P2Values {
  std::array<double, 6> value{};
  std::array<Vec2, 6> grad{};  // reference-coordinate gradients
};

/// Linear Lagrange basis on the reference triangle (vertex nodes).
struct P1Values {
  std::array<double, 3> value{};
  std::array<Vec2, 3> grad{};
};

P2Values ref_basis_p2(const Vec2& ref);
P1Values ref_basis_p1(const Vec2& ref);

/// Reference coordinates of the six P2 nodes.
const std::array<Vec2, 6>& p2_reference_nodes();

/// Affine map of a physical triangle.
struct AffineMap {
  Vec2 origin;
  Vec2 e1, e2;              // columns of the Jacobian
  double det = 0;           // 2 * signed area
  Vec2 inv_row0, inv_row1;  // rows of J^{-1}

  explicit AffineMap(const std::array<Vec2, 3>& tri);
  Vec2 to_physical(const Vec2& ref) const { return origin + ref.x * e1 + ref.y * e2; }
  Vec2 to_reference(const Vec2& x) const;
  // grad_x = J^{-T} grad_ref
  Vec2 physical_gradient(const Vec2& ref_grad) const {
    return {inv_row0.x * ref_grad.x + inv_row1.x * ref_grad.y, inv_row0.y * ref_grad.x + inv_row1.y * ref_grad.y};
  }
};

/// Value and physical gradient of a weighted basis function chi * rho^{-sigma}.
struct WeightedValue {
  double value = 0.0;
  Vec2 grad;
};

/// Weighted P2 (velocity) or P1 (pressure) basis evaluated at a reference
/// point of the element `tri`. grad = rho^{-sigma} grad chi + chi grad rho^{-sigma}.
/// Throws ValidationError when the physical point is the origin and sigma > 0.
std::array<WeightedValue, 6> weighted_basis_p2(const std::array<Vec2, 3>& tri, const Vec2& ref, double sigma,
                                               double delta);
std::array<WeightedValue, 3> weighted_basis_p1(const std::array<Vec2, 3>& tri, const Vec2& ref, double sigma,
                                               double delta);

}  // namespace cornerflow
