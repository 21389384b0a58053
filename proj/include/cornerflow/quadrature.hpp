#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "cornerflow/geometry.hpp"
#include "cornerflow/mesh.hpp"

namespace cornerflow {

/// Rule on the reference triangle (0,0), (1,0), (0,1). Weights sum to 1/2.
struct QuadratureRule {
  std::vector<Vec2> points;
  std::vector<double> weights;
  int degree = 0;

  std::size_t size() const { return points.size(); }
};

/// Collapsed (Duffy) Gauss-Legendre product rule exact for polynomials of
/// total degree <= `degree`. No point lies on the triangle boundary.
QuadratureRule triangle_rule(int degree);

/// Composite rule graded toward reference vertex `vertex` (0, 1 or 2): the
/// triangle is cut `levels` times at ratio 1/2 toward that vertex and every
/// piece carries the base rule of the given degree.
QuadratureRule graded_rule(int degree, int vertex, int levels);

/// Composite rule on the reference triangle for a physical element `tri`
/// that the circle |x| = delta cuts: sub-triangles straddling the circle are
/// split into four, `depth` times, so the kink of rho is resolved. Leaves
/// that touch the origin carry the graded rule toward it.
QuadratureRule circle_resolved_rule(const std::array<Vec2, 3>& tri, double delta, int degree, int depth, int levels);

inline constexpr int kDefaultCircleDepth = 5;

/// Per-element rule assignment.
struct QuadratureAssignment {
  std::vector<QuadratureRule> rules;  // [0] plain rule, [1..3] graded toward vertex 0..2
  std::vector<int> rule_of_element;

  const QuadratureRule& rule(Index element) const { return rules[rule_of_element[element]]; }
};

inline constexpr int kDefaultQuadratureDegree = 6;
inline constexpr int kDefaultGradingLevels = 4;

/// Elements within distance 2*delta of the origin get the graded rule toward
/// their vertex closest to the origin, elements cut by the circle |x| = delta
/// get their own circle-resolved rule, all others get the plain rule.
/// Requires degree >= 6.
QuadratureAssignment build_quadrature(const Mesh& mesh, double delta, int degree = kDefaultQuadratureDegree,
                                      int levels = kDefaultGradingLevels);

/// Distance from the origin to the closed triangle.
double distance_to_origin(const std::array<Vec2, 3>& tri);

}  // namespace cornerflow
