#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "cornerflow/geometry.hpp"
#include "cornerflow/mesh.hpp"

namespace cornerflow {

/// Continuous P2 velocity nodes (vertices, then edge midpoints) and
/// discontinuous P1 pressure nodes (three per element, never shared).
struct DofMap {
  std::vector<Vec2> velocity_nodes;
  std::vector<bool> velocity_on_boundary;
  std::vector<std::array<Index, 6>> element_velocity;  // local P2 node -> global node
  std::size_t num_elements = 0;

  std::size_t num_velocity_nodes() const { return velocity_nodes.size(); }
  /// Velocity unknowns: component d of node i is d * num_velocity_nodes() + i.
  std::size_t num_velocity_dofs() const { return 2 * velocity_nodes.size(); }
  std::size_t num_pressure_dofs() const { return 3 * num_elements; }
  static Index pressure_dof(Index element, int local) { return 3 * element + static_cast<Index>(local); }
};

DofMap build_dofs(const Mesh& mesh);

/// Physical location of pressure node j (a vertex of element j / 3).
Vec2 pressure_node(const Mesh& mesh, Index j);

}  // namespace cornerflow
