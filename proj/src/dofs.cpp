#include "cornerflow/dofs.hpp"

#include <algorithm>
#include <map>
#include <utility>

namespace cornerflow {

DofMap build_dofs(const Mesh& mesh) {
  validate_mesh(mesh);
  DofMap dofs;
  const std::size_t nv = mesh.num_vertices();
  dofs.num_elements = mesh.num_triangles();

  std::map<std::pair<Index, Index>, Index> edge_index;
  for (const auto& tri : mesh.triangles) {
    for (int k = 0; k < 3; ++k) {
      const Index a = tri[k];
      const Index b = tri[(k + 1) % 3];
      edge_index.emplace(std::minmax(a, b), 0);
    }
  }
  dofs.velocity_nodes = mesh.vertices;
  dofs.velocity_nodes.reserve(nv + edge_index.size());
  for (auto& [edge, idx] : edge_index) {
    idx = dofs.velocity_nodes.size();
    dofs.velocity_nodes.push_back(0.5 * (mesh.vertices[edge.first] + mesh.vertices[edge.second]));
  }

  dofs.velocity_on_boundary.assign(dofs.velocity_nodes.size(), false);
  for (const auto& e : mesh.boundary) {
    dofs.velocity_on_boundary[e.v[0]] = true;
    dofs.velocity_on_boundary[e.v[1]] = true;
    dofs.velocity_on_boundary[edge_index.at(std::minmax(e.v[0], e.v[1]))] = true;
  }

  dofs.element_velocity.reserve(mesh.num_triangles());
  for (const auto& tri : mesh.triangles) {
    dofs.element_velocity.push_back({tri[0], tri[1], tri[2], edge_index.at(std::minmax(tri[0], tri[1])),
                                     edge_index.at(std::minmax(tri[1], tri[2])),
                                     edge_index.at(std::minmax(tri[2], tri[0]))});
  }
  return dofs;
}

Vec2 pressure_node(const Mesh& mesh, Index j) { return mesh.vertices[mesh.triangles[j / 3][j % 3]]; }

}  // namespace cornerflow
