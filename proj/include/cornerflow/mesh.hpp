#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cornerflow/geometry.hpp"

namespace cornerflow {

using Index = std::size_t;

enum class DomainKind { Omega0, Omega1, Omega2, Omega3, Custom };

std::string to_string(DomainKind kind);
DomainKind parse_domain_kind(std::string_view name);

/// Polygon with the corner vertex at the origin. The interior angle at the
/// origin is `corner_angle`; for the convex control domain it is pi.
struct DomainSpec {
  DomainKind kind = DomainKind::Omega0;
  std::vector<Vec2> vertices;  // counterclockwise
  double corner_angle = 0.0;
  Index corner_vertex = 0;
  // Coarse block decomposition consumed by the mesher. Every block is a
  // counterclockwise triangle whose edges are shared exactly with its
  // neighbours or lie on the polygon boundary.
  std::vector<std::array<Vec2, 3>> blocks;

  double area() const;
  double shortest_edge() const;
  double interior_angle(Index vertex) const;
};

/// Omega_0 .. Omega_3. Omega_3 uses the exact angle 9pi/8.
DomainSpec build_domain(DomainKind kind);

/// Unit-box based polygon with a re-entrant corner of angle `omega` in (pi, 2pi).
DomainSpec build_domain(double omega);

struct BoundaryEdge {
  std::array<Index, 2> v{};
  int flag = -1;  // index of the polygon edge the mesh edge lies on
};

struct Mesh {
  std::vector<Vec2> vertices;
  std::vector<std::array<Index, 3>> triangles;  // counterclockwise
  std::vector<BoundaryEdge> boundary;
  // macro triangle -> its three barycentric children (filled by barycentric_split)
  std::vector<std::array<Index, 3>> macro_children;
  double h = 0.0;
  bool split = false;

  std::size_t num_vertices() const { return vertices.size(); }
  std::size_t num_triangles() const { return triangles.size(); }
  std::array<Vec2, 3> corners(Index t) const {
    const auto& tri = triangles[t];
    return {vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]};
  }
  double area(Index t) const;
  double total_area() const;
};

/// Quasi-uniform conforming triangulation. Each domain block is refined
/// uniformly into n^2 similar triangles with n = ceil(1/h); the quality
/// targets (diameters in [h/2, 2h], ratio <= 3, angles >= 20 deg) are
/// checked and a ValidationError naming the worst element is thrown on failure.
Mesh triangulate(const DomainSpec& domain, double h);

/// Splits every triangle into three through its centroid. Allowed once per mesh.
Mesh barycentric_split(const Mesh& mesh);

struct MeshReport {
  std::size_t num_vertices = 0;
  std::size_t num_triangles = 0;
  std::size_t num_boundary_edges = 0;
  double h_min = 0.0;  // smallest element diameter
  double h_max = 0.0;  // largest element diameter
  double min_angle_deg = 0.0;
  double area = 0.0;
};

MeshReport mesh_report(const Mesh& mesh);
std::string format_report(const MeshReport& report);

/// Structural checks: positive areas, conformity (edge incidence 1 or 2),
/// boundary list consistent with incidence, macro map well formed.
/// Throws ValidationError describing the first violation.
void validate_mesh(const Mesh& mesh);

/// Plain-text exchange format: `nv nt nb`, then vertex, triangle and
/// boundary-edge lines.
void write_mesh(std::ostream& out, const Mesh& mesh);
Mesh read_mesh(std::istream& in);

double triangle_diameter(const std::array<Vec2, 3>& t);
double triangle_min_angle(const std::array<Vec2, 3>& t);  // radians

}  // namespace cornerflow
